#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace c2b {

struct CompletionRequest {
  std::string prompt;
  int max_tokens = 512;
  double temperature = 0.0;
  std::optional<std::uint64_t> seed;
};

/// Transport or protocol failure talking to a language model.
class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// Returns the completion text. Throws LlmError on failure.
  virtual std::string complete(const CompletionRequest& request) = 0;
  /// Stable name recorded in provenance and cache entries.
  virtual std::string identifier() const = 0;
};

/// Offline stand-in for a chat model: a rule-based extractive rewriter whose
/// output is a pure function of the prompt. It understands the augmentation
/// and semantic-query prompt layouts (see prompt_format.hpp); any other
/// prompt is answered with its first few tokens.
class MockLlmClient : public LlmClient {
 public:
  std::string complete(const CompletionRequest& request) override;
  std::string identifier() const override { return "mock-extractive-v1"; }

  std::size_t call_count() const { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

struct HttpLlmConfig {
  /// Scheme, host, optional port and path prefix, e.g. "https://api.openai.com/v1".
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  /// Sent as a bearer token when non-empty.
  std::string api_key;
  std::chrono::seconds timeout{60};
  std::string system_preamble =
      "You are an expert neuroscience research assistant. Follow the instructions exactly and reply "
      "with the requested text only.";
};

/// Environment variable holding the API key for HttpLlmClient.
inline constexpr char kApiKeyEnv[] = "C2B_LLM_API_KEY";

/// Config with `api_key` taken from C2B_LLM_API_KEY (empty when unset).
HttpLlmConfig http_config_from_env();

/// OpenAI-style chat-completions client: POST {base_url}/chat/completions
/// with a system preamble and the prompt as the user message.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpLlmConfig config);
  std::string complete(const CompletionRequest& request) override;
  std::string identifier() const override { return "http:" + config_.model; }

  /// Request body for `request`, exposed for tests.
  std::string request_body(const CompletionRequest& request) const;
  /// Extracts choices[0].message.content; throws LlmError otherwise.
  static std::string parse_response(std::string_view body);

 private:
  HttpLlmConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace c2b
