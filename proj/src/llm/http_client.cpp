#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <json.hpp>

#include "c2b/error.hpp"
#include "c2b/llm_client.hpp"

namespace c2b {

using nlohmann::json;

HttpLlmConfig http_config_from_env() {
  HttpLlmConfig config;
  if (const char* key = std::getenv(kApiKeyEnv)) config.api_key = key;
  return config;
}

HttpLlmClient::HttpLlmClient(HttpLlmConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos) throw InvalidArgument("base URL needs a scheme: " + config_.base_url);
  const auto path_start = config_.base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = config_.base_url;
  } else {
    scheme_host_port_ = config_.base_url.substr(0, path_start);
    path_prefix_ = config_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

std::string HttpLlmClient::request_body(const CompletionRequest& request) const {
  json body = {{"model", config_.model},
               {"messages",
                {{{"role", "system"}, {"content", config_.system_preamble}},
                 {{"role", "user"}, {"content", request.prompt}}}},
               {"temperature", request.temperature},
               {"max_tokens", request.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;
  return body.dump();
}

std::string HttpLlmClient::parse_response(std::string_view body) {
  try {
    const json obj = json::parse(body);
    return obj.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw LlmError(std::string("malformed chat-completions response: ") + e.what());
  }
}

std::string HttpLlmClient::complete(const CompletionRequest& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(request), "application/json");
  if (!res) throw LlmError("chat-completions request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw LlmError("chat-completions returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  return parse_response(res->body);
}

}  // namespace c2b
