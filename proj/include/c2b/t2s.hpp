#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "c2b/llm_client.hpp"
#include "c2b/tfidf.hpp"

namespace c2b {

struct T2SConfig {
  std::size_t retrieve_k = 5;
  int iterations = 3;
  std::size_t keyword_count = 8;
  /// Not owned; must outlive the session.
  LlmClient* client = nullptr;
  CompletionRequest request_template{};

  /// Throws InvalidArgument on retrieve_k < 1, iterations < 0 or a null client.
  void validate() const;
};

enum class ExampleLabel { kPositive, kNegative };
std::string_view to_string(ExampleLabel label);

struct IterationRecord {
  int iteration = 0;
  std::string prompt;
  std::string candidate;
  double score = 0.0;
  ExampleLabel label = ExampleLabel::kNegative;
};

struct SemanticQuery {
  std::string original;
  std::vector<std::string> keywords;
  std::vector<std::string> retrieved_ids;
  std::vector<IterationRecord> history;
  /// Index into history of the highest score (earliest on ties).
  std::size_t best_index = 0;

  const IterationRecord& best() const { return history.at(best_index); }
};

/// Raised when the session cannot finish; `partial()` holds the iterations
/// completed so far.
class T2SError : public std::runtime_error {
 public:
  T2SError(const std::string& message, SemanticQuery partial)
      : std::runtime_error(message), partial_(std::move(partial)) {}
  const SemanticQuery& partial() const { return partial_; }

 private:
  SemanticQuery partial_;
};

/// Distinct tokens of `text` ranked by TF-IDF weight (raw count times idf)
/// under `index`, descending, ties by ascending token; at most `m`.
/// Out-of-vocabulary tokens weigh 0 and rank last.
std::vector<std::string> extract_keywords(const TfIdfIndex& index, std::string_view text, std::size_t m);

/// Sections: Instruction, Query, Similar samples, Positive examples,
/// Negative examples, Output. Empty example lists are omitted.
std::string build_dynamic_prompt(std::string_view query, const std::vector<std::string>& retrieved_titles,
                                 const std::vector<std::string>& positives,
                                 const std::vector<std::string>& negatives);

/// Mean cosine similarity of `candidate` to the titles of `retrieved_ids`.
/// Throws InvalidArgument on an empty id list or an unknown id.
double score_candidate(const TfIdfIndex& index, std::string_view candidate,
                       const std::vector<std::string>& retrieved_ids);

/// Positive iff score > best_so_far.
ExampleLabel classify_example(double score, double best_so_far);

/// Retrieve, prompt, then refine for config.iterations rounds; every round's
/// prompt carries all earlier classified candidates. Throws T2SError when no
/// similar sample is found or the client fails.
SemanticQuery refine_query(const TfIdfIndex& index, const T2SConfig& config, std::string_view raw_query);

nlohmann::json transcript_json(const SemanticQuery& query);

}  // namespace c2b
