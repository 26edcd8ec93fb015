#include "c2b/t2s.hpp"

#include <algorithm>
#include <map>

#include "c2b/error.hpp"
#include "c2b/prompt_format.hpp"
#include "c2b/tokenize.hpp"

namespace c2b {

namespace ps = prompt_sections;

void T2SConfig::validate() const {
  if (retrieve_k < 1) throw InvalidArgument("retrieve_k must be >= 1");
  if (iterations < 0) throw InvalidArgument("iterations must be >= 0");
  if (client == nullptr) throw InvalidArgument("t2s needs a language-model client");
}

std::string_view to_string(ExampleLabel label) {
  return label == ExampleLabel::kPositive ? "positive" : "negative";
}

std::vector<std::string> extract_keywords(const TfIdfIndex& index, std::string_view text, std::size_t m) {
  std::map<std::string, int> counts;
  for (auto& tok : tokenize(text)) counts[tok] += 1;
  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(counts.size());
  for (const auto& [tok, n] : counts) ranked.emplace_back(tok, n * index.idf(tok));
  // counts is already in lexicographic order, so a stable sort keeps ties ascending.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < m; ++i) out.push_back(ranked[i].first);
  return out;
}

std::string build_dynamic_prompt(std::string_view query, const std::vector<std::string>& retrieved_titles,
                                 const std::vector<std::string>& positives,
                                 const std::vector<std::string>& negatives) {
  PromptBuilder b("Rewrite a neuroscience search query so that it reads like the title of a neuroimaging study.");
  b.section(ps::kInstruction,
            "Use the similar study titles as a guide to the field's vocabulary. Keep what the query is about. "
            "Positive examples scored well against the similar studies; negative examples did not.");
  b.section(ps::kQuery, query);
  b.list(ps::kSimilar, retrieved_titles);
  if (!positives.empty()) b.list(ps::kPositive, positives);
  if (!negatives.empty()) b.list(ps::kNegative, negatives);
  b.section(ps::kOutput, "One line containing only the rewritten query.");
  return b.str();
}

double score_candidate(const TfIdfIndex& index, std::string_view candidate,
                       const std::vector<std::string>& retrieved_ids) {
  if (retrieved_ids.empty()) throw InvalidArgument("score_candidate: no retrieved samples");
  const auto cand = index.vectorize(candidate);
  double sum = 0.0;
  for (const auto& id : retrieved_ids) {
    const auto* doc = index.find_document(id);
    if (doc == nullptr) throw InvalidArgument("score_candidate: unknown id " + id);
    sum += std::clamp(dot(cand, doc->vector), 0.0, 1.0);
  }
  return sum / static_cast<double>(retrieved_ids.size());
}

ExampleLabel classify_example(double score, double best_so_far) {
  return score > best_so_far ? ExampleLabel::kPositive : ExampleLabel::kNegative;
}

namespace {

std::string clean_completion(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto eol = text.find('\n', first);
  std::string line = text.substr(first, eol == std::string::npos ? std::string::npos : eol - first);
  while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
  return line;
}

}  // namespace

SemanticQuery refine_query(const TfIdfIndex& index, const T2SConfig& config, std::string_view raw_query) {
  config.validate();
  SemanticQuery q;
  q.original = std::string(raw_query);
  q.keywords = extract_keywords(index, raw_query, config.keyword_count);
  for (const auto& hit : index.search(join_tokens(q.keywords), config.retrieve_k)) q.retrieved_ids.push_back(hit.id);
  if (q.retrieved_ids.empty()) throw T2SError("no similar samples share vocabulary with the query", std::move(q));

  std::vector<std::string> titles;
  for (const auto& id : q.retrieved_ids) titles.push_back(index.find_document(id)->text);

  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  double best = 0.0;
  for (int it = 0; it <= config.iterations; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.prompt = build_dynamic_prompt(raw_query, titles, positives, negatives);
    CompletionRequest req = config.request_template;
    req.prompt = rec.prompt;
    try {
      rec.candidate = clean_completion(config.client->complete(req));
    } catch (const LlmError& e) {
      throw T2SError("iteration " + std::to_string(it) + ": " + e.what(), std::move(q));
    }
    rec.score = score_candidate(index, rec.candidate, q.retrieved_ids);
    rec.label = classify_example(rec.score, best);
    if (rec.label == ExampleLabel::kPositive) {
      best = rec.score;
      q.best_index = q.history.size();
      positives.push_back(rec.candidate);
    } else {
      negatives.push_back(rec.candidate);
    }
    q.history.push_back(std::move(rec));
  }
  return q;
}

nlohmann::json transcript_json(const SemanticQuery& query) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : query.history) {
    history.push_back({{"iteration", r.iteration},
                       {"prompt", r.prompt},
                       {"candidate", r.candidate},
                       {"score", r.score},
                       {"classification", to_string(r.label)}});
  }
  nlohmann::json out = {{"query", query.original},
                        {"keywords", query.keywords},
                        {"retrieved_ids", query.retrieved_ids},
                        {"history", history}};
  if (!query.history.empty()) {
    out["best"] = {{"iteration", query.best().iteration},
                   {"candidate", query.best().candidate},
                   {"score", query.best().score}};
  }
  return out;
}

}  // namespace c2b
