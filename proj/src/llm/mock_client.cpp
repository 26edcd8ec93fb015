#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "c2b/llm_client.hpp"
#include "c2b/prompt_format.hpp"
#include "c2b/random.hpp"
#include "c2b/tokenize.hpp"

namespace c2b {

namespace {

namespace ps = prompt_sections;

const std::map<std::string, std::vector<std::string>>& synonyms() {
  static const std::map<std::string, std::vector<std::string>> table = {
      {"activity", {"activation", "engagement"}},
      {"adults", {"participants", "individuals"}},
      {"brain", {"cerebral", "neural"}},
      {"correlates", {"substrates", "signatures"}},
      {"cortical", {"cortex", "neocortical"}},
      {"during", {"while performing", "throughout"}},
      {"fmri", {"neuroimaging", "bold imaging"}},
      {"functional", {"physiological", "task based"}},
      {"healthy", {"typical", "neurotypical"}},
      {"imaging", {"mapping", "neuroimaging"}},
      {"investigation", {"examination", "study"}},
      {"neural", {"brain", "neuronal"}},
      {"processing", {"computation", "handling"}},
      {"responses", {"reactions", "signals"}},
      {"study", {"investigation", "experiment"}},
      {"volunteers", {"participants", "subjects"}},
      {"young", {"youthful", "early adult"}},
  };
  return table;
}

std::string pick_synonym(const std::string& word, std::uint64_t h) {
  const auto& table = synonyms();
  auto it = table.find(word);
  if (it == table.end()) return word;
  return it->second[h % it->second.size()];
}

/// Boilerplate of study titles; never offered as a keyword.
bool is_generic(const std::string& word) {
  static const std::set<std::string> words = {
      "across", "activity", "adults", "and", "brain", "cohort", "correlates", "cortical", "during", "experiment",
      "fmri", "for", "from", "functional", "healthy", "imaging", "investigation", "mri", "neural", "neuroimaging",
      "participants", "responses", "sessions", "single", "study", "subjects", "the", "using", "volunteers",
      "was", "were", "with", "young"};
  return words.count(word) != 0;
}

/// Tokens of length >= 3 ranked by count, ties by first occurrence.
std::vector<std::string> top_terms(const std::vector<std::string>& tokens, std::size_t n) {
  std::vector<std::string> order;
  std::map<std::string, int> count;
  for (const auto& t : tokens) {
    if (t.size() < 3) continue;
    if (count[t]++ == 0) order.push_back(t);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) { return count[a] > count[b]; });
  if (order.size() > n) order.resize(n);
  return order;
}

std::string join_list(const std::vector<std::string>& items) {
  if (items.empty()) return "the studied process";
  if (items.size() == 1) return items[0];
  std::string out;
  for (std::size_t i = 0; i + 1 < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += items[i];
  }
  return out + " and " + items.back();
}

std::string augment_variant(const std::string& variant, const std::string& title, std::uint64_t h) {
  const auto tokens = tokenize(title);
  if (variant == "title_syn_major") {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < tokens.size(); ++i) words.push_back(pick_synonym(tokens[i], mix_seed(h, i)));
    std::rotate(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(words.size() / 2), words.end());
    return join_tokens(words);
  }
  if (variant == "title_syn_minor") {
    std::vector<std::string> words = tokens;
    for (auto& w : words) {
      if (synonyms().count(w) != 0) {
        w = pick_synonym(w, h);
        return join_tokens(words);
      }
    }
    if (words.size() >= 2) std::swap(words[words.size() - 2], words[words.size() - 1]);
    return join_tokens(words);
  }
  const auto keywords = top_terms(tokens, 6);
  if (variant == "abstract") {
    return "This study investigates " + title + ". Using functional neuroimaging, we examined " +
           join_list(keywords) + " and report regional activation associated with " +
           (keywords.empty() ? std::string("the task") : keywords.front()) + ".";
  }
  if (variant == "experiment_design") {
    return "Participants performed a task engaging " + join_list(keywords) +
           " during fMRI scanning; task blocks were contrasted with a resting baseline.";
  }
  if (variant == "keywords") {
    return join_tokens(keywords, "; ");
  }
  return join_tokens(tokens);
}

std::string semantic_query(const std::vector<PromptSection>& sections) {
  const auto* query = find_section(sections, ps::kQuery);
  std::vector<std::string> titles;
  if (const auto* s = find_section(sections, ps::kSimilar)) titles = list_items(s->body);
  bool has_negative = false;
  if (const auto* s = find_section(sections, ps::kNegative)) has_negative = !list_items(s->body).empty();

  // Titles arrive most similar first; a title at rank r votes 1 / (r + 1)
  // for each of its distinct content words.
  std::set<std::string> retrieved_vocab;
  std::map<std::string, double> votes;
  for (std::size_t r = 0; r < titles.size(); ++r) {
    std::set<std::string> seen;
    for (auto& tok : tokenize(titles[r])) {
      if (seen.insert(tok).second && tok.size() >= 3 && !is_generic(tok)) votes[tok] += 1.0 / static_cast<double>(r + 1);
      retrieved_vocab.insert(tok);
    }
  }

  std::vector<std::string> out;
  std::set<std::string> used;
  std::size_t masked = 0;
  for (auto& tok : tokenize(query ? query->body : "")) {
    if (tok == "mask") {
      ++masked;
      continue;
    }
    // After a bad round, query words that no similar sample uses are dropped.
    if (has_negative && retrieved_vocab.count(tok) == 0) continue;
    used.insert(tok);
    out.push_back(tok);
  }

  // One retrieved word per masked slot; after a bad round, none.
  std::vector<std::pair<std::string, double>> ranked(votes.begin(), votes.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t budget = has_negative ? 0 : masked;
  std::size_t added = 0;
  for (const auto& [tok, n] : ranked) {
    if (added >= budget) break;
    if (used.insert(tok).second) {
      out.push_back(tok);
      ++added;
    }
  }
  return join_tokens(out);
}

}  // namespace

std::string MockLlmClient::complete(const CompletionRequest& request) {
  calls_.fetch_add(1);
  const auto sections = parse_sections(request.prompt);
  const auto* variant = find_section(sections, ps::kVariant);
  const auto* title = find_section(sections, ps::kTitle);
  if (variant != nullptr && title != nullptr) {
    return augment_variant(variant->body, title->body, fnv1a64(request.prompt));
  }
  if (find_section(sections, ps::kQuery) != nullptr) return semantic_query(sections);

  auto tokens = tokenize(request.prompt);
  if (tokens.size() > 32) tokens.resize(32);
  return join_tokens(tokens);
}

}  // namespace c2b
