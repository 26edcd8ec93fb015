#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "c2b/corpus.hpp"

namespace c2b {

/// Sparse vector as (column, weight) pairs sorted by column.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

struct SearchHit {
  std::string id;
  double score = 0.0;

  bool operator==(const SearchHit&) const = default;
};

/// Immutable TF-IDF index. TF is the raw count, idf(t) = ln((1+N)/(1+df)) + 1,
/// document vectors are L2-normalized. Vocabulary columns follow the
/// lexicographic term order, so construction does not depend on hash order.
class TfIdfIndex {
 public:
  struct Document {
    std::string id;
    std::string text;
    SparseVector vector;
  };

  /// Documents are (id, text) in the order given. Throws InvalidArgument on
  /// zero documents or a duplicate id.
  static TfIdfIndex build(std::span<const std::pair<std::string, std::string>> documents);
  /// Indexes record titles, optionally restricted to `ids` (kept in corpus order).
  static TfIdfIndex build_from_titles(const Corpus& corpus, const std::vector<std::string>* ids = nullptr);

  /// Cosine-ranked hits: descending score, ties by ascending id, zero scores
  /// dropped, at most min(k, N) entries.
  std::vector<SearchHit> search(std::string_view query, std::size_t k) const;

  /// Cosine of the two texts' TF-IDF vectors, in [0, 1]. Terms outside the
  /// vocabulary are ignored; a zero vector on either side gives 0.
  double cosine_similarity(std::string_view a, std::string_view b) const;

  /// Normalized TF-IDF vector of arbitrary text.
  SparseVector vectorize(std::string_view text) const;
  /// Normalized vector from an already tokenized text.
  SparseVector vectorize_tokens(std::span<const std::string> tokens) const;

  std::optional<std::uint32_t> column(std::string_view term) const;
  /// idf of a vocabulary term; 0 for out-of-vocabulary terms.
  double idf(std::string_view term) const;

  std::size_t document_count() const { return docs_.size(); }
  std::size_t vocabulary_size() const { return terms_.size(); }
  const Document& document(std::size_t i) const { return docs_[i]; }
  const Document* find_document(std::string_view id) const;
  const std::vector<std::string>& terms() const { return terms_; }

  // Binary cache: "C2BIDX01", then vocabulary (term, idf) and documents
  // (id, text, sparse vector), all little-endian.
  std::vector<std::uint8_t> serialize() const;
  static TfIdfIndex deserialize(std::span<const std::uint8_t> bytes);
  void save(const std::filesystem::path& path) const;
  static TfIdfIndex load(const std::filesystem::path& path);

  bool operator==(const TfIdfIndex& other) const;

 private:
  void rebuild_lookup();

  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::vector<Document> docs_;
  std::map<std::string, std::uint32_t, std::less<>> column_of_;
  std::map<std::string, std::size_t, std::less<>> doc_of_;
  // Per column: (document index, weight), ascending document index.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> postings_;
};

double dot(const SparseVector& a, const SparseVector& b);

}  // namespace c2b
