#include "c2b/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "c2b/binary_io.hpp"
#include "c2b/error.hpp"
#include "c2b/tokenize.hpp"

namespace c2b {

namespace {

constexpr char kIndexMagic[] = "C2BIDX01";

void normalize(SparseVector& v) {
  double norm2 = 0.0;
  for (const auto& [c, w] : v) norm2 += w * w;
  if (norm2 <= 0.0) {
    v.clear();
    return;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& [c, w] : v) w *= inv;
}

}  // namespace

double dot(const SparseVector& a, const SparseVector& b) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      s += a[i].second * b[j].second;
      ++i;
      ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

TfIdfIndex TfIdfIndex::build(std::span<const std::pair<std::string, std::string>> documents) {
  if (documents.empty()) throw InvalidArgument("cannot build an index over zero documents");

  TfIdfIndex index;
  std::vector<std::map<std::string, std::uint32_t>> counts(documents.size());
  std::map<std::string, std::uint32_t> df;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (auto& tok : tokenize(documents[d].second)) counts[d][tok] += 1;
    for (const auto& [term, n] : counts[d]) df[term] += 1;
  }

  const double n_docs = static_cast<double>(documents.size());
  for (const auto& [term, count] : df) {
    index.terms_.push_back(term);
    index.idf_.push_back(std::log((1.0 + n_docs) / (1.0 + count)) + 1.0);
  }
  index.rebuild_lookup();

  for (std::size_t d = 0; d < documents.size(); ++d) {
    Document doc{documents[d].first, documents[d].second, {}};
    if (doc.id.empty()) throw InvalidArgument("document id must not be empty");
    for (const auto& [term, tf] : counts[d]) {
      const std::uint32_t col = index.column_of_.at(term);
      doc.vector.emplace_back(col, tf * index.idf_[col]);
    }
    normalize(doc.vector);
    if (index.doc_of_.count(doc.id) != 0) throw InvalidArgument("duplicate document id: " + doc.id);
    index.doc_of_.emplace(doc.id, index.docs_.size());
    index.docs_.push_back(std::move(doc));
  }
  index.rebuild_lookup();
  return index;
}

TfIdfIndex TfIdfIndex::build_from_titles(const Corpus& corpus, const std::vector<std::string>* ids) {
  std::vector<std::pair<std::string, std::string>> docs;
  if (ids == nullptr) {
    for (const auto& r : corpus.records()) docs.emplace_back(r.id, r.title);
  } else {
    std::map<std::string, bool, std::less<>> wanted;
    for (const auto& id : *ids) wanted[id] = true;
    for (const auto& r : corpus.records()) {
      if (wanted.count(r.id) != 0) docs.emplace_back(r.id, r.title);
    }
  }
  return build(docs);
}

void TfIdfIndex::rebuild_lookup() {
  column_of_.clear();
  for (std::uint32_t c = 0; c < terms_.size(); ++c) column_of_.emplace(terms_[c], c);
  doc_of_.clear();
  postings_.assign(terms_.size(), {});
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    doc_of_.emplace(docs_[d].id, d);
    for (const auto& [c, w] : docs_[d].vector) postings_[c].emplace_back(static_cast<std::uint32_t>(d), w);
  }
}

std::optional<std::uint32_t> TfIdfIndex::column(std::string_view term) const {
  auto it = column_of_.find(term);
  if (it == column_of_.end()) return std::nullopt;
  return it->second;
}

double TfIdfIndex::idf(std::string_view term) const {
  auto c = column(term);
  return c ? idf_[*c] : 0.0;
}

const TfIdfIndex::Document* TfIdfIndex::find_document(std::string_view id) const {
  auto it = doc_of_.find(id);
  return it == doc_of_.end() ? nullptr : &docs_[it->second];
}

SparseVector TfIdfIndex::vectorize_tokens(std::span<const std::string> tokens) const {
  std::map<std::uint32_t, std::uint32_t> tf;
  for (const auto& tok : tokens) {
    if (auto c = column(tok)) tf[*c] += 1;
  }
  SparseVector v;
  v.reserve(tf.size());
  for (const auto& [c, n] : tf) v.emplace_back(c, n * idf_[c]);
  normalize(v);
  return v;
}

SparseVector TfIdfIndex::vectorize(std::string_view text) const {
  const auto tokens = tokenize(text);
  return vectorize_tokens(tokens);
}

double TfIdfIndex::cosine_similarity(std::string_view a, std::string_view b) const {
  const auto va = vectorize(a);
  const auto vb = vectorize(b);
  if (va.empty() || vb.empty()) return 0.0;
  return std::clamp(dot(va, vb), 0.0, 1.0);
}

std::vector<SearchHit> TfIdfIndex::search(std::string_view query, std::size_t k) const {
  if (k == 0) throw InvalidArgument("search k must be >= 1");
  const auto q = vectorize(query);
  if (q.empty()) return {};

  std::vector<double> scores(docs_.size(), 0.0);
  for (const auto& [c, wq] : q) {
    for (const auto& [d, wd] : postings_[c]) scores[d] += wq * wd;
  }
  std::vector<SearchHit> hits;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    if (scores[d] > 0.0) hits.push_back({docs_[d].id, std::clamp(scores[d], 0.0, 1.0)});
  }
  auto better = [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
  hits.resize(keep);
  return hits;
}

std::vector<std::uint8_t> TfIdfIndex::serialize() const {
  ByteWriter w;
  w.raw(std::string_view(kIndexMagic, 8));
  w.u64(terms_.size());
  for (std::size_t c = 0; c < terms_.size(); ++c) {
    w.str(terms_[c]);
    w.f64(idf_[c]);
  }
  w.u64(docs_.size());
  for (const auto& doc : docs_) {
    w.str(doc.id);
    w.str(doc.text);
    w.u32(static_cast<std::uint32_t>(doc.vector.size()));
    for (const auto& [c, weight] : doc.vector) {
      w.u32(c);
      w.f64(weight);
    }
  }
  return w.take();
}

TfIdfIndex TfIdfIndex::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "index");
  if (bytes.size() < 8 || r.raw(8) != std::string_view(kIndexMagic, 8)) {
    throw FormatError("magic", "not a C2BIDX01 index");
  }
  TfIdfIndex index;
  const std::uint64_t n_terms = r.u64();
  if (n_terms > r.remaining()) throw FormatError("vocabulary", "term count exceeds file size");
  for (std::uint64_t c = 0; c < n_terms; ++c) {
    index.terms_.push_back(r.str());
    index.idf_.push_back(r.f64());
    if (c > 0 && !(index.terms_[c - 1] < index.terms_[c])) throw FormatError("vocabulary", "terms not sorted");
  }
  const std::uint64_t n_docs = r.u64();
  if (n_docs == 0) throw FormatError("documents", "index holds no documents");
  if (n_docs > r.remaining()) throw FormatError("documents", "document count exceeds file size");
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    Document doc;
    doc.id = r.str();
    doc.text = r.str();
    const std::uint32_t nnz = r.u32();
    for (std::uint32_t i = 0; i < nnz; ++i) {
      const std::uint32_t c = r.u32();
      const double weight = r.f64();
      if (c >= n_terms) throw FormatError("documents", "column out of range");
      doc.vector.emplace_back(c, weight);
    }
    index.docs_.push_back(std::move(doc));
  }
  if (r.remaining() != 0) throw FormatError("trailer", "unexpected trailing bytes");
  index.rebuild_lookup();
  if (index.doc_of_.size() != index.docs_.size()) throw FormatError("documents", "duplicate document id");
  return index;
}

void TfIdfIndex::save(const std::filesystem::path& path) const { write_file_bytes(path, serialize()); }

TfIdfIndex TfIdfIndex::load(const std::filesystem::path& path) { return deserialize(read_file_bytes(path)); }

bool TfIdfIndex::operator==(const TfIdfIndex& other) const {
  if (terms_ != other.terms_ || docs_.size() != other.docs_.size()) return false;
  if (std::memcmp(idf_.data(), other.idf_.data(), idf_.size() * sizeof(double)) != 0) return false;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    const auto& a = docs_[d];
    const auto& b = other.docs_[d];
    if (a.id != b.id || a.text != b.text || a.vector.size() != b.vector.size()) return false;
    for (std::size_t i = 0; i < a.vector.size(); ++i) {
      if (a.vector[i].first != b.vector[i].first) return false;
      if (std::memcmp(&a.vector[i].second, &b.vector[i].second, sizeof(double)) != 0) return false;
    }
  }
  return true;
}

}  // namespace c2b
