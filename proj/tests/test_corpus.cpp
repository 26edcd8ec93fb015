#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "c2b/corpus.hpp"
#include "c2b/error.hpp"
#include "c2b/random.hpp"
#include "c2b/split.hpp"
#include "c2b/synthetic.hpp"
#include "c2b/tfidf.hpp"
#include "c2b/tokenize.hpp"
#include "test_support.hpp"

using namespace c2b;

namespace {

Corpus numbered_corpus(std::size_t n) {
  std::vector<StudyRecord> recs;
  for (std::size_t i = 0; i < n; ++i) recs.push_back({"s" + std::to_string(i), "title " + std::to_string(i), {}});
  return Corpus(std::move(recs));
}

std::vector<std::pair<std::string, std::string>> docs(std::initializer_list<std::pair<const char*, const char*>> l) {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& [a, b] : l) out.emplace_back(a, b);
  return out;
}

// Dense TF-IDF oracle: raw counts, smoothed idf, L2 normalization.
std::map<std::string, double> oracle_vector(const std::vector<std::vector<std::string>>& corpus,
                                            const std::vector<std::string>& text) {
  std::map<std::string, int> df;
  for (const auto& d : corpus) {
    std::set<std::string> seen(d.begin(), d.end());
    for (const auto& t : seen) df[t]++;
  }
  std::map<std::string, double> v;
  for (const auto& t : text) {
    if (df.count(t)) v[t] += 1.0;
  }
  double norm = 0.0;
  for (auto& [t, w] : v) {
    w *= std::log((1.0 + corpus.size()) / (1.0 + df[t])) + 1.0;
    norm += w * w;
  }
  for (auto& [t, w] : v) w /= std::sqrt(norm);
  return v;
}

}  // namespace

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("Neural correlates of Kanji"), (std::vector<std::string>{"neural", "correlates", "of", "kanji"}));
  EXPECT_EQ(tokenize("fMRI-based study (n=12)"), (std::vector<std::string>{"fmri", "based", "study", "n", "12"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" ,;--  ").empty());
  EXPECT_EQ(join_tokens(tokenize("A b")), "a b");
}

TEST(Tokenize, PropertyTokensAreLowercaseAlnum) {
  Rng rng(1);
  const std::string alphabet = "aBz09 -_.,;()XYZé\t";
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    for (int i = 0, n = static_cast<int>(rng.below(30)); i < n; ++i) s += alphabet[rng.below(alphabet.size())];
    for (const auto& t : tokenize(s)) {
      ASSERT_FALSE(t.empty());
      for (unsigned char c : t) ASSERT_TRUE(std::islower(c) || std::isdigit(c)) << s;
    }
    // Idempotent on its own output.
    EXPECT_EQ(tokenize(join_tokens(tokenize(s))), tokenize(s));
  }
}

TEST(Ingest, ValidLines) {
  const auto r = ingest_jsonl_text(
      R"({"id": "a", "title": "Pain study", "coordinates": [[1, 2, 3], [4, 5, 6]], "space": "MNI152"})"
      "\n\n"
      R"({"id": "b", "title": "No peaks", "coordinates": [], "space": "MNI152"})"
      "\n");
  ASSERT_EQ(r.corpus.size(), 2u);
  EXPECT_TRUE(r.rejected.empty());
  EXPECT_EQ(r.records_without_peaks, 1u);
  const auto& a = r.corpus.at("a");
  ASSERT_EQ(a.coordinates.size(), 2u);
  EXPECT_EQ(a.coordinates[1], (PeakCoordinate{4, 5, 6}));
  EXPECT_FALSE(r.corpus.at("b").has_peaks());
  EXPECT_EQ(r.corpus.records()[0].id, "a");
}

TEST(Ingest, EmptyFile) {
  testutil::TempDir dir;
  testutil::write_file(dir / "e.jsonl", "");
  const auto r = ingest_jsonl(dir / "e.jsonl");
  EXPECT_TRUE(r.corpus.empty());
  EXPECT_EQ(r.rejected.size(), 0u);
}

TEST(Ingest, MalformedLinesAreRejectedWithDiagnostics) {
  const auto r = ingest_jsonl_text(
      R"({"id": "a", "title": "t", "coordinates": [[1, 2, 3]], "space": "MNI152"})"
      "\n"
      R"({"id": "b", "title": "t", "coordinates": [[1, 2]], "space": "MNI152"})"
      "\n"
      "not json\n"
      R"({"id": "c", "title": "t", "coordinates": [], "space": "Talairach"})"
      "\n"
      R"({"title": "t", "coordinates": [], "space": "MNI152"})"
      "\n"
      R"({"id": "d", "title": "t", "coordinates": [[1, "x", 3]], "space": "MNI152"})"
      "\n");
  EXPECT_EQ(r.corpus.size(), 1u);
  ASSERT_EQ(r.rejected.size(), 5u);
  EXPECT_EQ(r.rejected[0].line, 2u);
  EXPECT_EQ(r.rejected[0].field, "coordinates[0]");
  EXPECT_EQ(r.rejected[1].line, 3u);
  EXPECT_EQ(r.rejected[2].field, "space");
  EXPECT_EQ(r.rejected[3].field, "id");
  EXPECT_EQ(r.rejected[4].line, 6u);
}

TEST(Ingest, DuplicateIdIsHardError) {
  EXPECT_THROW(ingest_jsonl_text(R"({"id": "a", "title": "t", "coordinates": [], "space": "MNI152"})"
                                 "\n"
                                 R"({"id": "a", "title": "u", "coordinates": [], "space": "MNI152"})"),
               InvalidArgument);
  EXPECT_THROW(ingest_jsonl("/nonexistent/x.jsonl"), IoError);
}

TEST(Ingest, JsonlRoundtrip) {
  const auto syn = make_synthetic_corpus({});
  const auto text = to_jsonl(syn.corpus);
  const auto back = ingest_jsonl_text(text);
  ASSERT_EQ(back.corpus.size(), syn.corpus.size());
  for (std::size_t i = 0; i < back.corpus.size(); ++i) {
    EXPECT_EQ(back.corpus.records()[i].id, syn.corpus.records()[i].id);
    EXPECT_EQ(back.corpus.records()[i].title, syn.corpus.records()[i].title);
    EXPECT_EQ(back.corpus.records()[i].coordinates, syn.corpus.records()[i].coordinates);
  }
  EXPECT_EQ(to_jsonl(back.corpus), text);
}

TEST(Corpus, RejectsEmptyAndDuplicateIds) {
  Corpus c;
  EXPECT_THROW(c.add({"", "t", {}}), InvalidArgument);
  c.add({"x", "t", {}});
  EXPECT_THROW(c.add({"x", "t", {}}), InvalidArgument);
  EXPECT_EQ(c.find("nope"), nullptr);
  EXPECT_THROW(c.at("nope"), InvalidArgument);
}

TEST(Split, SizesExamples) {
  EXPECT_EQ(split_sizes(10, {}), (std::array<std::size_t, 3>{6, 2, 2}));
  EXPECT_EQ(split_sizes(13460, {}), (std::array<std::size_t, 3>{8076, 2692, 2692}));
  // Leftovers go to val, then test, then val again.
  EXPECT_EQ(split_sizes(11, {}), (std::array<std::size_t, 3>{6, 3, 2}));
  EXPECT_EQ(split_sizes(13, {}), (std::array<std::size_t, 3>{7, 3, 3}));
  EXPECT_EQ(split_sizes(0, {}), (std::array<std::size_t, 3>{0, 0, 0}));
}

TEST(Split, TenRecordsSeed42) {
  const auto s = split_corpus(numbered_corpus(10), {}, 42);
  EXPECT_EQ(s.count(Partition::kTrain), 6u);
  EXPECT_EQ(s.count(Partition::kVal), 2u);
  EXPECT_EQ(s.count(Partition::kTest), 2u);
}

TEST(Split, PropertyPartitionIsTotalDisjointAndDeterministic) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = rng.below(400);
    const double a = rng.uniform01(), b = rng.uniform01() * (1 - a);
    const SplitRatios ratios{a, b, std::max(0.0, 1.0 - a - b)};
    const auto corpus = numbered_corpus(n);
    const auto seed = rng.next();
    const auto s = split_corpus(corpus, ratios, seed);
    ASSERT_EQ(s.assignment.size(), n);
    std::set<std::string> all;
    for (auto p : {Partition::kTrain, Partition::kVal, Partition::kTest}) {
      for (const auto& id : s.ids(p)) ASSERT_TRUE(all.insert(id).second);
    }
    EXPECT_EQ(all.size(), n);
    const auto sizes = split_sizes(n, ratios);
    EXPECT_EQ(s.count(Partition::kTrain), sizes[0]);
    EXPECT_EQ(s.count(Partition::kVal), sizes[1]);
    EXPECT_EQ(s.count(Partition::kTest), sizes[2]);
    EXPECT_EQ(sizes[0], static_cast<std::size_t>(std::floor(ratios.train * n)));
    EXPECT_EQ(split_corpus(corpus, ratios, seed).assignment, s.assignment);
  }
}

TEST(Split, IndependentOfRecordOrder) {
  auto c = numbered_corpus(50);
  std::vector<StudyRecord> rev(c.records().rbegin(), c.records().rend());
  EXPECT_EQ(split_corpus(Corpus(rev), {}, 3).assignment, split_corpus(c, {}, 3).assignment);
  EXPECT_NE(split_corpus(c, {}, 3).assignment, split_corpus(c, {}, 4).assignment);
}

TEST(Split, BadRatiosThrow) {
  EXPECT_THROW(split_corpus(numbered_corpus(5), {0.5, 0.2, 0.2}, 0), InvalidArgument);
  EXPECT_THROW(split_corpus(numbered_corpus(5), {1.2, -0.1, -0.1}, 0), InvalidArgument);
}

TEST(Split, JsonRoundtrip) {
  testutil::TempDir dir;
  const auto s = split_corpus(numbered_corpus(37), {0.5, 0.3, 0.2}, 9);
  save_split(s, dir / "s.json");
  const auto back = load_split(dir / "s.json");
  EXPECT_EQ(back.assignment, s.assignment);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(split_to_json(back), split_to_json(s));
  EXPECT_THROW(split_from_json("{"), FormatError);
  EXPECT_EQ(parse_partition("val"), Partition::kVal);
  EXPECT_THROW(parse_partition("dev"), InvalidArgument);
}

TEST(TfIdf, MatchesDenseOracle) {
  const auto d = docs({{"a", "pain heat pain"}, {"b", "heat visual"}, {"c", "motor finger finger tapping"}, {"d", ""}});
  const auto index = TfIdfIndex::build(d);
  std::vector<std::vector<std::string>> toks;
  for (auto& [id, text] : d) toks.push_back(tokenize(text));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto oracle = oracle_vector(toks, toks[i]);
    const auto& vec = index.document(i).vector;
    ASSERT_EQ(vec.size(), oracle.size());
    for (auto [col, w] : vec) EXPECT_NEAR(w, oracle.at(index.terms()[col]), 1e-12);
  }
  EXPECT_TRUE(index.document(3).vector.empty());
  EXPECT_NEAR(index.idf("heat"), std::log(5.0 / 3.0) + 1.0, 1e-12);
  EXPECT_EQ(index.idf("absent"), 0.0);
}

TEST(TfIdf, TermInEveryDocumentHasIdfOne) {
  const auto index = TfIdfIndex::build(docs({{"a", "brain pain"}, {"b", "brain motor"}, {"c", "brain"}}));
  EXPECT_DOUBLE_EQ(index.idf("brain"), 1.0);
  for (const auto& t : index.terms()) EXPECT_GE(index.idf(t), 1.0);
}

TEST(TfIdf, VectorsAreUnitNorm) {
  const auto syn = make_synthetic_corpus({});
  const auto index = TfIdfIndex::build_from_titles(syn.corpus);
  for (std::size_t i = 0; i < index.document_count(); ++i) {
    double n = 0.0;
    for (auto [c, w] : index.document(i).vector) {
      ASSERT_GT(w, 0.0);
      n += w * w;
    }
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
  const auto single = TfIdfIndex::build(docs({{"x", "one two two"}}));
  double n = 0.0;
  for (auto [c, w] : single.document(0).vector) n += w * w;
  EXPECT_NEAR(n, 1.0, 1e-12);
}

TEST(TfIdf, IdenticalDocumentsGetIdenticalVectors) {
  const auto index = TfIdfIndex::build(docs({{"a", "x y z"}, {"b", "x y z"}, {"c", "w"}}));
  EXPECT_EQ(index.document(0).vector, index.document(1).vector);
}

TEST(TfIdf, ZeroDocumentsOrDuplicateIdsThrow) {
  EXPECT_THROW(TfIdfIndex::build({}), InvalidArgument);
  EXPECT_THROW(TfIdfIndex::build(docs({{"a", "x"}, {"a", "y"}})), InvalidArgument);
}

TEST(TfIdf, SearchExamples) {
  const auto index = TfIdfIndex::build(docs({{"b", "pain heat"}, {"a", "pain heat"}, {"c", "visual contrast"}}));
  auto hits = index.search("pain heat", 10);
  ASSERT_EQ(hits.size(), 2u);  // zero-score "c" omitted
  EXPECT_EQ(hits[0].id, "a");  // tie broken by ascending id
  EXPECT_EQ(hits[1].id, "b");
  EXPECT_NEAR(hits[0].score, 1.0, 1e-9);
  EXPECT_TRUE(index.search("unrelated words", 3).empty());
  EXPECT_TRUE(index.search("", 3).empty());
  EXPECT_LE(index.search("pain visual", 3 + 5).size(), 3u);
  EXPECT_EQ(index.search("pain visual", 1).size(), 1u);
  EXPECT_THROW(index.search("pain", 0), InvalidArgument);
}

TEST(TfIdf, PropertySelfRetrievalAndOrdering) {
  const auto syn = make_synthetic_corpus({120, 8, 5, 3.0, 2});
  const auto index = TfIdfIndex::build_from_titles(syn.corpus);
  for (std::size_t i = 0; i < index.document_count(); ++i) {
    const auto& doc = index.document(i);
    const auto hits = index.search(doc.text, 10);
    ASSERT_FALSE(hits.empty());
    EXPECT_NEAR(hits[0].score, 1.0, 1e-9);
    bool self_found = false;
    for (std::size_t h = 0; h < hits.size(); ++h) {
      if (hits[h].id == doc.id) self_found = true;
      if (hits[h].score < 1.0 - 1e-9) {
        EXPECT_TRUE(self_found) << "self not ranked among the score-1 hits";
        break;
      }
    }
    for (std::size_t h = 1; h < hits.size(); ++h) {
      ASSERT_TRUE(hits[h - 1].score > hits[h].score ||
                  (hits[h - 1].score == hits[h].score && hits[h - 1].id < hits[h].id));
    }
  }
}

TEST(TfIdf, CosineSimilarityProperties) {
  const auto syn = make_synthetic_corpus({60, 6, 2, 3.0, 2});
  const auto index = TfIdfIndex::build_from_titles(syn.corpus);
  EXPECT_NEAR(index.cosine_similarity("pain", "pain"), 1.0, 1e-12);
  EXPECT_EQ(index.cosine_similarity("pain", "visual"), 0.0);
  EXPECT_EQ(index.cosine_similarity("zzz", "pain"), 0.0);
  Rng rng(4);
  const auto& recs = syn.corpus.records();
  for (int trial = 0; trial < 200; ++trial) {
    const auto& a = recs[rng.below(recs.size())].title;
    const auto& b = recs[rng.below(recs.size())].title;
    const double ab = index.cosine_similarity(a, b);
    EXPECT_EQ(ab, index.cosine_similarity(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-12);
  }
}

TEST(TfIdf, BuildIsDeterministicAndSerializes) {
  testutil::TempDir dir;
  const auto syn = make_synthetic_corpus({});
  const auto a = TfIdfIndex::build_from_titles(syn.corpus);
  const auto b = TfIdfIndex::build_from_titles(syn.corpus);
  EXPECT_TRUE(a == b);
  const auto bytes = a.serialize();
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "C2BIDX01");
  const auto back = TfIdfIndex::deserialize(bytes);
  EXPECT_TRUE(back == a);
  EXPECT_EQ(back.serialize(), bytes);
  a.save(dir / "i.idx");
  EXPECT_TRUE(TfIdfIndex::load(dir / "i.idx") == a);
  auto bad = bytes;
  bad[1] = 'X';
  EXPECT_THROW(TfIdfIndex::deserialize(bad), FormatError);
  EXPECT_THROW(TfIdfIndex::deserialize(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + bytes.size() / 2)),
               FormatError);
}

TEST(TfIdf, RestrictedToIds) {
  const auto syn = make_synthetic_corpus({});
  const std::vector<std::string> ids = {syn.corpus.records()[3].id, syn.corpus.records()[1].id};
  const auto index = TfIdfIndex::build_from_titles(syn.corpus, &ids);
  ASSERT_EQ(index.document_count(), 2u);
  EXPECT_EQ(index.document(0).id, syn.corpus.records()[1].id);  // corpus order
}

TEST(Synthetic, RoundRobinConceptsAndDeterminism) {
  SyntheticCorpusConfig cfg;
  cfg.studies = 10;
  cfg.concepts = 4;
  const auto a = make_synthetic_corpus(cfg);
  const auto b = make_synthetic_corpus(cfg);
  ASSERT_EQ(a.corpus.size(), 10u);
  EXPECT_EQ(to_jsonl(a.corpus), to_jsonl(b.corpus));
  std::map<std::string, int> per;
  for (const auto& c : a.concept_of) per[c]++;
  EXPECT_EQ(per.size(), 4u);
  for (auto& [c, n] : per) EXPECT_TRUE(n == 2 || n == 3);
  for (const auto& r : a.corpus.records()) {
    EXPECT_TRUE(r.has_peaks());
    EXPECT_FALSE(r.title.empty());
  }
  cfg.concepts = 0;
  EXPECT_THROW(make_synthetic_corpus(cfg), InvalidArgument);
  cfg.concepts = 9;
  EXPECT_THROW(make_synthetic_corpus(cfg), InvalidArgument);
}
