#include "c2b/synthetic.hpp"

#include <array>
#include <cstdio>

#include "c2b/error.hpp"
#include "c2b/random.hpp"

namespace c2b {

namespace {

struct Concept {
  const char* name;
  std::vector<const char*> words;
  std::vector<PeakCoordinate> regions;
};

const std::vector<Concept>& concept_bank() {
  static const std::vector<Concept> bank = {
      {"pain",
       {"pain", "nociceptive", "thermal", "noxious", "heat", "somatosensory"},
       {{38, 4, 2}, {-38, 4, 2}, {2, 20, 34}, {12, -18, 6}}},
      {"language",
       {"language", "reading", "semantic", "verbal", "speech", "sentence"},
       {{-48, 18, 10}, {-56, -40, 8}, {-44, -56, -14}}},
      {"motor",
       {"motor", "finger", "tapping", "movement", "handgrip", "execution"},
       {{-38, -22, 56}, {-4, -6, 58}, {20, -52, -22}}},
      {"vision",
       {"visual", "occipital", "checkerboard", "retinotopic", "contrast", "perception"},
       {{10, -88, 4}, {-10, -88, 4}, {40, -52, -18}}},
      {"memory",
       {"memory", "episodic", "encoding", "retrieval", "recollection", "hippocampal"},
       {{-26, -20, -14}, {26, -20, -14}, {-4, -52, 28}}},
      {"reward",
       {"reward", "monetary", "gain", "anticipation", "incentive", "striatal"},
       {{10, 10, -6}, {-10, 10, -6}, {2, 44, -10}}},
      {"fear",
       {"fear", "threat", "amygdala", "anxiety", "aversive", "conditioning"},
       {{22, -4, -18}, {-22, -4, -18}, {0, 38, 18}}},
      {"attention",
       {"attention", "executive", "control", "nback", "load", "vigilance"},
       {{44, 32, 28}, {-44, 32, 28}, {32, -58, 46}}},
  };
  return bank;
}

const std::array<const char*, 6> kPrefixes = {"neural correlates of", "brain activity during", "fmri study of",
                                              "functional imaging of", "cortical responses to",
                                              "an investigation of"};
const std::array<const char*, 5> kSuffixes = {"in healthy adults", "in young volunteers", "a functional mri study",
                                              "across sessions", "in a single cohort"};

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusConfig& config) {
  const auto& bank = concept_bank();
  if (config.concepts < 1 || config.concepts > bank.size()) {
    throw InvalidArgument("synthetic concepts must be in [1, " + std::to_string(bank.size()) + "]");
  }
  if (config.max_peaks_per_region < 1) throw InvalidArgument("max_peaks_per_region must be >= 1");

  Rng rng(config.seed);
  SyntheticCorpus out;
  for (std::size_t i = 0; i < config.studies; ++i) {
    const Concept& c = bank[i % config.concepts];

    // Two or three distinct concept words, in bank order for variety of position.
    std::vector<std::size_t> picks;
    const std::size_t n_words = 2 + rng.below(2);
    while (picks.size() < n_words) {
      const std::size_t w = rng.below(c.words.size());
      bool seen = false;
      for (auto p : picks) seen = seen || (p == w);
      if (!seen) picks.push_back(w);
    }
    std::string title = kPrefixes[rng.below(kPrefixes.size())];
    for (std::size_t k = 0; k < picks.size(); ++k) {
      title += (k + 1 == picks.size() && k > 0) ? " and " : " ";
      title += c.words[picks[k]];
    }
    title += " ";
    title += kSuffixes[rng.below(kSuffixes.size())];

    StudyRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "syn-%04zu", i);
    rec.id = id;
    rec.title = title;
    for (const auto& centre : c.regions) {
      const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.max_peaks_per_region)));
      for (int p = 0; p < n; ++p) {
        rec.coordinates.push_back({centre.x_mm + config.jitter_mm * rng.normal(),
                                   centre.y_mm + config.jitter_mm * rng.normal(),
                                   centre.z_mm + config.jitter_mm * rng.normal()});
      }
    }
    out.corpus.add(std::move(rec));
    out.concept_of.emplace_back(c.name);
  }
  return out;
}

}  // namespace c2b
