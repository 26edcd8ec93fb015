#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "c2b/corpus.hpp"

namespace c2b {

struct SyntheticCorpusConfig {
  std::size_t studies = 50;
  /// Number of distinct concepts drawn from the built-in bank (1..8).
  std::size_t concepts = 4;
  std::uint64_t seed = 7;
  /// Per-axis jitter of peaks around their region centre.
  double jitter_mm = 3.0;
  /// Peaks placed around each region of a concept (1..max inclusive).
  int max_peaks_per_region = 2;
};

struct SyntheticCorpus {
  Corpus corpus;
  /// Concept name per record, parallel to corpus.records().
  std::vector<std::string> concept_of;
};

/// Generates a corpus of studies whose titles are built from per-concept
/// vocabularies plus shared filler words, and whose peaks are jittered
/// around the concept's characteristic MNI regions. Studies are assigned
/// to concepts round-robin, so every concept gets floor or ceil of N/K.
SyntheticCorpus make_synthetic_corpus(const SyntheticCorpusConfig& config);

}  // namespace c2b
