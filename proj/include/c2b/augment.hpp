#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "c2b/corpus.hpp"
#include "c2b/llm_client.hpp"

namespace c2b {

/// The five generated text variants of a study.
enum class AugVariantKind {
  kTitleSynMajor,     // synonymous title, substantially reworded
  kTitleSynMinor,     // synonymous title, minimally reworded
  kAbstract,          // plausible abstract
  kExperimentDesign,  // plausible experimental design description
  kKeywords,          // plausible keyword list
};

inline constexpr std::array<AugVariantKind, 5> kAugVariantKinds = {
    AugVariantKind::kTitleSynMajor, AugVariantKind::kTitleSynMinor, AugVariantKind::kAbstract,
    AugVariantKind::kExperimentDesign, AugVariantKind::kKeywords};

std::string_view to_string(AugVariantKind kind);
AugVariantKind parse_aug_variant(std::string_view name);

/// Text fed to the model at a training step: the original title or one of
/// the generated variants.
enum class TextVariant { kTitle, kTitleSynMajor, kTitleSynMinor, kAbstract, kExperimentDesign, kKeywords };

std::string_view to_string(TextVariant v);
TextVariant parse_text_variant(std::string_view name);
std::optional<AugVariantKind> as_aug_kind(TextVariant v);

/// Period-7 training order: title, major synonym, minor synonym, abstract,
/// experiment design, keywords, title.
TextVariant variant_schedule(std::uint64_t step);

/// Instruction line used for `kind`.
std::string_view aug_instruction(AugVariantKind kind);

/// Throws InvalidArgument when the study title is empty.
std::string build_aug_prompt(const StudyRecord& study, AugVariantKind kind);

struct AugmentedStudy {
  std::string study_id;
  std::map<AugVariantKind, std::string> variants;
  std::string client_id;
  std::string timestamp;

  const std::string& text(AugVariantKind kind) const { return variants.at(kind); }
};

/// Completion cache persisted as JSONL, keyed by (study id, kind, prompt hash).
/// Readers share a lock; writers are serialized and append immediately.
class AugCache {
 public:
  struct Entry {
    std::string study_id;
    AugVariantKind kind;
    std::string prompt_hash;
    std::string completion;
    std::string client_id;
    std::string timestamp;
  };

  /// In-memory cache (nothing persisted).
  AugCache() = default;
  /// Loads `path` if it exists; new entries are appended to it.
  explicit AugCache(std::filesystem::path path);

  std::optional<Entry> get(const std::string& study_id, AugVariantKind kind, const std::string& prompt_hash) const;
  void put(const Entry& entry);
  std::size_t size() const;

 private:
  static std::string key(const std::string& study_id, AugVariantKind kind, const std::string& prompt_hash);

  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> entries_;
};

/// Lowercase hex FNV-1a of the prompt.
std::string prompt_hash(std::string_view prompt);

struct AugmentOptions {
  /// Extra attempts after the first failed call for each kind.
  int max_retries = 2;
  CompletionRequest request_template{};
  /// Provenance timestamp source; defaults to UTC wall clock (ISO 8601).
  std::function<std::string()> clock;
};

/// Thrown when a variant could not be produced; variants completed before
/// the failure are already in the cache.
class AugmentError : public LlmError {
 public:
  AugmentError(std::string study_id, AugVariantKind kind, const std::string& cause);
  AugVariantKind kind() const { return kind_; }
  const std::string& study_id() const { return study_id_; }

 private:
  std::string study_id_;
  AugVariantKind kind_;
};

/// Produces all five variants, consulting the cache before calling the client.
AugmentedStudy augment_study(LlmClient& client, AugCache& cache, const StudyRecord& study,
                             const AugmentOptions& options = {});

std::string utc_timestamp();

/// Text for `variant`; falls back to the title when no augmentation exists.
const std::string& select_text(const StudyRecord& study, const AugmentedStudy* augmented, TextVariant variant);

std::string augmented_to_jsonl(const std::vector<AugmentedStudy>& studies);
std::vector<AugmentedStudy> augmented_from_jsonl(const std::string& text);
void save_augmented(const std::vector<AugmentedStudy>& studies, const std::filesystem::path& path);
std::vector<AugmentedStudy> load_augmented(const std::filesystem::path& path);

}  // namespace c2b
