#include <array>

#include "c2b/augment.hpp"
#include "c2b/error.hpp"

namespace c2b {

std::string_view to_string(AugVariantKind kind) {
  switch (kind) {
    case AugVariantKind::kTitleSynMajor: return "title_syn_major";
    case AugVariantKind::kTitleSynMinor: return "title_syn_minor";
    case AugVariantKind::kAbstract: return "abstract";
    case AugVariantKind::kExperimentDesign: return "experiment_design";
    case AugVariantKind::kKeywords: return "keywords";
  }
  return "?";
}

AugVariantKind parse_aug_variant(std::string_view name) {
  for (auto k : kAugVariantKinds) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown augmentation kind: " + std::string(name));
}

std::string_view to_string(TextVariant v) {
  if (v == TextVariant::kTitle) return "title";
  return to_string(*as_aug_kind(v));
}

TextVariant parse_text_variant(std::string_view name) {
  if (name == "title") return TextVariant::kTitle;
  switch (parse_aug_variant(name)) {
    case AugVariantKind::kTitleSynMajor: return TextVariant::kTitleSynMajor;
    case AugVariantKind::kTitleSynMinor: return TextVariant::kTitleSynMinor;
    case AugVariantKind::kAbstract: return TextVariant::kAbstract;
    case AugVariantKind::kExperimentDesign: return TextVariant::kExperimentDesign;
    case AugVariantKind::kKeywords: return TextVariant::kKeywords;
  }
  return TextVariant::kTitle;
}

std::optional<AugVariantKind> as_aug_kind(TextVariant v) {
  switch (v) {
    case TextVariant::kTitle: return std::nullopt;
    case TextVariant::kTitleSynMajor: return AugVariantKind::kTitleSynMajor;
    case TextVariant::kTitleSynMinor: return AugVariantKind::kTitleSynMinor;
    case TextVariant::kAbstract: return AugVariantKind::kAbstract;
    case TextVariant::kExperimentDesign: return AugVariantKind::kExperimentDesign;
    case TextVariant::kKeywords: return AugVariantKind::kKeywords;
  }
  return std::nullopt;
}

TextVariant variant_schedule(std::uint64_t step) {
  static constexpr std::array<TextVariant, 7> kOrder = {
      TextVariant::kTitle,    TextVariant::kTitleSynMajor,    TextVariant::kTitleSynMinor, TextVariant::kAbstract,
      TextVariant::kExperimentDesign, TextVariant::kKeywords, TextVariant::kTitle};
  return kOrder[step % kOrder.size()];
}

const std::string& select_text(const StudyRecord& study, const AugmentedStudy* augmented, TextVariant variant) {
  const auto kind = as_aug_kind(variant);
  if (!kind || augmented == nullptr) return study.title;
  auto it = augmented->variants.find(*kind);
  return it == augmented->variants.end() ? study.title : it->second;
}

}  // namespace c2b
