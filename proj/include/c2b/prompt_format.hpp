#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace c2b {

// Prompts are a free-text preamble followed by sections, each introduced by
// a "## <Name>" line. List sections hold one "- item" per line.

struct PromptSection {
  std::string name;
  std::string body;
};

class PromptBuilder {
 public:
  explicit PromptBuilder(std::string preamble) : text_(std::move(preamble)) {}
  PromptBuilder& section(std::string_view name, std::string_view body);
  PromptBuilder& list(std::string_view name, const std::vector<std::string>& items);
  std::string str() const { return text_ + "\n"; }

 private:
  std::string text_;
};

std::vector<PromptSection> parse_sections(std::string_view prompt);
const PromptSection* find_section(const std::vector<PromptSection>& sections, std::string_view name);
/// Items of a "- item" list body.
std::vector<std::string> list_items(std::string_view body);

namespace prompt_sections {
inline constexpr std::string_view kInstruction = "Instruction";
inline constexpr std::string_view kVariant = "Variant";
inline constexpr std::string_view kTitle = "Title";
inline constexpr std::string_view kQuery = "Query";
inline constexpr std::string_view kSimilar = "Similar samples";
inline constexpr std::string_view kPositive = "Positive examples";
inline constexpr std::string_view kNegative = "Negative examples";
inline constexpr std::string_view kOutput = "Output";
}  // namespace prompt_sections

}  // namespace c2b
