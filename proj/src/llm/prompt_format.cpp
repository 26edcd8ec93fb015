#include "c2b/prompt_format.hpp"

namespace c2b {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

PromptBuilder& PromptBuilder::section(std::string_view name, std::string_view body) {
  text_ += "\n\n## ";
  text_ += name;
  text_ += "\n";
  text_ += body;
  return *this;
}

PromptBuilder& PromptBuilder::list(std::string_view name, const std::vector<std::string>& items) {
  std::string body;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) body += "\n";
    body += "- ";
    body += items[i];
  }
  return section(name, body);
}

std::vector<PromptSection> parse_sections(std::string_view prompt) {
  std::vector<PromptSection> out;
  std::size_t pos = 0;
  PromptSection* current = nullptr;
  while (pos <= prompt.size()) {
    auto nl = prompt.find('\n', pos);
    if (nl == std::string_view::npos) nl = prompt.size();
    const std::string_view line = prompt.substr(pos, nl - pos);
    if (line.starts_with("## ")) {
      out.push_back({std::string(trim(line.substr(3))), {}});
      current = &out.back();
    } else if (current != nullptr) {
      if (!current->body.empty()) current->body += "\n";
      current->body += line;
    }
    pos = nl + 1;
  }
  for (auto& s : out) s.body = std::string(trim(s.body));
  return out;
}

const PromptSection* find_section(const std::vector<PromptSection>& sections, std::string_view name) {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::vector<std::string> list_items(std::string_view body) {
  std::vector<std::string> items;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    auto line = trim(body.substr(pos, nl - pos));
    if (line.starts_with("- ")) items.emplace_back(trim(line.substr(2)));
    pos = nl + 1;
  }
  return items;
}

}  // namespace c2b
