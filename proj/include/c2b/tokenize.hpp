#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace c2b {

/// Lowercases ASCII letters and splits on every character that is not an
/// ASCII letter or digit. No stemming, no stop words.
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(std::span<const std::string> tokens, std::string_view sep = " ");

}  // namespace c2b
