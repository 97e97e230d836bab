#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qgbench::text {

// A word is a maximal run of non-whitespace bytes. Every length metric in
// the project (questions, answers, contexts) uses this definition.
std::vector<std::string> split_words(std::string_view s);
std::size_t word_count(std::string_view s);

std::string_view trim(std::string_view s);

// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::vector<std::string> split_lines(std::string_view s);

bool is_space(char c) noexcept;

}  // namespace qgbench::text
