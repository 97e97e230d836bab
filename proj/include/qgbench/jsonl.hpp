#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qgbench {

using Json = nlohmann::json;

struct JsonLine {
  std::size_t line = 0;  // 1-based line number in the source file
  Json value;
};

// Reads a JSON-lines file, skipping blank lines. Throws IoError when the file
// cannot be opened or a line is not valid JSON (message names path:line).
std::vector<JsonLine> read_jsonl(const std::filesystem::path& path);

std::string to_jsonl(const std::vector<Json>& rows);

std::string read_text_file(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place, so
// readers never observe a partially written file. Parent directories are
// created on demand.
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace qgbench
