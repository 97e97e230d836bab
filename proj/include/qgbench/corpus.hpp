#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgbench/jsonl.hpp"

namespace qgbench::corpus {

// Half-open word range [start, end) of a sentence inside its paragraph.
struct SentenceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  std::size_t length() const noexcept { return end - start; }
  bool operator==(const SentenceSpan&) const = default;
};

// One cleaned paragraph with its document/section position. Sentence spans
// partition [0, word_count) contiguously and in order.
struct ContextUnit {
  std::string id;
  std::string doc_title;
  std::vector<std::string> section_path;
  std::string text;
  std::vector<SentenceSpan> sentences;
  std::size_t word_count = 0;

  bool operator==(const ContextUnit&) const = default;
};

struct RenderedContext {
  std::string context_id;
  std::string rendered;
};

struct IngestOptions {
  std::size_t min_words = 50;
  std::optional<std::size_t> max_contexts;
  std::uint64_t seed = 0;
};

// Parses a WikiText-style dump. Lines starting with "=" markers are headings
// (depth = number of leading '='); depth 1 opens a new document. Blocks of
// consecutive non-blank lines form one paragraph. Throws IoError on a bad
// stream and EmptyCorpusError when nothing survives filtering.
std::vector<ContextUnit> ingest_dump(std::istream& dump,
                                     const IngestOptions& options);
std::vector<ContextUnit> ingest_dump(const std::filesystem::path& path,
                                     const IngestOptions& options);

// Replaces the WikiText escape tokens "@-@", "@.@", "@,@" with the bare
// character (absorbing the padding spaces around them) and collapses
// whitespace.
std::string clean_text(std::string_view raw);

// Rule-based splitter: a sentence ends at a word whose last non-closing
// character is '.', '!' or '?' when the next word starts with an uppercase
// letter, an opening quote/bracket or a digit. A period after a single
// uppercase letter ("J.") never ends a sentence. Throws Error on empty text.
std::vector<SentenceSpan> segment_sentences(std::string_view text);

// Builds a unit from arbitrary text (cleaned and segmented). Used for
// imported question sets that carry their own context paragraph.
ContextUnit make_unit(std::string id, std::string doc_title,
                      std::vector<std::string> section_path,
                      std::string_view raw_text);

RenderedContext render_context(const ContextUnit& unit);

// Uniform sample of `k` indices from [0, n) without replacement, returned in
// ascending order. Stable across platforms for a given seed.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed);

Json to_json(const ContextUnit& unit);
ContextUnit context_from_json(const Json& j);

}  // namespace qgbench::corpus
