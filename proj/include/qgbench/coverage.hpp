#pragma once

#include <array>
#include <bitset>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgbench/corpus.hpp"
#include "qgbench/jsonl.hpp"
#include "qgbench/llm_gateway.hpp"
#include "qgbench/question_gen.hpp"

namespace qgbench::coverage {

inline constexpr std::size_t kBuckets = 10;
using BucketSet = std::bitset<kBuckets>;

struct CoverageRecord {
  std::string question_id;
  std::vector<std::size_t> selected_sentences;  // 1-based, sorted, unique
  double pct_covered_sentences = 0.0;
  double pct_covered_words = 0.0;
  BucketSet buckets_touched;
  std::size_t n_sentences = 0;
  std::size_t n_words = 0;
};

Json to_json(const CoverageRecord& r);
CoverageRecord coverage_from_json(const Json& j);

std::string coverage_system_prompt();
// "1. <s1>\n2. <s2>..." followed by the question.
std::string coverage_user_prompt(const corpus::ContextUnit& unit,
                                 std::string_view question);

// Parses the first non-empty line as comma-separated integers. Duplicates
// are dropped; nullopt if the line is malformed, empty, or any index lies
// outside [1, n_sentences].
std::optional<std::vector<std::size_t>> parse_sentence_selection(
    std::string_view reply, std::size_t n_sentences);

// Single-sentence contexts short-circuit to {1} without a judge call.
// Otherwise one corrective retry, then CoverageParseError.
std::vector<std::size_t> select_relevant_sentences(
    llm::Gateway& gateway, const qgen::QuestionRecord& question,
    const corpus::ContextUnit& unit, const std::string& judge);

// Bucket of word index w in a context of `words` words: floor(10 w / words),
// clipped to 9.
std::size_t bucket_of(std::size_t w, std::size_t words);

// Sentence/word percentages and the deciles each selected sentence spans.
// Throws Error when the selection is empty or out of range.
CoverageRecord coverage_metrics(const std::vector<std::size_t>& selected,
                                const corpus::ContextUnit& unit);

// Share of records (percent) touching each bucket. Rows need not sum to 100.
std::array<double, kBuckets> bucket_frequencies(
    const std::vector<CoverageRecord>& records);

}  // namespace qgbench::coverage
