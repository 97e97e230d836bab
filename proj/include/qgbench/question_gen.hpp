#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qgbench/corpus.hpp"
#include "qgbench/jsonl.hpp"
#include "qgbench/llm_gateway.hpp"

namespace qgbench::qgen {

// Question-generation instruction. The template holds "[N]" exactly once.
struct PromptVariant {
  std::string id;
  std::string templ;

  std::string render(int n) const;
};

const std::vector<PromptVariant>& prompt_variants();
// Throws ConfigError for ids other than v1, v2, v3.
const PromptVariant& prompt_variant(std::string_view id);

struct Generated {
  std::string model;
  std::string prompt_variant;
  bool operator==(const Generated&) const = default;
};

struct Imported {
  std::string dataset;
  bool operator==(const Imported&) const = default;
};

using Source = std::variant<Generated, Imported>;

struct QuestionRecord {
  std::string id;
  std::optional<std::string> context_id;
  Source source;
  std::string text;
  std::size_t word_count = 0;
  std::optional<std::string> golden_answer;

  bool is_generated() const { return std::holds_alternative<Generated>(source); }
};

Json to_json(const QuestionRecord& q);
QuestionRecord question_from_json(const Json& j);

// Marker styles accepted at line start: "<k>.", "<k>)", "<k>:". Lines before
// the first marker are ignored; other lines continue the current item and
// are joined with single spaces. A blank line ends the current item and any
// unmarked text after it is dropped. Throws ParseError unless the markers
// are exactly 1..expected_n.
std::vector<std::string> parse_ordered_list(std::string_view text,
                                            std::size_t expected_n);

// "1. a\n2. b" for {"a", "b"}.
std::string render_ordered_list(const std::vector<std::string>& items);

constexpr std::string_view kExactCountSuffix =
    "Output exactly [n] numbered items and nothing else.";

std::string question_id(const std::string& context_id, const std::string& model,
                        const std::string& variant, std::size_t ordinal);

// Asks `model` for n questions about the rendered context. One corrective
// retry on a malformed list, then GenerationParseError carrying the raw
// reply.
std::vector<QuestionRecord> generate_questions(
    llm::Gateway& gateway, const corpus::RenderedContext& context,
    const std::string& model, const PromptVariant& variant, int n);

struct ImportedSet {
  std::vector<QuestionRecord> questions;
  std::vector<corpus::ContextUnit> contexts;
};

// JSONL with {question, context?, golden_answer?}. Records with a context
// get a synthetic ContextUnit; the rest keep context_id = null. Throws
// ImportError naming the offending line.
ImportedSet import_questions(const std::filesystem::path& path,
                             const std::string& dataset_name);

}  // namespace qgbench::qgen
