#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgbench/jsonl.hpp"
#include "qgbench/llm_gateway.hpp"
#include "qgbench/question_gen.hpp"

namespace qgbench::classify {

enum class QuestionType {
  T1, T2, T3, T4, T5, T6, T7, T8, T9, T10, Others
};

inline constexpr std::size_t kTypeCount = 11;

inline constexpr std::array<QuestionType, kTypeCount> kAllTypes = {
    QuestionType::T1, QuestionType::T2, QuestionType::T3, QuestionType::T4,
    QuestionType::T5, QuestionType::T6, QuestionType::T7, QuestionType::T8,
    QuestionType::T9, QuestionType::T10, QuestionType::Others};

std::string_view code(QuestionType t);   // "T1".."T10", "OTHERS"
std::string_view label(QuestionType t);  // "Identity/Attribution", ...
// Case-insensitive inverse of code(); nullopt for anything else.
std::optional<QuestionType> type_from_code(std::string_view code);

// Table groups: factual checks T1-T5, multi-fact reasoning T6-T7,
// descriptive T8-T10. Others belongs to none.
enum class TypeGroup { Factual, MultiFact, Descriptive };
inline constexpr std::array<TypeGroup, 3> kAllGroups = {
    TypeGroup::Factual, TypeGroup::MultiFact, TypeGroup::Descriptive};
std::optional<TypeGroup> group_of(QuestionType t);
std::string_view group_label(TypeGroup g);  // "T1-T5", "T6-T7", "T8-T10"

struct TypeAssignment {
  std::string question_id;
  QuestionType qtype = QuestionType::Others;
  std::string raw_judge_output;
};

Json to_json(const TypeAssignment& a);
TypeAssignment assignment_from_json(const Json& j);

std::string classification_system_prompt();

// First case-insensitive match of T1..T10 or OTHERS in the reply.
std::optional<QuestionType> extract_type_code(std::string_view reply);

// One corrective retry, then ClassificationParseError.
TypeAssignment classify_question(llm::Gateway& gateway,
                                 const qgen::QuestionRecord& question,
                                 const std::string& judge);

// Percentage per type, indexed like kAllTypes. Throws on empty input.
std::array<double, kTypeCount> type_distribution(
    const std::vector<TypeAssignment>& assignments);

}  // namespace qgbench::classify
