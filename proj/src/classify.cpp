#include "qgbench/classify.hpp"

#include <regex>

#include "qgbench/errors.hpp"

namespace qgbench::classify {
namespace {

struct TypeInfo {
  std::string_view code;
  std::string_view label;
  std::string_view definition;
};

constexpr std::array<TypeInfo, kTypeCount> kTypes = {{
    {"T1", "Identity/Attribution",
     "Identity and Attribution Questions: These inquiries focus on identifying "
     "a person or entity responsible for an action or associated with a work. "
     "They tend to ask \"Who...?\" or refer to persons or origins related to a "
     "context."},
    {"T2", "General Knowledge",
     "Which/What-Based General Knowledge Questions: This group contains "
     "questions that start with \"Which\" or \"What\" and inquire about general "
     "knowledge, often requiring a selection from a set or identification of a "
     "type/category."},
    {"T3", "Location",
     "Location-Based Questions: These questions focus on identifying a "
     "geographic location or specific place where something is based or "
     "occurs."},
    {"T4", "Classification/Categorization",
     "Classification and Categorization Questions: These inquiries request the "
     "classification or categorical identity of entities or things, often "
     "seeking to place an item within a broader group or category."},
    {"T5", "Specific Fact/Figure",
     "Specific Fact and Figure Questions: These questions request a specific "
     "quantitative or qualitative fact. They are straightforward and seek "
     "concrete data or a precise answer, often involving numbers or specific "
     "details."},
    {"T6", "Comparison/Selection",
     "Comparison and Selection Questions: Questions in this group involve "
     "comparing two entities to determine which one holds a particular status "
     "or characteristic, often using formats like \"Between X and Y, "
     "who/which is...?\""},
    {"T7", "Verification/Affirmation",
     "Verification/Affirmation Questions: These questions ask for confirmation "
     "about the equivalence or relationship between two or more entities. They "
     "often use formats like \"Are...?\" or \"Which...?\""},
    {"T8", "Descriptive/Characterization",
     "Descriptive/Characterization Questions: These questions seek an "
     "explanation or characterization of entities, often requiring a "
     "description of how or why something is the way it is, involving traits "
     "or actions."},
    {"T9", "Event/Outcome",
     "Event/Outcome Questions: These questions inquire about the outcome of "
     "specific events or actions, focusing on consequences or results. They "
     "often address changes, damages, or effects."},
    {"T10", "Sequential/Ordering/Causation",
     "Sequential/Ordering/Causation Questions: These questions require "
     "identifying a sequence, comparison, or causation among entities, often "
     "using terms like \"first,\" \"before,\" \"between,\" etc."},
    {"OTHERS", "Others",
     "Others: Use this category only when the question does not fit any of the "
     "categories above."},
}};

const TypeInfo& info(QuestionType t) {
  return kTypes[static_cast<std::size_t>(t)];
}

}  // namespace

std::string_view code(QuestionType t) { return info(t).code; }
std::string_view label(QuestionType t) { return info(t).label; }

std::optional<QuestionType> type_from_code(std::string_view c) {
  std::string upper(c);
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto t : kAllTypes)
    if (code(t) == upper) return t;
  return std::nullopt;
}

std::optional<TypeGroup> group_of(QuestionType t) {
  switch (t) {
    case QuestionType::T1:
    case QuestionType::T2:
    case QuestionType::T3:
    case QuestionType::T4:
    case QuestionType::T5:
      return TypeGroup::Factual;
    case QuestionType::T6:
    case QuestionType::T7:
      return TypeGroup::MultiFact;
    case QuestionType::T8:
    case QuestionType::T9:
    case QuestionType::T10:
      return TypeGroup::Descriptive;
    case QuestionType::Others:
      break;
  }
  return std::nullopt;
}

std::string_view group_label(TypeGroup g) {
  switch (g) {
    case TypeGroup::Factual:
      return "T1-T5";
    case TypeGroup::MultiFact:
      return "T6-T7";
    case TypeGroup::Descriptive:
      return "T8-T10";
  }
  return "";
}

Json to_json(const TypeAssignment& a) {
  return {{"question_id", a.question_id},
          {"qtype", code(a.qtype)},
          {"raw_judge_output", a.raw_judge_output}};
}

TypeAssignment assignment_from_json(const Json& j) {
  auto c = j.at("qtype").get<std::string>();
  auto t = type_from_code(c);
  if (!t) throw IntegrityError("unknown question type code " + c);
  return {j.at("question_id").get<std::string>(), *t,
          j.value("raw_judge_output", std::string{})};
}

std::string classification_system_prompt() {
  std::string prompt =
      "Classify the following question into exactly one of the categories "
      "below. Choose the single category that fits best.\n\n";
  for (const auto& t : kTypes) {
    prompt += t.code;
    prompt += ". ";
    prompt += t.definition;
    prompt += '\n';
  }
  prompt += "\nOutput only the category code (T1-T10 or OTHERS) on a single line.";
  return prompt;
}

std::optional<QuestionType> extract_type_code(std::string_view reply) {
  static const std::regex kCode(R"(\b(T(10|[1-9])(?![0-9])|OTHERS\b))",
                                std::regex::icase);
  std::cmatch m;
  if (!std::regex_search(reply.data(), reply.data() + reply.size(), m, kCode))
    return std::nullopt;
  return type_from_code(m[1].str());
}

TypeAssignment classify_question(llm::Gateway& gateway,
                                 const qgen::QuestionRecord& question,
                                 const std::string& judge) {
  llm::ChatRequest req{judge, classification_system_prompt(), question.text};
  auto reply = gateway.complete(req);
  auto t = extract_type_code(reply.text);
  if (!t) {
    req.system +=
        "\nYour previous reply contained no category code. Reply with the code "
        "alone, for example: T5";
    reply = gateway.complete(req);
    t = extract_type_code(reply.text);
    if (!t)
      throw ClassificationParseError(
          "no category code in judge reply for " + question.id, reply.text);
  }
  return {question.id, *t, reply.text};
}

std::array<double, kTypeCount> type_distribution(
    const std::vector<TypeAssignment>& assignments) {
  if (assignments.empty()) throw Error("type_distribution: no assignments");
  std::array<std::size_t, kTypeCount> counts{};
  for (const auto& a : assignments) ++counts[static_cast<std::size_t>(a.qtype)];
  std::array<double, kTypeCount> pct{};
  const double n = static_cast<double>(assignments.size());
  for (std::size_t i = 0; i < kTypeCount; ++i)
    pct[i] = 100.0 * static_cast<double>(counts[i]) / n;
  return pct;
}

}  // namespace qgbench::classify
