#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgbench/corpus.hpp"
#include "qgbench/jsonl.hpp"
#include "qgbench/llm_gateway.hpp"
#include "qgbench/question_gen.hpp"

namespace qgbench::answers {

enum class AnswerMode { WithContext, WithoutContext };

std::string_view mode_name(AnswerMode m);  // "with_context" / "without_context"
AnswerMode mode_from_name(std::string_view name);

// base, concise, or limit_X (answer capped at X words).
class AnswerVariant {
 public:
  enum class Kind { Base, Concise, Limit };

  static AnswerVariant base() { return AnswerVariant(Kind::Base, 0); }
  static AnswerVariant concise() { return AnswerVariant(Kind::Concise, 0); }
  static AnswerVariant limit(int words);
  static AnswerVariant parse(std::string_view name);

  Kind kind() const noexcept { return kind_; }
  int word_limit() const noexcept { return limit_; }
  std::string name() const;

  // Shortening tie-break order: smaller limits first, then concise, then
  // base.
  long tie_rank() const noexcept;

  bool operator==(const AnswerVariant&) const = default;

 private:
  AnswerVariant(Kind k, int limit) : kind_(k), limit_(limit) {}
  Kind kind_;
  int limit_;
};

struct AnswerRecord {
  std::string question_id;
  AnswerMode mode = AnswerMode::WithContext;
  AnswerVariant variant = AnswerVariant::base();
  std::string text;
  std::size_t word_count = 0;
};

struct Rating {
  int score = 0;
  std::string justification;
};

struct RatedAnswer {
  AnswerRecord answer;
  std::optional<Rating> rating;
};

struct ShorteningResult {
  std::string question_id;
  std::size_t original_len = 0;
  std::size_t shortened_len = 0;
  AnswerVariant chosen_variant = AnswerVariant::base();
};

Json to_json(const AnswerRecord& a);
AnswerRecord answer_from_json(const Json& j);
// Rating rows carry the answer key (question_id, mode, variant) they score.
Json to_json(const AnswerRecord& a, const Rating& r);
Rating rating_from_json(const Json& j);
Json to_json(const ShorteningResult& s);
ShorteningResult shortening_from_json(const Json& j);

std::string answer_system_prompt(const AnswerVariant& variant);
std::string answer_user_prompt(std::string_view question,
                               const corpus::RenderedContext* context);

// Non-base variants require a context. Throws EmptyAnswerError on a blank
// reply.
AnswerRecord generate_answer(llm::Gateway& gateway,
                             const qgen::QuestionRecord& question,
                             const corpus::RenderedContext* context,
                             const AnswerVariant& variant,
                             const std::string& answerer);

std::string rating_system_prompt();
std::string rating_user_prompt(std::string_view question, std::string_view answer,
                               const corpus::RenderedContext* context);

// Score = first integer on the first non-empty line, accepted only in 0..5;
// justification = the remaining lines.
std::optional<Rating> parse_rating(std::string_view reply);

// The judge sees the context whenever one is given, independent of how the
// answer was produced. One corrective retry, then RatingParseError.
Rating rate_answer(llm::Gateway& gateway, const qgen::QuestionRecord& question,
                   const AnswerRecord& answer,
                   const corpus::RenderedContext* context,
                   const std::string& judge);

// Shortest answer whose rating is at least the base rating (base included).
// Throws Error on missing ratings or mismatched question ids.
ShorteningResult shortened_length(const RatedAnswer& base,
                                  const std::vector<RatedAnswer>& variants);

struct RatingHistogram {
  std::array<double, 6> pct{};  // share of each score 0..5
  double unanswered_share = 0.0;  // share with score <= threshold
  std::size_t n = 0;
};

RatingHistogram answerability_histogram(const std::vector<Rating>& ratings,
                                        int unanswered_threshold = 2);

}  // namespace qgbench::answers
