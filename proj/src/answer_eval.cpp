#include "qgbench/answer_eval.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "qgbench/errors.hpp"
#include "qgbench/text.hpp"

namespace qgbench::answers {

std::string_view mode_name(AnswerMode m) {
  return m == AnswerMode::WithContext ? "with_context" : "without_context";
}

AnswerMode mode_from_name(std::string_view name) {
  if (name == "with_context") return AnswerMode::WithContext;
  if (name == "without_context") return AnswerMode::WithoutContext;
  throw IntegrityError("unknown answer mode " + std::string(name));
}

AnswerVariant AnswerVariant::limit(int words) {
  if (words < 1) throw ConfigError("word limit must be >= 1");
  return AnswerVariant(Kind::Limit, words);
}

AnswerVariant AnswerVariant::parse(std::string_view name) {
  if (name == "base") return base();
  if (name == "concise") return concise();
  constexpr std::string_view kPrefix = "limit_";
  if (name.substr(0, kPrefix.size()) == kPrefix) {
    auto digits = name.substr(kPrefix.size());
    int value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec == std::errc{} && ptr == digits.data() + digits.size() && value >= 1)
      return limit(value);
  }
  throw IntegrityError("unknown answer variant " + std::string(name));
}

std::string AnswerVariant::name() const {
  switch (kind_) {
    case Kind::Base:
      return "base";
    case Kind::Concise:
      return "concise";
    case Kind::Limit:
      return "limit_" + std::to_string(limit_);
  }
  return {};
}

long AnswerVariant::tie_rank() const noexcept {
  constexpr long kMax = std::numeric_limits<long>::max();
  switch (kind_) {
    case Kind::Limit:
      return limit_;
    case Kind::Concise:
      return kMax - 1;
    case Kind::Base:
      break;
  }
  return kMax;
}

Json to_json(const AnswerRecord& a) {
  return {{"question_id", a.question_id},
          {"mode", mode_name(a.mode)},
          {"variant", a.variant.name()},
          {"text", a.text},
          {"word_count", a.word_count}};
}

AnswerRecord answer_from_json(const Json& j) {
  AnswerRecord a;
  a.question_id = j.at("question_id").get<std::string>();
  a.mode = mode_from_name(j.at("mode").get<std::string>());
  a.variant = AnswerVariant::parse(j.at("variant").get<std::string>());
  a.text = j.at("text").get<std::string>();
  a.word_count = j.at("word_count").get<std::size_t>();
  return a;
}

Json to_json(const AnswerRecord& a, const Rating& r) {
  return {{"question_id", a.question_id},
          {"mode", mode_name(a.mode)},
          {"variant", a.variant.name()},
          {"score", r.score},
          {"justification", r.justification}};
}

Rating rating_from_json(const Json& j) {
  Rating r{j.at("score").get<int>(), j.value("justification", std::string{})};
  if (r.score < 0 || r.score > 5)
    throw IntegrityError("rating score out of range");
  return r;
}

Json to_json(const ShorteningResult& s) {
  return {{"question_id", s.question_id},
          {"original_len", s.original_len},
          {"shortened_len", s.shortened_len},
          {"chosen_variant", s.chosen_variant.name()}};
}

ShorteningResult shortening_from_json(const Json& j) {
  return {j.at("question_id").get<std::string>(),
          j.at("original_len").get<std::size_t>(),
          j.at("shortened_len").get<std::size_t>(),
          AnswerVariant::parse(j.at("chosen_variant").get<std::string>())};
}

std::string answer_system_prompt(const AnswerVariant& variant) {
  std::string prompt =
      "You are to generate a short answer based on the following question and "
      "an optional supporting fact.";
  if (variant.kind() == AnswerVariant::Kind::Concise)
    prompt += " Provide a very concise answer without repeating the question.";
  if (variant.kind() == AnswerVariant::Kind::Limit)
    prompt += " Please ensure that your answer contains no more than " +
              std::to_string(variant.word_limit()) + " words.";
  return prompt;
}

std::string answer_user_prompt(std::string_view question,
                               const corpus::RenderedContext* context) {
  std::string out;
  if (context) out += "Supporting fact:\n" + context->rendered + "\n\n";
  out += "Question: ";
  out += question;
  return out;
}

AnswerRecord generate_answer(llm::Gateway& gateway,
                             const qgen::QuestionRecord& question,
                             const corpus::RenderedContext* context,
                             const AnswerVariant& variant,
                             const std::string& answerer) {
  if (variant.kind() != AnswerVariant::Kind::Base && context == nullptr)
    throw Error("answer variant " + variant.name() + " requires a context");
  auto reply = gateway.complete({answerer, answer_system_prompt(variant),
                                 answer_user_prompt(question.text, context)});
  std::string text(text::trim(reply.text));
  if (text.empty())
    throw EmptyAnswerError("empty answer for " + question.id + " (" +
                           variant.name() + ")");
  AnswerRecord a;
  a.question_id = question.id;
  a.mode = context ? AnswerMode::WithContext : AnswerMode::WithoutContext;
  a.variant = variant;
  a.word_count = text::word_count(text);
  a.text = std::move(text);
  return a;
}

std::string rating_system_prompt() {
  return "You are to rate the following answer to a question, taking into "
         "account any optional supporting facts provided.\n\n"
         "Assign a rating from 0 to 5 based on the criteria below:\n\n"
         "0: No answer or completely irrelevant\n\n"
         "1: Significantly incorrect or incomplete\n\n"
         "2: Partially correct; major inaccuracies or omissions\n\n"
         "3: Correct but lacks depth; minimal detail\n\n"
         "4: Mostly correct; minor errors; includes relevant details\n\n"
         "5: Fully accurate and detailed; clear and comprehensive\n\n"
         "Your response should consist of two lines:\n"
         "The rating from 0 to 5.\n"
         "A brief justification for your rating.";
}

std::string rating_user_prompt(std::string_view question, std::string_view answer,
                               const corpus::RenderedContext* context) {
  std::string out;
  if (context) out += "Supporting fact:\n" + context->rendered + "\n\n";
  out += "Question: ";
  out += question;
  out += "\n\nAnswer: ";
  out += answer;
  return out;
}

std::optional<Rating> parse_rating(std::string_view reply) {
  auto lines = text::split_lines(reply);
  auto first = std::find_if(lines.begin(), lines.end(), [](const std::string& l) {
    return !text::trim(l).empty();
  });
  if (first == lines.end()) return std::nullopt;
  const std::string& line = *first;
  auto digit = std::find_if(line.begin(), line.end(),
                            [](char c) { return c >= '0' && c <= '9'; });
  if (digit == line.end()) return std::nullopt;
  auto end = std::find_if(digit, line.end(),
                          [](char c) { return c < '0' || c > '9'; });
  if (end - digit > 3) return std::nullopt;
  int score = std::stoi(std::string(digit, end));
  if (score < 0 || score > 5) return std::nullopt;

  std::vector<std::string> rest;
  for (auto it = std::next(first); it != lines.end(); ++it) {
    auto t = text::trim(*it);
    if (!t.empty()) rest.emplace_back(t);
  }
  return Rating{score, text::join(rest, "\n")};
}

Rating rate_answer(llm::Gateway& gateway, const qgen::QuestionRecord& question,
                   const AnswerRecord& answer,
                   const corpus::RenderedContext* context,
                   const std::string& judge) {
  llm::ChatRequest req{judge, rating_system_prompt(),
                       rating_user_prompt(question.text, answer.text, context)};
  auto reply = gateway.complete(req);
  if (auto r = parse_rating(reply.text)) return *r;
  req.system +=
      "\nThe first line must be a single integer from 0 to 5 and nothing else.";
  reply = gateway.complete(req);
  if (auto r = parse_rating(reply.text)) return *r;
  throw RatingParseError("unparsable rating for " + question.id + " (" +
                             answer.variant.name() + ")",
                         reply.text);
}

ShorteningResult shortened_length(const RatedAnswer& base,
                                  const std::vector<RatedAnswer>& variants) {
  const auto& qid = base.answer.question_id;
  if (!base.rating) throw Error("shortened_length: base answer of " + qid + " is unrated");
  if (base.answer.variant != AnswerVariant::base() ||
      base.answer.mode != AnswerMode::WithContext)
    throw Error("shortened_length: base must be the with-context base answer");

  const RatedAnswer* chosen = &base;
  for (const auto& v : variants) {
    if (v.answer.question_id != qid)
      throw Error("shortened_length: variant belongs to " + v.answer.question_id +
                  ", expected " + qid);
    if (!v.rating)
      throw Error("shortened_length: variant " + v.answer.variant.name() +
                  " of " + qid + " is unrated");
    if (v.answer.mode != AnswerMode::WithContext) continue;
    if (v.rating->score < base.rating->score) continue;
    auto key = [](const RatedAnswer& r) {
      return std::pair{r.answer.word_count, r.answer.variant.tie_rank()};
    };
    if (key(v) < key(*chosen)) chosen = &v;
  }
  return {qid, base.answer.word_count, chosen->answer.word_count,
          chosen->answer.variant};
}

RatingHistogram answerability_histogram(const std::vector<Rating>& ratings,
                                        int unanswered_threshold) {
  if (ratings.empty()) throw Error("answerability_histogram: no ratings");
  std::array<std::size_t, 6> counts{};
  std::size_t unanswered = 0;
  for (const auto& r : ratings) {
    if (r.score < 0 || r.score > 5) throw Error("rating out of range");
    ++counts[static_cast<std::size_t>(r.score)];
    if (r.score <= unanswered_threshold) ++unanswered;
  }
  RatingHistogram h;
  h.n = ratings.size();
  const double n = static_cast<double>(ratings.size());
  for (std::size_t s = 0; s < 6; ++s)
    h.pct[s] = 100.0 * static_cast<double>(counts[s]) / n;
  h.unanswered_share = 100.0 * static_cast<double>(unanswered) / n;
  return h;
}

}  // namespace qgbench::answers
