#include "qgbench/coverage.hpp"

#include <algorithm>
#include <charconv>

#include "qgbench/errors.hpp"
#include "qgbench/text.hpp"

namespace qgbench::coverage {

Json to_json(const CoverageRecord& r) {
  Json buckets = Json::array();
  for (std::size_t b = 0; b < kBuckets; ++b)
    if (r.buckets_touched.test(b)) buckets.push_back(b);
  return {{"question_id", r.question_id},
          {"selected_sentences", r.selected_sentences},
          {"pct_covered_sentences", r.pct_covered_sentences},
          {"pct_covered_words", r.pct_covered_words},
          {"buckets_touched", std::move(buckets)},
          {"n_sentences", r.n_sentences},
          {"n_words", r.n_words}};
}

CoverageRecord coverage_from_json(const Json& j) {
  CoverageRecord r;
  r.question_id = j.at("question_id").get<std::string>();
  r.selected_sentences = j.at("selected_sentences").get<std::vector<std::size_t>>();
  r.pct_covered_sentences = j.at("pct_covered_sentences").get<double>();
  r.pct_covered_words = j.at("pct_covered_words").get<double>();
  for (auto b : j.at("buckets_touched").get<std::vector<std::size_t>>()) {
    if (b >= kBuckets) throw IntegrityError("bucket index out of range");
    r.buckets_touched.set(b);
  }
  r.n_sentences = j.at("n_sentences").get<std::size_t>();
  r.n_words = j.at("n_words").get<std::size_t>();
  return r;
}

std::string coverage_system_prompt() {
  return "Select the minimal set of context sentences most relevant to "
         "answering the question.\n"
         "You need to choose at least one sentence and can select multiple "
         "sentences.\n"
         "Output only the sentence numbers of these sentences in a "
         "comma-separated list on a single line without any additional text.";
}

std::string coverage_user_prompt(const corpus::ContextUnit& unit,
                                 std::string_view question) {
  std::string out = "Context sentences:\n";
  for (std::size_t i = 0; i < unit.sentences.size(); ++i)
    out += std::to_string(i + 1) + ". " + unit.sentences[i].text + "\n";
  out += "\nQuestion: ";
  out += question;
  return out;
}

std::optional<std::vector<std::size_t>> parse_sentence_selection(
    std::string_view reply, std::size_t n_sentences) {
  std::vector<std::string> lines = text::split_lines(reply);
  auto first = std::find_if(lines.begin(), lines.end(), [](const std::string& l) {
    return !text::trim(l).empty();
  });
  if (first == lines.end()) return std::nullopt;

  std::vector<std::size_t> out;
  std::string_view rest = text::trim(*first);
  while (true) {
    auto comma = rest.find(',');
    auto token = text::trim(rest.substr(0, comma));
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size())
      return std::nullopt;
    if (value < 1 || value > n_sentences) return std::nullopt;
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> select_relevant_sentences(
    llm::Gateway& gateway, const qgen::QuestionRecord& question,
    const corpus::ContextUnit& unit, const std::string& judge) {
  const std::size_t n = unit.sentences.size();
  if (n == 0) throw Error("context " + unit.id + " has no sentences");
  if (n == 1) return {1};
  llm::ChatRequest req{judge, coverage_system_prompt(),
                       coverage_user_prompt(unit, question.text)};
  auto reply = gateway.complete(req);
  if (auto sel = parse_sentence_selection(reply.text, n)) return *sel;
  req.system += "\nUse only sentence numbers between 1 and " +
                std::to_string(n) + ", for example: 1,3";
  reply = gateway.complete(req);
  if (auto sel = parse_sentence_selection(reply.text, n)) return *sel;
  throw CoverageParseError("invalid sentence selection for " + question.id,
                           reply.text);
}

std::size_t bucket_of(std::size_t w, std::size_t words) {
  return std::min<std::size_t>(kBuckets - 1, (kBuckets * w) / words);
}

CoverageRecord coverage_metrics(const std::vector<std::size_t>& selected,
                                const corpus::ContextUnit& unit) {
  const std::size_t n = unit.sentences.size();
  if (selected.empty()) throw Error("coverage_metrics: empty selection");
  if (unit.word_count == 0) throw Error("coverage_metrics: empty context");
  std::vector<std::size_t> sel(selected);
  std::sort(sel.begin(), sel.end());
  sel.erase(std::unique(sel.begin(), sel.end()), sel.end());

  CoverageRecord r;
  std::size_t covered_words = 0;
  for (std::size_t idx : sel) {
    if (idx < 1 || idx > n)
      throw Error("coverage_metrics: sentence " + std::to_string(idx) +
                  " outside [1, " + std::to_string(n) + "]");
    const auto& span = unit.sentences[idx - 1];
    covered_words += span.length();
    if (span.length() == 0) continue;
    std::size_t lo = bucket_of(span.start, unit.word_count);
    std::size_t hi = bucket_of(span.end - 1, unit.word_count);
    for (std::size_t b = lo; b <= hi; ++b) r.buckets_touched.set(b);
  }
  r.pct_covered_sentences =
      100.0 * static_cast<double>(sel.size()) / static_cast<double>(n);
  r.pct_covered_words = 100.0 * static_cast<double>(covered_words) /
                        static_cast<double>(unit.word_count);
  r.selected_sentences = std::move(sel);
  r.n_sentences = n;
  r.n_words = unit.word_count;
  return r;
}

std::array<double, kBuckets> bucket_frequencies(
    const std::vector<CoverageRecord>& records) {
  if (records.empty()) throw Error("bucket_frequencies: no records");
  std::array<std::size_t, kBuckets> counts{};
  for (const auto& r : records)
    for (std::size_t b = 0; b < kBuckets; ++b)
      if (r.buckets_touched.test(b)) ++counts[b];
  std::array<double, kBuckets> freq{};
  for (std::size_t b = 0; b < kBuckets; ++b)
    freq[b] = 100.0 * static_cast<double>(counts[b]) /
              static_cast<double>(records.size());
  return freq;
}

}  // namespace qgbench::coverage
