#include "qgbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <tuple>

#include "qgbench/errors.hpp"
#include "qgbench/text.hpp"

namespace qgbench::report {
namespace {

using classify::QuestionType;
using classify::TypeGroup;

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += csv_field(cells[i]);
  }
  out += '\n';
  return out;
}

double round1(double v) {
  double r = std::round(v * 10.0) / 10.0;
  return r == 0.0 ? 0.0 : r;
}

Json json1(double v) { return round1(v); }

// Mean and std cells, blank when there is nothing to summarise.
std::vector<std::string> stat_cells(const std::vector<double>& values) {
  if (values.empty()) return {"", ""};
  auto ms = mean_std(values);
  return {fmt1(ms.mean), fmt1(ms.std)};
}

Json stat_json(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  auto ms = mean_std(values);
  return {{"mean", json1(ms.mean)}, {"std", json1(ms.std)}};
}

using AnswerKey = std::tuple<std::string, answers::AnswerMode, std::string>;

struct GroupSlice {
  std::string label;  // "all" or a group label
  std::vector<const qgen::QuestionRecord*> questions;
  double share_pct = 100.0;
};

struct Indexes {
  std::map<std::string, const qgen::QuestionRecord*> questions;
  std::map<std::string, const corpus::ContextUnit*> contexts;
  std::map<std::string, QuestionType> types;
  std::map<std::string, const coverage::CoverageRecord*> coverage;
  std::map<AnswerKey, const answers::AnswerRecord*> answers;
  std::map<AnswerKey, const RatingRow*> ratings;
  std::map<std::string, const answers::ShorteningResult*> shortening;
};

Indexes index_and_check(const ReportInputs& in) {
  Indexes ix;
  std::set<std::string> orphans;
  for (const auto& c : in.contexts) ix.contexts[c.id] = &c;
  for (const auto& q : in.questions) {
    ix.questions[q.id] = &q;
    if (q.context_id && !ix.contexts.count(*q.context_id))
      orphans.insert("context:" + *q.context_id);
  }
  auto check = [&](const std::string& qid, const char* kind) {
    if (!ix.questions.count(qid)) orphans.insert(std::string(kind) + ":" + qid);
  };
  for (const auto& t : in.types) {
    check(t.question_id, "types");
    ix.types[t.question_id] = t.qtype;
  }
  for (const auto& c : in.coverage) {
    check(c.question_id, "coverage");
    ix.coverage[c.question_id] = &c;
  }
  for (const auto& a : in.answers) {
    check(a.question_id, "answers");
    ix.answers[{a.question_id, a.mode, a.variant.name()}] = &a;
  }
  for (const auto& r : in.ratings) {
    check(r.question_id, "ratings");
    AnswerKey key{r.question_id, r.mode, r.variant.name()};
    if (!ix.answers.count(key))
      orphans.insert("ratings:" + r.question_id + "/" +
                     std::string(answers::mode_name(r.mode)) + "/" +
                     r.variant.name());
    ix.ratings[key] = &r;
  }
  for (const auto& s : in.shortening) {
    check(s.question_id, "shortening");
    ix.shortening[s.question_id] = &s;
  }
  if (!orphans.empty()) {
    std::vector<std::string> list(orphans.begin(), orphans.end());
    if (list.size() > 20) {
      auto more = list.size() - 20;
      list.resize(20);
      list.push_back("... (" + std::to_string(more) + " more)");
    }
    throw IntegrityError("dangling references: " + text::join(list, ", "));
  }
  return ix;
}

std::vector<GroupSlice> slices(const std::vector<const qgen::QuestionRecord*>& qs,
                               const Indexes& ix) {
  std::vector<GroupSlice> out;
  out.push_back({"all", qs, 100.0});
  std::size_t classified = 0;
  for (const auto* q : qs) classified += ix.types.count(q->id);
  for (auto g : classify::kAllGroups) {
    GroupSlice s{std::string(classify::group_label(g)), {}, 0.0};
    for (const auto* q : qs) {
      auto it = ix.types.find(q->id);
      if (it != ix.types.end() && classify::group_of(it->second) == g)
        s.questions.push_back(q);
    }
    s.share_pct = classified ? 100.0 * static_cast<double>(s.questions.size()) /
                                   static_cast<double>(classified)
                             : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

struct DatasetBuild {
  MetricReport metrics;
  std::vector<std::string> type_column;  // one cell per kAllTypes entry
  Json summary;
};

DatasetBuild build_dataset(const std::string& label,
                           const std::vector<const qgen::QuestionRecord*>& qs,
                           const Indexes& ix, int unanswered_threshold) {
  DatasetBuild out;
  out.metrics.dataset_label = label;
  out.metrics.n_questions = qs.size();
  auto& tables = out.metrics.tables;
  Json& summary = out.summary;
  summary["n_questions"] = qs.size();

  // Question types.
  std::vector<classify::TypeAssignment> assigned;
  for (const auto* q : qs) {
    auto it = ix.types.find(q->id);
    if (it != ix.types.end()) assigned.push_back({q->id, it->second, {}});
  }
  summary["n_classified"] = assigned.size();
  {
    std::string csv = csv_row({"type", "label", label});
    std::vector<double> rounded(classify::kTypeCount, 0.0);
    if (!assigned.empty()) {
      auto dist = classify::type_distribution(assigned);
      rounded = round_percentages(dist);
      summary["others_rate"] = json1(dist.back());
    } else {
      summary["others_rate"] = nullptr;
    }
    for (std::size_t i = 0; i < classify::kTypeCount; ++i) {
      auto t = classify::kAllTypes[i];
      std::string cell = assigned.empty() ? "" : fmt1(rounded[i]);
      out.type_column.push_back(cell);
      csv += csv_row({std::string(classify::code(t)),
                      std::string(classify::label(t)), cell});
    }
    tables["type_distribution"] = csv;
  }

  auto groups = slices(qs, ix);

  // Question length, overall and per type group.
  {
    std::string csv =
        csv_row({"dataset", "group", "share_pct", "n", "q_len_mean", "q_len_std"});
    Json shares = Json::object();
    for (const auto& g : groups) {
      std::vector<double> lens;
      for (const auto* q : g.questions) lens.push_back(static_cast<double>(q->word_count));
      auto cells = stat_cells(lens);
      csv += csv_row({label, g.label, fmt1(g.share_pct),
                      std::to_string(g.questions.size()), cells[0], cells[1]});
      if (g.label == "all")
        summary["question_length"] = stat_json(lens);
      else
        shares[g.label] = assigned.empty() ? Json(nullptr) : json1(g.share_pct);
    }
    summary["type_group_share"] = shares;
    tables["length_stats"] = csv;
  }

  // Context coverage.
  std::vector<coverage::CoverageRecord> cov;
  for (const auto* q : qs) {
    auto it = ix.coverage.find(q->id);
    if (it != ix.coverage.end()) cov.push_back(*it->second);
  }
  {
    std::map<std::string, std::pair<double, double>> ctx_sizes;
    std::vector<double> words_pct, sents_pct;
    for (const auto& r : cov) {
      words_pct.push_back(r.pct_covered_words);
      sents_pct.push_back(r.pct_covered_sentences);
      const auto* q = ix.questions.at(r.question_id);
      if (q->context_id)
        ctx_sizes[*q->context_id] = {static_cast<double>(r.n_words),
                                     static_cast<double>(r.n_sentences)};
    }
    std::vector<double> ctx_words, ctx_sents;
    for (const auto& [id, sz] : ctx_sizes) {
      ctx_words.push_back(sz.first);
      ctx_sents.push_back(sz.second);
    }
    std::vector<std::string> row = {label, std::to_string(cov.size()),
                                    std::to_string(qs.size() - cov.size())};
    for (const auto* v : {&ctx_words, &words_pct, &ctx_sents, &sents_pct}) {
      auto cells = stat_cells(*v);
      row.insert(row.end(), cells.begin(), cells.end());
    }
    tables["coverage_summary"] =
        csv_row({"dataset", "n", "skipped", "ctx_words_mean", "ctx_words_std",
                 "pct_covered_words_mean", "pct_covered_words_std",
                 "ctx_sents_mean", "ctx_sents_std", "pct_covered_sents_mean",
                 "pct_covered_sents_std"}) +
        csv_row(row);
    summary["coverage"] = {{"n", cov.size()},
                           {"pct_covered_words", stat_json(words_pct)},
                           {"pct_covered_sents", stat_json(sents_pct)}};

    std::vector<std::string> header = {"dataset", "n"};
    for (std::size_t b = 0; b < coverage::kBuckets; ++b) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.1f-%.1f", b / 10.0, (b + 1) / 10.0);
      header.emplace_back(buf);
    }
    std::vector<std::string> freq_row = {label, std::to_string(cov.size())};
    if (!cov.empty()) {
      for (double f : coverage::bucket_frequencies(cov)) freq_row.push_back(fmt1(f));
    } else {
      freq_row.resize(header.size());
    }
    tables["bucket_frequencies"] = csv_row(header) + csv_row(freq_row);
  }

  // Answerability (with context) and uncommonness (without context).
  {
    std::string csv = csv_row({"dataset", "mode", "n", "score_0", "score_1",
                               "score_2", "score_3", "score_4", "score_5",
                               "unanswered_share"});
    Json unanswered = Json::object();
    for (auto mode : {answers::AnswerMode::WithContext,
                      answers::AnswerMode::WithoutContext}) {
      std::vector<answers::Rating> rs;
      for (const auto* q : qs) {
        auto it = ix.ratings.find({q->id, mode, "base"});
        if (it != ix.ratings.end()) rs.push_back(it->second->rating);
      }
      std::vector<std::string> row = {label, std::string(answers::mode_name(mode)),
                                      std::to_string(rs.size())};
      if (rs.empty()) {
        row.resize(10);
        unanswered[std::string(answers::mode_name(mode))] = nullptr;
      } else {
        auto h = answers::answerability_histogram(rs, unanswered_threshold);
        for (double p : h.pct) row.push_back(fmt1(p));
        row.push_back(fmt1(h.unanswered_share));
        unanswered[std::string(answers::mode_name(mode))] = json1(h.unanswered_share);
      }
      csv += csv_row(row);
    }
    summary["unanswered_share"] = unanswered;
    tables["rating_histograms"] = csv;
  }

  // Answer lengths and shortening.
  {
    std::string csv = csv_row(
        {"dataset", "group", "share_pct", "n", "golden_len_mean", "golden_len_std",
         "original_len_mean", "original_len_std", "shortened_len_mean",
         "shortened_len_std"});
    for (const auto& g : groups) {
      std::vector<double> golden, original, shortened;
      for (const auto* q : g.questions) {
        if (q->golden_answer)
          golden.push_back(static_cast<double>(text::word_count(*q->golden_answer)));
        auto a = ix.answers.find({q->id, answers::AnswerMode::WithContext, "base"});
        if (a != ix.answers.end())
          original.push_back(static_cast<double>(a->second->word_count));
        auto s = ix.shortening.find(q->id);
        if (s != ix.shortening.end())
          shortened.push_back(static_cast<double>(s->second->shortened_len));
      }
      std::vector<std::string> row = {label, g.label, fmt1(g.share_pct),
                                      std::to_string(g.questions.size())};
      for (const auto* v : {&golden, &original, &shortened}) {
        auto cells = stat_cells(*v);
        row.insert(row.end(), cells.begin(), cells.end());
      }
      csv += csv_row(row);
      if (g.label == "all")
        summary["answer_length"] = {{"golden", stat_json(golden)},
                                    {"original", stat_json(original)},
                                    {"shortened", stat_json(shortened)}};
    }
    tables["answer_length_summary"] = csv;

    std::map<std::size_t, std::pair<std::size_t, std::size_t>> hist;
    std::size_t max_len = 0;
    bool any = false;
    for (const auto* q : qs) {
      auto s = ix.shortening.find(q->id);
      if (s == ix.shortening.end()) continue;
      any = true;
      ++hist[s->second->original_len].first;
      ++hist[s->second->shortened_len].second;
      max_len = std::max({max_len, s->second->original_len, s->second->shortened_len});
    }
    std::string dist = csv_row({"dataset", "length", "original_count", "shortened_count"});
    if (any) {
      for (std::size_t len = 0; len <= max_len; ++len) {
        auto it = hist.find(len);
        auto counts = it == hist.end() ? std::pair<std::size_t, std::size_t>{} : it->second;
        dist += csv_row({label, std::to_string(len), std::to_string(counts.first),
                         std::to_string(counts.second)});
      }
    }
    tables["shortening_distributions"] = dist;
  }
  return out;
}

std::string strip_header(const std::string& csv) {
  auto nl = csv.find('\n');
  return nl == std::string::npos ? std::string{} : csv.substr(nl + 1);
}

std::string header_of(const std::string& csv) {
  auto nl = csv.find('\n');
  return csv.substr(0, nl == std::string::npos ? csv.size() : nl + 1);
}

}  // namespace

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error("mean_std: empty input");
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : values) {
    ++k;
    double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  double sd = k > 1 ? std::sqrt(std::max(0.0, m2) / static_cast<double>(k - 1)) : 0.0;
  return {mean, sd};
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()) + ")");
  if (x.size() < 2) throw Error("pearson: need at least two pairs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

std::string fmt1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  std::string s(buf);
  if (s == "-0.0") s = "0.0";
  return s;
}

std::vector<double> round_percentages(std::span<const double> pct) {
  std::vector<long long> tenths(pct.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  long long floor_sum = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < pct.size(); ++i) {
    double scaled = pct[i] * 10.0;
    tenths[i] = static_cast<long long>(std::floor(scaled + 1e-9));
    remainders.push_back({scaled - static_cast<double>(tenths[i]), i});
    floor_sum += tenths[i];
    total += pct[i];
  }
  long long target = std::llround(total * 10.0);
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long long k = 0; k < target - floor_sum && k < static_cast<long long>(remainders.size()); ++k)
    ++tenths[remainders[static_cast<std::size_t>(k)].second];
  std::vector<double> out;
  for (auto t : tenths) out.push_back(static_cast<double>(t) / 10.0);
  return out;
}

Grouping grouping_from_name(std::string_view name) {
  if (name == "dataset") return Grouping::Dataset;
  if (name == "model") return Grouping::Model;
  if (name == "variant") return Grouping::Variant;
  throw ConfigError("grouping must be dataset, model or variant");
}

std::string_view grouping_name(Grouping g) {
  switch (g) {
    case Grouping::Dataset:
      return "dataset";
    case Grouping::Model:
      return "model";
    case Grouping::Variant:
      return "variant";
  }
  return "";
}

std::string dataset_label(const qgen::QuestionRecord& q, Grouping g) {
  if (const auto* gen = std::get_if<qgen::Generated>(&q.source)) {
    switch (g) {
      case Grouping::Dataset:
        return gen->model + "@" + gen->prompt_variant;
      case Grouping::Model:
        return gen->model;
      case Grouping::Variant:
        return gen->prompt_variant;
    }
  }
  return std::get<qgen::Imported>(q.source).dataset;
}

std::string sanitize_label(std::string_view label) {
  std::string out;
  for (char c : label) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-' ||
              c == '@';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

RatingRow rating_row_from_json(const Json& j) {
  return {j.at("question_id").get<std::string>(),
          answers::mode_from_name(j.at("mode").get<std::string>()),
          answers::AnswerVariant::parse(j.at("variant").get<std::string>()),
          answers::rating_from_json(j)};
}

Report build_report(const ReportInputs& inputs, Grouping grouping,
                    int unanswered_threshold) {
  const Indexes ix = index_and_check(inputs);

  std::map<std::string, std::vector<const qgen::QuestionRecord*>> by_label;
  for (const auto& q : inputs.questions)
    by_label[dataset_label(q, grouping)].push_back(&q);

  Report report;
  report.grouping = grouping;
  Json summary = {{"grouping", grouping_name(grouping)},
                  {"n_questions", inputs.questions.size()},
                  {"unanswered_threshold", unanswered_threshold},
                  {"stage_tallies", inputs.stage_tallies},
                  {"datasets", Json::object()}};

  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> type_columns;
  for (const auto& [label, qs] : by_label) {
    auto built = build_dataset(label, qs, ix, unanswered_threshold);
    summary["datasets"][label] = std::move(built.summary);
    labels.push_back(label);
    type_columns.push_back(std::move(built.type_column));
    report.datasets.push_back(std::move(built.metrics));
  }

  {
    std::vector<std::string> header = {"type", "label"};
    header.insert(header.end(), labels.begin(), labels.end());
    std::string csv = csv_row(header);
    for (std::size_t i = 0; i < classify::kTypeCount; ++i) {
      auto t = classify::kAllTypes[i];
      std::vector<std::string> row = {std::string(classify::code(t)),
                                      std::string(classify::label(t))};
      for (const auto& col : type_columns) row.push_back(col[i]);
      csv += csv_row(row);
    }
    report.combined["type_distribution"] = csv;
  }
  for (auto name : kTableNames) {
    if (name == "type_distribution") continue;
    std::string key(name);
    std::string csv;
    for (const auto& ds : report.datasets) {
      const auto& table = ds.tables.at(key);
      if (csv.empty()) csv = header_of(table);
      csv += strip_header(table);
    }
    report.combined[key] = csv;
  }
  report.summary_json = summary.dump(2) + "\n";
  return report;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  if (ec) throw IoError("cannot clear report directory " + dir.string());
  for (const auto& ds : report.datasets)
    for (const auto& [name, csv] : ds.tables)
      write_text_atomic(dir / sanitize_label(ds.dataset_label) / (name + ".csv"), csv);
  for (const auto& [name, csv] : report.combined)
    write_text_atomic(dir / (name + ".csv"), csv);
  write_text_atomic(dir / "summary.json", report.summary_json);
}

}  // namespace qgbench::report
