#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qgbench/answer_eval.hpp"
#include "qgbench/classify.hpp"
#include "qgbench/corpus.hpp"
#include "qgbench/coverage.hpp"
#include "qgbench/jsonl.hpp"
#include "qgbench/question_gen.hpp"

namespace qgbench::report {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for one value
};

// Throws Error on empty input.
MeanStd mean_std(std::span<const double> values);

// Pearson product-moment correlation. Throws Error on length mismatch,
// fewer than two pairs, or zero variance in either input.
double pearson(std::span<const double> x, std::span<const double> y);

// Fixed one-decimal rendering; never prints "-0.0".
std::string fmt1(double v);

// Rounds percentages to one decimal with the largest-remainder method so the
// rounded values keep the rounded total of the inputs.
std::vector<double> round_percentages(std::span<const double> pct);

enum class Grouping { Dataset, Model, Variant };
Grouping grouping_from_name(std::string_view name);
std::string_view grouping_name(Grouping g);

// Generated questions: "<model>@<variant>", "<model>" or "<variant>"
// depending on the grouping; imported questions: their dataset name.
std::string dataset_label(const qgen::QuestionRecord& q, Grouping g);

// Directory-safe form of a label.
std::string sanitize_label(std::string_view label);

struct RatingRow {
  std::string question_id;
  answers::AnswerMode mode = answers::AnswerMode::WithContext;
  answers::AnswerVariant variant = answers::AnswerVariant::base();
  answers::Rating rating;
};

RatingRow rating_row_from_json(const Json& j);

struct ReportInputs {
  std::vector<corpus::ContextUnit> contexts;
  std::vector<qgen::QuestionRecord> questions;
  std::vector<classify::TypeAssignment> types;
  std::vector<coverage::CoverageRecord> coverage;
  std::vector<answers::AnswerRecord> answers;
  std::vector<RatingRow> ratings;
  std::vector<answers::ShorteningResult> shortening;
  // Per-stage {"failed": n, "skipped": n} tallies, copied into summary.json.
  Json stage_tallies = Json::object();
};

inline constexpr std::array<std::string_view, 7> kTableNames = {
    "type_distribution", "length_stats",          "coverage_summary",
    "bucket_frequencies", "rating_histograms",    "answer_length_summary",
    "shortening_distributions"};

struct MetricReport {
  std::string dataset_label;
  std::size_t n_questions = 0;
  std::map<std::string, std::string> tables;  // table name -> CSV bytes
};

struct Report {
  Grouping grouping = Grouping::Dataset;
  std::vector<MetricReport> datasets;  // sorted by label
  std::map<std::string, std::string> combined;  // cross-dataset CSVs
  std::string summary_json;
};

// Throws IntegrityError listing ids that reference unknown questions or
// contexts.
Report build_report(const ReportInputs& inputs, Grouping grouping,
                    int unanswered_threshold = 2);

// Replaces `dir` with report/<label>/<table>.csv, report/<table>.csv and
// report/summary.json.
void write_report(const Report& report, const std::filesystem::path& dir);

}  // namespace qgbench::report
