#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgbench/errors.hpp"
#include "qgbench/jsonl.hpp"
#include "qgbench/llm_gateway.hpp"
#include "qgbench/report.hpp"

namespace qgbench::pipeline {

enum class Stage { Ingest, Generate, Classify, Coverage, Answer, Shorten, Report, All };

Stage stage_from_name(std::string_view name);
std::string_view stage_name(Stage s);

struct ImportSpec {
  std::string name;
  std::filesystem::path path;
};

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir;
  std::vector<llm::ModelSpec> models;
  std::vector<std::string> generators;  // empty: every configured model
  std::string judge;
  std::string answerer;  // empty: the judge
  std::vector<std::string> prompt_variants = {"v1"};
  std::size_t n_contexts = 256;
  std::size_t questions_per_context = 4;
  std::uint64_t seed = 0;
  std::size_t min_words = 50;
  std::size_t concurrency = 8;
  std::vector<int> word_limits = {1, 2, 3, 4, 8};
  std::vector<ImportSpec> imports;
  int unanswered_threshold = 2;
  report::Grouping grouping = report::Grouping::Dataset;
  llm::RetryPolicy retry;

  std::vector<std::string> generator_models() const;
  const std::string& answer_model() const { return answerer.empty() ? judge : answerer; }

  // Throws ConfigError. With `require_credentials`, also checks endpoint URLs
  // and that every used model's api_key_env is set.
  void validate(bool require_credentials) const;
};

// Relative paths are resolved against `base_dir`.
RunConfig config_from_json(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

struct StageResult {
  Stage stage = Stage::Ingest;
  std::size_t processed = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
};

// Per-item failure that strict mode turns fatal.
class StrictModeError : public Error {
 public:
  using Error::Error;
};

class Pipeline {
 public:
  // A null transport means live HTTP.
  Pipeline(RunConfig config, std::shared_ptr<llm::Transport> transport,
           bool strict = false);

  // Runs one stage, or every stage in order for Stage::All. Throws
  // DependencyError when an upstream output is missing.
  std::vector<StageResult> run(Stage stage);

  llm::Gateway& gateway() { return *gateway_; }
  const RunConfig& config() const { return config_; }

 private:
  StageResult run_one(Stage stage);
  StageResult ingest();
  StageResult generate();
  StageResult classify();
  StageResult coverage();
  StageResult answer();
  StageResult shorten();
  StageResult build_report();

  void require(Stage producer, const std::vector<std::string>& files) const;
  std::filesystem::path out(const std::string& name) const;
  void record(StageResult& result, const std::vector<Json>& failures);

  RunConfig config_;
  bool strict_;
  std::unique_ptr<llm::Gateway> gateway_;
};

struct Calibration {
  std::size_t n_pairs = 0;
  std::size_t unmatched = 0;
  double pearson = 0.0;
};

// Joins human scores ({question_id, human_score, mode?}) with the judge's
// base-answer ratings and correlates them. Writes calibration.json to
// `out_path` when given. Throws Error with fewer than two matched pairs.
Calibration calibrate_judge(const std::filesystem::path& annotations,
                            const std::filesystem::path& ratings,
                            const std::optional<std::filesystem::path>& out_path);

}  // namespace qgbench::pipeline
