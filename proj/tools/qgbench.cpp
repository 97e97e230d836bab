// qgbench: run the question-generation evaluation pipeline stage by stage.
//
//   qgbench <stage> --config run.json [--strict] [--mock script.jsonl]
//   qgbench run --stage <stage> --config run.json ...
//   qgbench calibrate --annotations human.jsonl --ratings out/ratings.jsonl
//
// Exit codes: 0 success, 1 invalid config/arguments, 2 missing upstream
// stage, 3 runtime failure (including per-item failures under --strict).

#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "qgbench/errors.hpp"
#include "qgbench/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDependency = 2;
constexpr int kExitRuntime = 3;

struct StageArgs {
  std::string config;
  std::string mock;
  bool strict = false;
};

void add_stage_options(CLI::App* cmd, StageArgs& args) {
  cmd->add_option("--config", args.config, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--mock", args.mock,
                  "Scripted mock transport (JSONL) instead of live HTTP")
      ->check(CLI::ExistingFile);
  cmd->add_flag("--strict", args.strict, "Treat per-question failures as fatal");
}

int run_stage(const std::string& stage_name, const StageArgs& args) {
  using namespace qgbench;
  try {
    auto stage = pipeline::stage_from_name(stage_name);
    auto config = pipeline::load_config(args.config);
    std::shared_ptr<llm::Transport> transport;
    if (!args.mock.empty()) transport = llm::MockTransport::from_file(args.mock);
    pipeline::Pipeline pipe(std::move(config), transport, args.strict);
    for (const auto& r : pipe.run(stage)) {
      std::cout << pipeline::stage_name(r.stage) << ": processed=" << r.processed
                << " failed=" << r.failed << " skipped=" << r.skipped << "\n";
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const DependencyError& e) {
    spdlog::error("{}", e.what());
    return kExitDependency;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-generation evaluation harness"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  const char* stages[] = {"ingest", "generate", "classify", "coverage",
                          "answer", "shorten",  "report",   "all"};
  StageArgs stage_args;
  std::string selected_stage;
  for (const char* name : stages) {
    auto* cmd = app.add_subcommand(name, std::string("Run the ") + name + " stage");
    add_stage_options(cmd, stage_args);
    cmd->callback([&selected_stage, name] { selected_stage = name; });
  }

  auto* run = app.add_subcommand("run", "Run a stage selected with --stage");
  std::string run_stage_name;
  run->add_option("--stage", run_stage_name, "Stage name")
      ->required()
      ->check(CLI::IsMember({"ingest", "generate", "classify", "coverage", "answer",
                             "shorten", "report", "all"}));
  add_stage_options(run, stage_args);
  run->callback([&] { selected_stage = run_stage_name; });

  auto* calibrate = app.add_subcommand("calibrate", "Correlate judge ratings with human scores");
  std::string annotations, ratings, out;
  calibrate->add_option("--annotations", annotations, "JSONL {question_id, human_score}")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--ratings", ratings, "ratings.jsonl from the answer stage")
      ->required()
      ->check(CLI::ExistingFile);
  calibrate->add_option("--out", out, "Where to write calibration.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_default_logger(spdlog::stderr_color_mt("qgbench"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  if (calibrate->parsed()) {
    try {
      std::filesystem::path out_path =
          out.empty() ? std::filesystem::path(ratings).parent_path() / "calibration.json"
                      : std::filesystem::path(out);
      auto c = qgbench::pipeline::calibrate_judge(annotations, ratings, out_path);
      std::cout << "pairs=" << c.n_pairs << " unmatched=" << c.unmatched
                << " pearson=" << c.pearson << "\n";
      return kExitOk;
    } catch (const qgbench::ConfigError& e) {
      spdlog::error("{}", e.what());
      return kExitValidation;
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      return kExitRuntime;
    }
  }
  return run_stage(selected_stage, stage_args);
}
