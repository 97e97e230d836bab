#include "qgbench/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "qgbench/answer_eval.hpp"
#include "qgbench/classify.hpp"
#include "qgbench/corpus.hpp"
#include "qgbench/coverage.hpp"
#include "qgbench/errors.hpp"
#include "qgbench/parallel.hpp"
#include "qgbench/question_gen.hpp"

namespace qgbench::pipeline {
namespace {

namespace fs = std::filesystem;

constexpr const char* kContexts = "contexts.jsonl";
constexpr const char* kImportedContexts = "imported_contexts.jsonl";
constexpr const char* kImportedQuestions = "imported_questions.jsonl";
constexpr const char* kQuestions = "questions.jsonl";
constexpr const char* kTypes = "types.jsonl";
constexpr const char* kCoverage = "coverage.jsonl";
constexpr const char* kAnswers = "answers.jsonl";
constexpr const char* kRatings = "ratings.jsonl";
constexpr const char* kShortening = "shortening.jsonl";

constexpr Stage kOrder[] = {Stage::Ingest,   Stage::Generate, Stage::Classify,
                            Stage::Coverage, Stage::Answer,   Stage::Shorten,
                            Stage::Report};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

template <class T, class F>
std::vector<T> load_rows(const fs::path& path, F&& convert) {
  std::vector<T> out;
  for (const auto& row : read_jsonl(path)) {
    try {
      out.push_back(convert(row.value));
    } catch (const Json::exception& e) {
      throw IntegrityError(path.string() + ":" + std::to_string(row.line) +
                           ": " + e.what());
    }
  }
  return out;
}

std::vector<corpus::ContextUnit> load_contexts(const fs::path& path) {
  return load_rows<corpus::ContextUnit>(path, corpus::context_from_json);
}

std::vector<qgen::QuestionRecord> load_questions(const fs::path& path) {
  return load_rows<qgen::QuestionRecord>(path, qgen::question_from_json);
}

template <class T>
void write_rows(const fs::path& path, const std::vector<T>& rows) {
  std::vector<Json> json;
  json.reserve(rows.size());
  for (const auto& r : rows) json.push_back(to_json(r));
  write_text_atomic(path, to_jsonl(json));
}

Json failure(const std::string& id, const std::exception& e) {
  Json j = {{"id", id}, {"error", e.what()}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) j["raw"] = pe->raw();
  return j;
}

}  // namespace

Stage stage_from_name(std::string_view name) {
  for (auto s : {Stage::Ingest, Stage::Generate, Stage::Classify, Stage::Coverage,
                 Stage::Answer, Stage::Shorten, Stage::Report, Stage::All})
    if (stage_name(s) == name) return s;
  throw ConfigError("unknown stage '" + std::string(name) + "'");
}

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Generate: return "generate";
    case Stage::Classify: return "classify";
    case Stage::Coverage: return "coverage";
    case Stage::Answer: return "answer";
    case Stage::Shorten: return "shorten";
    case Stage::Report: return "report";
    case Stage::All: return "all";
  }
  return "";
}

std::vector<std::string> RunConfig::generator_models() const {
  if (!generators.empty()) return generators;
  std::vector<std::string> names;
  for (const auto& m : models) names.push_back(m.name);
  return names;
}

void RunConfig::validate(bool require_credentials) const {
  if (corpus.empty()) throw ConfigError("config: corpus path is required");
  if (output_dir.empty()) throw ConfigError("config: output_dir is required");
  if (cache_dir.empty()) throw ConfigError("config: cache_dir is required");
  if (models.empty()) throw ConfigError("config: at least one model is required");
  std::set<std::string> names;
  for (const auto& m : models) {
    m.validate();
    if (!names.insert(m.name).second)
      throw ConfigError("config: duplicate model " + m.name);
  }
  auto known = [&](const std::string& name, const char* role) {
    if (!names.count(name))
      throw ConfigError(std::string("config: ") + role + " '" + name +
                        "' is not a configured model");
  };
  if (judge.empty()) throw ConfigError("config: judge is required");
  known(judge, "judge");
  known(answer_model(), "answerer");
  for (const auto& g : generator_models()) known(g, "generator");
  if (prompt_variants.empty())
    throw ConfigError("config: prompt_variants must not be empty");
  for (const auto& v : prompt_variants) qgen::prompt_variant(v);
  if (n_contexts < 1) throw ConfigError("config: n_contexts must be >= 1");
  if (questions_per_context < 1)
    throw ConfigError("config: questions_per_context must be >= 1");
  if (concurrency < 1) throw ConfigError("config: concurrency must be >= 1");
  for (int w : word_limits)
    if (w < 1) throw ConfigError("config: word limits must be >= 1");
  if (unanswered_threshold < 0 || unanswered_threshold > 5)
    throw ConfigError("config: unanswered_threshold must be in 0..5");
  if (retry.max_attempts < 1) throw ConfigError("config: retry.max_attempts must be >= 1");
  std::set<std::string> import_names;
  for (const auto& imp : imports) {
    if (imp.name.empty()) throw ConfigError("config: import without a name");
    if (!import_names.insert(imp.name).second)
      throw ConfigError("config: duplicate import " + imp.name);
  }

  if (require_credentials) {
    const auto gens = generator_models();
    std::set<std::string> used(gens.begin(), gens.end());
    used.insert(judge);
    used.insert(answer_model());
    for (const auto& m : models) {
      if (!used.count(m.name)) continue;
      if (m.endpoint_url.empty())
        throw ConfigError("config: model " + m.name + " has no endpoint_url");
      if (!m.api_key_env.empty()) {
        const char* key = std::getenv(m.api_key_env.c_str());
        if (key == nullptr || *key == '\0')
          throw ConfigError("environment variable " + m.api_key_env +
                            " is not set (model " + m.name + ")");
      }
    }
  }
}

RunConfig config_from_json(const Json& j, const fs::path& base_dir) {
  try {
    RunConfig c;
    c.corpus = resolve(base_dir, j.at("corpus").get<std::string>());
    c.cache_dir = resolve(base_dir, j.at("cache_dir").get<std::string>());
    c.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
    for (const auto& m : j.at("models")) c.models.push_back(llm::model_from_json(m));
    c.judge = j.at("judge").get<std::string>();
    c.answerer = j.value("answerer", std::string{});
    c.generators = j.value("generators", std::vector<std::string>{});
    c.prompt_variants = j.value("prompt_variants", c.prompt_variants);
    c.n_contexts = j.value("n_contexts", c.n_contexts);
    c.questions_per_context = j.value("questions_per_context", c.questions_per_context);
    c.seed = j.value("seed", c.seed);
    c.min_words = j.value("min_words", c.min_words);
    c.concurrency = j.value("concurrency", c.concurrency);
    c.word_limits = j.value("word_limits", c.word_limits);
    c.unanswered_threshold = j.value("unanswered_threshold", c.unanswered_threshold);
    c.grouping = report::grouping_from_name(j.value("grouping", std::string("dataset")));
    for (const auto& imp : j.value("imports", Json::array()))
      c.imports.push_back({imp.at("name").get<std::string>(),
                           resolve(base_dir, imp.at("path").get<std::string>())});
    if (j.contains("retry")) {
      const auto& r = j["retry"];
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.base_delay = std::chrono::milliseconds(
          r.value("base_delay_ms", static_cast<long>(c.retry.base_delay.count())));
      c.retry.factor = r.value("factor", c.retry.factor);
      c.retry.jitter = r.value("jitter", c.retry.jitter);
    }
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j, path.parent_path());
}

Pipeline::Pipeline(RunConfig config, std::shared_ptr<llm::Transport> transport,
                   bool strict)
    : config_(std::move(config)), strict_(strict) {
  const bool live = transport == nullptr;
  config_.validate(live);
  if (live) transport = std::make_shared<llm::HttpTransport>();
  gateway_ = std::make_unique<llm::Gateway>(config_.models, std::move(transport),
                                            config_.cache_dir, config_.retry,
                                            config_.concurrency);
}

fs::path Pipeline::out(const std::string& name) const {
  return config_.output_dir / name;
}

void Pipeline::require(Stage producer, const std::vector<std::string>& files) const {
  for (const auto& f : files) {
    if (!fs::exists(out(f)))
      throw DependencyError("missing " + out(f).string() + "; run the '" +
                                std::string(stage_name(producer)) + "' stage first",
                            std::string(stage_name(producer)));
  }
}

void Pipeline::record(StageResult& result, const std::vector<Json>& failures) {
  result.failed = failures.size();
  const std::string name(stage_name(result.stage));
  auto stats = gateway_->stats();
  Json j = {{"stage", name},
            {"processed", result.processed},
            {"failed", result.failed},
            {"skipped", result.skipped},
            {"transport_calls", stats.transport_calls},
            {"cache_hits", stats.cache_hits},
            {"retries", stats.retries}};
  write_text_atomic(out("stats/" + name + ".json"), j.dump(2) + "\n");
  write_text_atomic(out("stats/" + name + "_failures.jsonl"), to_jsonl(failures));
  for (const auto& f : failures)
    spdlog::warn("{}: {} failed: {}", name, f.at("id").get<std::string>(),
                 f.at("error").get<std::string>());
  spdlog::info("{}: processed={} failed={} skipped={} transport_calls={} cache_hits={}",
               name, result.processed, result.failed, result.skipped,
               stats.transport_calls, stats.cache_hits);
  if (strict_ && !failures.empty())
    throw StrictModeError(name + ": " + std::to_string(failures.size()) +
                          " item(s) failed; first: " +
                          failures.front().at("error").get<std::string>());
}

std::vector<StageResult> Pipeline::run(Stage stage) {
  std::vector<StageResult> results;
  if (stage != Stage::All) {
    results.push_back(run_one(stage));
    return results;
  }
  for (auto s : kOrder) results.push_back(run_one(s));
  return results;
}

StageResult Pipeline::run_one(Stage stage) {
  gateway_->reset_stats();
  switch (stage) {
    case Stage::Ingest: return ingest();
    case Stage::Generate: return generate();
    case Stage::Classify: return classify();
    case Stage::Coverage: return coverage();
    case Stage::Answer: return answer();
    case Stage::Shorten: return shorten();
    case Stage::Report: return build_report();
    case Stage::All: break;
  }
  throw ConfigError("run_one: invalid stage");
}

StageResult Pipeline::ingest() {
  corpus::IngestOptions opts;
  opts.min_words = config_.min_words;
  opts.max_contexts = config_.n_contexts;
  opts.seed = config_.seed;
  auto units = corpus::ingest_dump(config_.corpus, opts);
  if (units.size() < config_.n_contexts)
    spdlog::warn("ingest: corpus has only {} eligible paragraphs (n_contexts={})",
                 units.size(), config_.n_contexts);

  std::vector<qgen::QuestionRecord> imported;
  std::vector<corpus::ContextUnit> imported_contexts;
  std::size_t skipped = 0;
  for (const auto& imp : config_.imports) {
    auto set = qgen::import_questions(imp.path, imp.name);
    for (const auto& q : set.questions) skipped += q.context_id ? 0 : 1;
    std::move(set.questions.begin(), set.questions.end(), std::back_inserter(imported));
    std::move(set.contexts.begin(), set.contexts.end(),
              std::back_inserter(imported_contexts));
  }
  write_rows(out(kContexts), units);
  write_rows(out(kImportedContexts), imported_contexts);
  write_rows(out(kImportedQuestions), imported);
  StageResult r{Stage::Ingest, units.size() + imported.size(), 0, skipped};
  record(r, {});
  return r;
}

StageResult Pipeline::generate() {
  require(Stage::Ingest, {kContexts, kImportedQuestions});
  const auto units = load_contexts(out(kContexts));
  auto questions = load_questions(out(kImportedQuestions));

  struct Task {
    const corpus::ContextUnit* unit;
    std::string model;
    const qgen::PromptVariant* variant;
  };
  std::vector<Task> tasks;
  for (const auto& model : config_.generator_models())
    for (const auto& v : config_.prompt_variants)
      for (const auto& u : units) tasks.push_back({&u, model, &qgen::prompt_variant(v)});

  const int n = static_cast<int>(config_.questions_per_context);
  std::vector<std::vector<qgen::QuestionRecord>> results(tasks.size());
  std::vector<std::optional<Json>> errors(tasks.size());
  parallel_for(tasks.size(), config_.concurrency, [&](std::size_t i) {
    const auto& t = tasks[i];
    try {
      results[i] = qgen::generate_questions(*gateway_, corpus::render_context(*t.unit),
                                            t.model, *t.variant, n);
    } catch (const Error& e) {
      errors[i] = failure(t.unit->id + "|" + t.model + "|" + t.variant->id, e);
    }
  });

  std::vector<Json> failures;
  StageResult r{Stage::Generate, 0, 0, 0};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (errors[i]) {
      failures.push_back(*errors[i]);
      continue;
    }
    r.processed += results[i].size();
    std::move(results[i].begin(), results[i].end(), std::back_inserter(questions));
  }
  write_rows(out(kQuestions), questions);
  record(r, failures);
  return r;
}

StageResult Pipeline::classify() {
  require(Stage::Generate, {kQuestions});
  const auto questions = load_questions(out(kQuestions));
  std::vector<std::optional<classify::TypeAssignment>> results(questions.size());
  std::vector<std::optional<Json>> errors(questions.size());
  parallel_for(questions.size(), config_.concurrency, [&](std::size_t i) {
    try {
      results[i] = classify::classify_question(*gateway_, questions[i], config_.judge);
    } catch (const Error& e) {
      errors[i] = failure(questions[i].id, e);
    }
  });
  std::vector<classify::TypeAssignment> rows;
  std::vector<Json> failures;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (results[i]) rows.push_back(std::move(*results[i]));
    if (errors[i]) failures.push_back(*errors[i]);
  }
  write_rows(out(kTypes), rows);
  StageResult r{Stage::Classify, rows.size(), 0, 0};
  record(r, failures);
  return r;
}

StageResult Pipeline::coverage() {
  require(Stage::Ingest, {kContexts, kImportedContexts});
  require(Stage::Generate, {kQuestions});
  auto units = load_contexts(out(kContexts));
  auto extra = load_contexts(out(kImportedContexts));
  std::move(extra.begin(), extra.end(), std::back_inserter(units));
  std::map<std::string, const corpus::ContextUnit*> by_id;
  for (const auto& u : units) by_id[u.id] = &u;
  const auto questions = load_questions(out(kQuestions));

  std::vector<std::optional<coverage::CoverageRecord>> results(questions.size());
  std::vector<std::optional<Json>> errors(questions.size());
  std::size_t skipped = 0;
  for (const auto& q : questions) skipped += q.context_id ? 0 : 1;
  parallel_for(questions.size(), config_.concurrency, [&](std::size_t i) {
    const auto& q = questions[i];
    if (!q.context_id) return;
    try {
      auto it = by_id.find(*q.context_id);
      if (it == by_id.end()) throw IntegrityError("unknown context " + *q.context_id);
      auto sel = coverage::select_relevant_sentences(*gateway_, q, *it->second,
                                                     config_.judge);
      auto rec = coverage::coverage_metrics(sel, *it->second);
      rec.question_id = q.id;
      results[i] = std::move(rec);
    } catch (const Error& e) {
      errors[i] = failure(q.id, e);
    }
  });
  std::vector<coverage::CoverageRecord> rows;
  std::vector<Json> failures;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (results[i]) rows.push_back(std::move(*results[i]));
    if (errors[i]) failures.push_back(*errors[i]);
  }
  write_rows(out(kCoverage), rows);
  StageResult r{Stage::Coverage, rows.size(), 0, skipped};
  record(r, failures);
  return r;
}

StageResult Pipeline::answer() {
  require(Stage::Ingest, {kContexts, kImportedContexts});
  require(Stage::Generate, {kQuestions});
  auto units = load_contexts(out(kContexts));
  auto extra = load_contexts(out(kImportedContexts));
  std::move(extra.begin(), extra.end(), std::back_inserter(units));
  std::map<std::string, corpus::RenderedContext> rendered;
  for (const auto& u : units) rendered.emplace(u.id, corpus::render_context(u));
  const auto questions = load_questions(out(kQuestions));

  struct Task {
    const qgen::QuestionRecord* question;
    const corpus::RenderedContext* context;
    answers::AnswerVariant variant;
    bool with_context;
  };
  std::vector<Task> tasks;
  std::size_t skipped = 0;
  for (const auto& q : questions) {
    if (!q.context_id) {
      ++skipped;
      continue;
    }
    auto it = rendered.find(*q.context_id);
    if (it == rendered.end())
      throw IntegrityError("question " + q.id + " references unknown context " +
                           *q.context_id);
    const auto* ctx = &it->second;
    tasks.push_back({&q, ctx, answers::AnswerVariant::base(), true});
    tasks.push_back({&q, ctx, answers::AnswerVariant::base(), false});
    if (q.is_generated()) {
      tasks.push_back({&q, ctx, answers::AnswerVariant::concise(), true});
      for (int limit : config_.word_limits)
        tasks.push_back({&q, ctx, answers::AnswerVariant::limit(limit), true});
    }
  }

  std::vector<std::optional<std::pair<answers::AnswerRecord, answers::Rating>>> results(
      tasks.size());
  std::vector<std::optional<Json>> errors(tasks.size());
  const std::string answerer = config_.answer_model();
  parallel_for(tasks.size(), config_.concurrency, [&](std::size_t i) {
    const auto& t = tasks[i];
    try {
      auto a = answers::generate_answer(*gateway_, *t.question,
                                        t.with_context ? t.context : nullptr,
                                        t.variant, answerer);
      auto rating = answers::rate_answer(*gateway_, *t.question, a, t.context,
                                         config_.judge);
      results[i].emplace(std::move(a), std::move(rating));
    } catch (const Error& e) {
      errors[i] = failure(t.question->id + "|" +
                              (t.with_context ? "with_context" : "without_context") +
                              "|" + t.variant.name(),
                          e);
    }
  });

  std::vector<Json> answer_rows, rating_rows, failures;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (results[i]) {
      answer_rows.push_back(answers::to_json(results[i]->first));
      rating_rows.push_back(answers::to_json(results[i]->first, results[i]->second));
    }
    if (errors[i]) failures.push_back(*errors[i]);
  }
  write_text_atomic(out(kAnswers), to_jsonl(answer_rows));
  write_text_atomic(out(kRatings), to_jsonl(rating_rows));
  StageResult r{Stage::Answer, answer_rows.size(), 0, skipped};
  record(r, failures);
  return r;
}

StageResult Pipeline::shorten() {
  require(Stage::Generate, {kQuestions});
  require(Stage::Answer, {kAnswers, kRatings});
  const auto questions = load_questions(out(kQuestions));
  auto answer_rows = load_rows<answers::AnswerRecord>(out(kAnswers), answers::answer_from_json);
  auto rating_rows = load_rows<report::RatingRow>(out(kRatings), report::rating_row_from_json);

  using Key = std::tuple<std::string, answers::AnswerMode, std::string>;
  std::map<Key, answers::Rating> ratings;
  for (const auto& r : rating_rows)
    ratings[{r.question_id, r.mode, r.variant.name()}] = r.rating;
  std::map<std::string, std::vector<answers::RatedAnswer>> by_question;
  for (auto& a : answer_rows) {
    if (a.mode != answers::AnswerMode::WithContext) continue;
    auto it = ratings.find({a.question_id, a.mode, a.variant.name()});
    std::optional<answers::Rating> rating;
    if (it != ratings.end()) rating = it->second;
    by_question[a.question_id].push_back({std::move(a), std::move(rating)});
  }

  std::vector<answers::ShorteningResult> rows;
  std::vector<Json> failures;
  StageResult r{Stage::Shorten, 0, 0, 0};
  for (const auto& q : questions) {
    if (!q.is_generated() || !q.context_id) {
      ++r.skipped;
      continue;
    }
    auto it = by_question.find(q.id);
    if (it == by_question.end()) {
      ++r.skipped;
      continue;
    }
    std::optional<answers::RatedAnswer> base;
    std::vector<answers::RatedAnswer> variants;
    for (const auto& ra : it->second) {
      if (ra.answer.variant == answers::AnswerVariant::base())
        base = ra;
      else if (ra.rating)
        variants.push_back(ra);
    }
    if (!base) {
      ++r.skipped;
      continue;
    }
    try {
      rows.push_back(answers::shortened_length(*base, variants));
    } catch (const Error& e) {
      failures.push_back(failure(q.id, e));
    }
  }
  write_rows(out(kShortening), rows);
  r.processed = rows.size();
  record(r, failures);
  return r;
}

StageResult Pipeline::build_report() {
  require(Stage::Ingest, {kContexts, kImportedContexts});
  require(Stage::Generate, {kQuestions});
  require(Stage::Classify, {kTypes});
  require(Stage::Coverage, {kCoverage});
  require(Stage::Answer, {kAnswers, kRatings});
  require(Stage::Shorten, {kShortening});

  report::ReportInputs in;
  in.contexts = load_contexts(out(kContexts));
  auto extra = load_contexts(out(kImportedContexts));
  std::move(extra.begin(), extra.end(), std::back_inserter(in.contexts));
  in.questions = load_questions(out(kQuestions));
  in.types = load_rows<classify::TypeAssignment>(out(kTypes), classify::assignment_from_json);
  in.coverage = load_rows<coverage::CoverageRecord>(out(kCoverage), coverage::coverage_from_json);
  in.answers = load_rows<answers::AnswerRecord>(out(kAnswers), answers::answer_from_json);
  in.ratings = load_rows<report::RatingRow>(out(kRatings), report::rating_row_from_json);
  in.shortening =
      load_rows<answers::ShorteningResult>(out(kShortening), answers::shortening_from_json);
  for (auto s : kOrder) {
    if (s == Stage::Report) continue;
    auto path = out("stats/" + std::string(stage_name(s)) + ".json");
    if (!fs::exists(path)) continue;
    auto stats = Json::parse(read_text_file(path));
    in.stage_tallies[std::string(stage_name(s))] = {
        {"failed", stats.value("failed", 0)}, {"skipped", stats.value("skipped", 0)}};
  }

  auto rep = report::build_report(in, config_.grouping, config_.unanswered_threshold);
  report::write_report(rep, out("report"));
  StageResult r{Stage::Report, in.questions.size(), 0, 0};
  record(r, {});
  return r;
}

Calibration calibrate_judge(const fs::path& annotations, const fs::path& ratings,
                            const std::optional<fs::path>& out_path) {
  std::map<std::pair<std::string, answers::AnswerMode>, int> judge;
  for (const auto& row : read_jsonl(ratings)) {
    auto r = report::rating_row_from_json(row.value);
    if (r.variant == answers::AnswerVariant::base())
      judge[{r.question_id, r.mode}] = r.rating.score;
  }
  Calibration c;
  std::vector<double> human_scores, judge_scores;
  for (const auto& row : read_jsonl(annotations)) {
    const auto& j = row.value;
    if (!j.contains("question_id") || !j.contains("human_score"))
      throw ConfigError(annotations.string() + ":" + std::to_string(row.line) +
                        ": annotation needs question_id and human_score");
    double human = j.at("human_score").get<double>();
    if (human < 0.0 || human > 5.0)
      throw ConfigError(annotations.string() + ":" + std::to_string(row.line) +
                        ": human_score must be in 0..5");
    auto mode = answers::mode_from_name(j.value("mode", std::string("with_context")));
    auto it = judge.find({j.at("question_id").get<std::string>(), mode});
    if (it == judge.end()) {
      ++c.unmatched;
      continue;
    }
    human_scores.push_back(human);
    judge_scores.push_back(static_cast<double>(it->second));
  }
  c.n_pairs = human_scores.size();
  if (c.n_pairs < 2)
    throw Error("calibrate: only " + std::to_string(c.n_pairs) +
                " annotation(s) match a judge rating; need at least 2");
  c.pearson = report::pearson(human_scores, judge_scores);
  if (out_path) {
    Json j = {{"n_pairs", c.n_pairs}, {"unmatched", c.unmatched}, {"pearson", c.pearson}};
    write_text_atomic(*out_path, j.dump(2) + "\n");
  }
  return c;
}

}  // namespace qgbench::pipeline
