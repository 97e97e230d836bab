#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qgbench/answer_eval.hpp"
#include "qgbench/classify.hpp"
#include "qgbench/corpus.hpp"
#include "qgbench/coverage.hpp"
#include "qgbench/errors.hpp"
#include "qgbench/llm_gateway.hpp"
#include "qgbench/pipeline.hpp"
#include "qgbench/question_gen.hpp"
#include "qgbench/report.hpp"

namespace py = pybind11;
using namespace qgbench;

namespace {

py::object to_python(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      return py::none();
    case Json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case Json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float:
      return py::float_(j.get<double>());
    case Json::value_t::string:
      return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_python(v));
      return out;
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
      return out;
    }
    default:
      break;
  }
  throw Error("unsupported JSON value");
}

Json from_python(const py::handle& obj) {
  auto json_mod = py::module_::import("json");
  return Json::parse(json_mod.attr("dumps")(obj).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Question-generation evaluation harness (C++ core)";

  // Translators registered later take precedence, so subclasses follow the
  // base.
  auto base_error = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());
  py::register_exception<DependencyError>(m, "DependencyError", base_error.ptr());
  py::register_exception<ParseError>(m, "ParseError", base_error.ptr());

  // corpus
  m.def("clean_text", &corpus::clean_text, py::arg("raw"));
  m.def(
      "segment_sentences",
      [](const std::string& text) {
        std::vector<std::tuple<std::size_t, std::size_t, std::string>> out;
        for (auto& s : corpus::segment_sentences(text))
          out.emplace_back(s.start, s.end, std::move(s.text));
        return out;
      },
      py::arg("text"), "Sentence spans as (start_word, end_word, text).");
  m.def(
      "ingest_dump",
      [](const std::string& dump, std::size_t min_words,
         std::optional<std::size_t> max_contexts, std::uint64_t seed) {
        std::istringstream in(dump);
        py::list out;
        for (const auto& u :
             corpus::ingest_dump(in, {min_words, max_contexts, seed}))
          out.append(to_python(corpus::to_json(u)));
        return out;
      },
      py::arg("dump"), py::arg("min_words") = 50,
      py::arg("max_contexts") = py::none(), py::arg("seed") = 0);
  m.def(
      "render_context",
      [](const py::dict& unit) {
        return corpus::render_context(corpus::context_from_json(from_python(unit)))
            .rendered;
      },
      py::arg("unit"));

  // llm_gateway
  m.def(
      "cache_key",
      [](const std::string& model, double temperature, int max_output_tokens,
         const std::string& system, const std::string& user) {
        llm::ModelSpec spec;
        spec.name = model;
        spec.temperature = temperature;
        spec.max_output_tokens = max_output_tokens;
        return llm::cache_key(spec, system, user);
      },
      py::arg("model"), py::arg("temperature"), py::arg("max_output_tokens"),
      py::arg("system"), py::arg("user"));

  // question_gen
  m.def("parse_ordered_list", &qgen::parse_ordered_list, py::arg("text"),
        py::arg("expected_n"));
  m.def("render_ordered_list", &qgen::render_ordered_list, py::arg("items"));
  m.def(
      "prompt_variant",
      [](const std::string& id, int n) { return qgen::prompt_variant(id).render(n); },
      py::arg("id"), py::arg("n"));

  // classify
  m.def(
      "extract_type_code",
      [](const std::string& reply) -> std::optional<std::string> {
        if (auto t = classify::extract_type_code(reply))
          return std::string(classify::code(*t));
        return std::nullopt;
      },
      py::arg("reply"));
  m.def(
      "type_distribution",
      [](const std::vector<std::string>& codes) {
        std::vector<classify::TypeAssignment> as;
        for (const auto& c : codes) {
          auto t = classify::type_from_code(c);
          if (!t) throw ConfigError("unknown type code " + c);
          as.push_back({"", *t, ""});
        }
        auto dist = classify::type_distribution(as);
        py::dict out;
        for (std::size_t i = 0; i < classify::kTypeCount; ++i)
          out[py::str(std::string(classify::code(classify::kAllTypes[i])))] = dist[i];
        return out;
      },
      py::arg("codes"));

  // coverage
  m.def("parse_sentence_selection", &coverage::parse_sentence_selection,
        py::arg("reply"), py::arg("n_sentences"));
  m.def(
      "coverage_metrics",
      [](const std::vector<std::size_t>& selected, const py::dict& unit) {
        auto rec = coverage::coverage_metrics(
            selected, corpus::context_from_json(from_python(unit)));
        return to_python(coverage::to_json(rec));
      },
      py::arg("selected"), py::arg("unit"));
  m.def(
      "bucket_frequencies",
      [](const std::vector<std::vector<std::size_t>>& touched) {
        std::vector<coverage::CoverageRecord> recs(touched.size());
        for (std::size_t i = 0; i < touched.size(); ++i)
          for (auto b : touched[i]) recs[i].buckets_touched.set(b);
        auto f = coverage::bucket_frequencies(recs);
        return std::vector<double>(f.begin(), f.end());
      },
      py::arg("buckets_touched"));

  // answer_eval
  m.def(
      "parse_rating",
      [](const std::string& reply) -> std::optional<std::pair<int, std::string>> {
        if (auto r = answers::parse_rating(reply))
          return std::make_pair(r->score, r->justification);
        return std::nullopt;
      },
      py::arg("reply"));
  m.def(
      "shortened_length",
      [](std::size_t base_len, int base_score,
         const std::vector<std::tuple<std::string, std::size_t, int>>& variants) {
        answers::RatedAnswer base{{"q", answers::AnswerMode::WithContext,
                                   answers::AnswerVariant::base(), "", base_len},
                                  answers::Rating{base_score, ""}};
        std::vector<answers::RatedAnswer> vs;
        for (const auto& [name, len, score] : variants)
          vs.push_back({{"q", answers::AnswerMode::WithContext,
                         answers::AnswerVariant::parse(name), "", len},
                        answers::Rating{score, ""}});
        auto r = answers::shortened_length(base, vs);
        return std::make_pair(r.shortened_len, r.chosen_variant.name());
      },
      py::arg("base_len"), py::arg("base_score"), py::arg("variants"),
      "Returns (shortened_len, chosen_variant).");
  m.def(
      "answerability_histogram",
      [](const std::vector<int>& scores, int threshold) {
        std::vector<answers::Rating> rs;
        for (int s : scores) rs.push_back({s, ""});
        auto h = answers::answerability_histogram(rs, threshold);
        py::dict out;
        out["pct"] = std::vector<double>(h.pct.begin(), h.pct.end());
        out["unanswered_share"] = h.unanswered_share;
        out["n"] = h.n;
        return out;
      },
      py::arg("scores"), py::arg("unanswered_threshold") = 2);

  // report
  m.def(
      "mean_std",
      [](const std::vector<double>& v) {
        auto ms = report::mean_std(v);
        return std::make_pair(ms.mean, ms.std);
      },
      py::arg("values"));
  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return report::pearson(x, y);
      },
      py::arg("x"), py::arg("y"));

  // pipeline
  m.def(
      "run_stage",
      [](const std::filesystem::path& config, const std::string& stage,
         std::optional<std::filesystem::path> mock, bool strict) {
        auto cfg = pipeline::load_config(config);
        std::shared_ptr<llm::Transport> transport;
        std::shared_ptr<llm::MockTransport> mock_transport;
        if (mock) {
          mock_transport = llm::MockTransport::from_file(*mock);
          transport = mock_transport;
        }
        std::vector<pipeline::StageResult> results;
        {
          py::gil_scoped_release release;
          pipeline::Pipeline pipe(std::move(cfg), transport, strict);
          results = pipe.run(pipeline::stage_from_name(stage));
        }
        py::list out;
        for (const auto& r : results) {
          py::dict d;
          d["stage"] = std::string(pipeline::stage_name(r.stage));
          d["processed"] = r.processed;
          d["failed"] = r.failed;
          d["skipped"] = r.skipped;
          out.append(d);
        }
        return out;
      },
      py::arg("config"), py::arg("stage") = "all", py::arg("mock") = py::none(),
      py::arg("strict") = false);
  m.def(
      "calibrate_judge",
      [](const std::filesystem::path& annotations, const std::filesystem::path& ratings,
         std::optional<std::filesystem::path> out) {
        auto c = pipeline::calibrate_judge(annotations, ratings, out);
        py::dict d;
        d["n_pairs"] = c.n_pairs;
        d["unmatched"] = c.unmatched;
        d["pearson"] = c.pearson;
        return d;
      },
      py::arg("annotations"), py::arg("ratings"), py::arg("out") = py::none());
}
