#include "qgbench/question_gen.hpp"

#include <cstdio>
#include <fstream>

#include "qgbench/errors.hpp"
#include "qgbench/text.hpp"

namespace qgbench::qgen {
namespace {

struct Marker {
  std::size_t index;
  std::string rest;
};

std::optional<Marker> parse_marker(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && text::is_space(line[i])) ++i;
  std::size_t digits_start = i;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  std::size_t ndigits = i - digits_start;
  if (ndigits == 0 || ndigits > 6 || i >= line.size()) return std::nullopt;
  if (line[i] != '.' && line[i] != ')' && line[i] != ':') return std::nullopt;
  ++i;
  if (i < line.size() && !text::is_space(line[i])) return std::nullopt;
  return Marker{std::stoul(std::string(line.substr(digits_start, ndigits))),
                std::string(text::trim(line.substr(i)))};
}

std::string replace_all(std::string s, std::string_view from,
                        std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

std::string PromptVariant::render(int n) const {
  return replace_all(templ, "[N]", std::to_string(n));
}

const std::vector<PromptVariant>& prompt_variants() {
  static const std::vector<PromptVariant> kVariants = {
      {"v1",
       "Generate [N] self-contained questions based on the following content "
       "in an ordered list."},
      {"v2", "Create [N] questions based on the following content in an "
             "ordered list."},
      {"v3",
       "Reference exclusively the content below to craft [N] independent "
       "questions. Format your output as an ordered list."},
  };
  return kVariants;
}

const PromptVariant& prompt_variant(std::string_view id) {
  for (const auto& v : prompt_variants())
    if (v.id == id) return v;
  throw ConfigError("unknown prompt variant '" + std::string(id) +
                    "' (expected v1, v2 or v3)");
}

std::vector<std::string> parse_ordered_list(std::string_view reply,
                                            std::size_t expected_n) {
  std::vector<Marker> items;
  bool open = false;
  for (const auto& line : text::split_lines(reply)) {
    if (auto m = parse_marker(line)) {
      items.push_back(std::move(*m));
      open = true;
      continue;
    }
    auto trimmed = text::trim(line);
    if (trimmed.empty()) {
      open = false;
    } else if (open) {
      auto& item = items.back().rest;
      if (!item.empty()) item += ' ';
      item += trimmed;
    }
  }
  if (items.empty())
    throw ParseError("no ordered-list markers found", std::string(reply));
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].index != i + 1)
      throw ParseError("non-monotonic numbering: item " + std::to_string(i + 1) +
                           " is numbered " + std::to_string(items[i].index),
                       std::string(reply));
  }
  if (items.size() != expected_n)
    throw ParseError("expected " + std::to_string(expected_n) +
                         " items, found " + std::to_string(items.size()),
                     std::string(reply));
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& item : items) {
    if (item.rest.empty())
      throw ParseError("item " + std::to_string(item.index) + " is empty",
                       std::string(reply));
    out.push_back(std::move(item.rest));
  }
  return out;
}

std::string render_ordered_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + items[i];
  }
  return out;
}

std::string question_id(const std::string& context_id, const std::string& model,
                        const std::string& variant, std::size_t ordinal) {
  return context_id + "|" + model + "|" + variant + "|q" +
         std::to_string(ordinal);
}

std::vector<QuestionRecord> generate_questions(
    llm::Gateway& gateway, const corpus::RenderedContext& context,
    const std::string& model, const PromptVariant& variant, int n) {
  if (n < 1) throw ConfigError("questions per context must be >= 1");
  llm::ChatRequest req{model, variant.render(n), context.rendered};
  auto reply = gateway.complete(req);
  std::vector<std::string> items;
  try {
    items = parse_ordered_list(reply.text, static_cast<std::size_t>(n));
  } catch (const ParseError&) {
    req.system += " " + replace_all(std::string(kExactCountSuffix), "[n]",
                                    std::to_string(n));
    reply = gateway.complete(req);
    try {
      items = parse_ordered_list(reply.text, static_cast<std::size_t>(n));
    } catch (const ParseError& e) {
      throw GenerationParseError(
          "generation for " + context.context_id + " (" + model + ", " +
              variant.id + "): " + e.what(),
          reply.text);
    }
  }
  std::vector<QuestionRecord> records;
  records.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    QuestionRecord q;
    q.id = question_id(context.context_id, model, variant.id, i + 1);
    q.context_id = context.context_id;
    q.source = Generated{model, variant.id};
    q.word_count = text::word_count(items[i]);
    q.text = std::move(items[i]);
    records.push_back(std::move(q));
  }
  return records;
}

Json to_json(const QuestionRecord& q) {
  Json source;
  if (const auto* g = std::get_if<Generated>(&q.source))
    source = {{"generated", {{"model", g->model}, {"prompt_variant", g->prompt_variant}}}};
  else
    source = {{"imported", std::get<Imported>(q.source).dataset}};
  Json j = {{"id", q.id},
            {"context_id", q.context_id ? Json(*q.context_id) : Json(nullptr)},
            {"source", std::move(source)},
            {"text", q.text},
            {"word_count", q.word_count}};
  if (q.golden_answer) j["golden_answer"] = *q.golden_answer;
  return j;
}

QuestionRecord question_from_json(const Json& j) {
  QuestionRecord q;
  q.id = j.at("id").get<std::string>();
  if (!j.at("context_id").is_null())
    q.context_id = j.at("context_id").get<std::string>();
  const auto& source = j.at("source");
  if (source.contains("generated")) {
    const auto& g = source.at("generated");
    q.source = Generated{g.at("model").get<std::string>(),
                         g.at("prompt_variant").get<std::string>()};
  } else {
    q.source = Imported{source.at("imported").get<std::string>()};
  }
  q.text = j.at("text").get<std::string>();
  q.word_count = j.at("word_count").get<std::size_t>();
  if (j.contains("golden_answer") && !j["golden_answer"].is_null())
    q.golden_answer = j["golden_answer"].get<std::string>();
  return q;
}

ImportedSet import_questions(const std::filesystem::path& path,
                             const std::string& dataset_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open import file " + path.string());
  ImportedSet set;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw ImportError(path.string() + ":" + std::to_string(lineno) + ": " + why,
                      lineno);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      fail("malformed JSON");
    }
    if (!j.is_object()) fail("expected a JSON object");
    if (!j.contains("question") || !j["question"].is_string())
      fail("missing string field \"question\"");
    std::string question = text::normalize_whitespace(j["question"].get<std::string>());
    if (question.empty()) fail("empty question");
    for (const char* field : {"context", "golden_answer"}) {
      if (j.contains(field) && !j[field].is_null() && !j[field].is_string())
        fail(std::string("field \"") + field + "\" must be a string");
    }

    char ordinal[16];
    std::snprintf(ordinal, sizeof ordinal, "%06zu", set.questions.size() + 1);
    QuestionRecord q;
    q.id = dataset_name + "-" + ordinal;
    q.source = Imported{dataset_name};
    q.word_count = text::word_count(question);
    q.text = std::move(question);
    if (j.contains("golden_answer") && j["golden_answer"].is_string())
      q.golden_answer = j["golden_answer"].get<std::string>();
    if (j.contains("context") && j["context"].is_string()) {
      auto cleaned = corpus::clean_text(j["context"].get<std::string>());
      if (!cleaned.empty()) {
        auto unit = corpus::make_unit(dataset_name + "-ctx-" + ordinal,
                                      dataset_name, {}, cleaned);
        q.context_id = unit.id;
        set.contexts.push_back(std::move(unit));
      }
    }
    set.questions.push_back(std::move(q));
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  return set;
}

}  // namespace qgbench::qgen
