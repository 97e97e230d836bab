#include "qgbench/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <random>
#include <regex>

#include "qgbench/errors.hpp"
#include "qgbench/text.hpp"

namespace qgbench::corpus {
namespace {

struct Heading {
  std::size_t depth = 0;
  std::string title;
};

std::optional<Heading> parse_heading(std::string_view line) {
  line = text::trim(line);
  if (line.size() < 3 || line.front() != '=' || line.back() != '=')
    return std::nullopt;
  Heading h;
  std::size_t i = 0;
  while (i < line.size() && (line[i] == '=' || line[i] == ' ')) {
    if (line[i] == '=') ++h.depth;
    ++i;
  }
  std::size_t j = line.size();
  while (j > i && (line[j - 1] == '=' || line[j - 1] == ' ')) --j;
  if (j <= i) return std::nullopt;
  h.title = clean_text(line.substr(i, j - i));
  return h;
}

std::string make_id(std::size_t doc, std::size_t para) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "d%06zu-p%04zu", doc, para);
  return buf;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

constexpr std::string_view kRightDoubleQuote = "\xE2\x80\x9D";
constexpr std::string_view kRightSingleQuote = "\xE2\x80\x99";
constexpr std::string_view kLeftDoubleQuote = "\xE2\x80\x9C";
constexpr std::string_view kLeftSingleQuote = "\xE2\x80\x98";

std::string_view strip_closers(std::string_view w) {
  for (;;) {
    if (!w.empty() && (w.back() == '"' || w.back() == '\'' ||
                       w.back() == ')' || w.back() == ']')) {
      w.remove_suffix(1);
    } else if (ends_with(w, kRightDoubleQuote) ||
               ends_with(w, kRightSingleQuote)) {
      w.remove_suffix(3);
    } else {
      return w;
    }
  }
}

std::string_view strip_openers(std::string_view w) {
  for (;;) {
    if (!w.empty() && (w.front() == '"' || w.front() == '\'' ||
                       w.front() == '(' || w.front() == '[')) {
      w.remove_prefix(1);
    } else if (starts_with(w, kLeftDoubleQuote) ||
               starts_with(w, kLeftSingleQuote)) {
      w.remove_prefix(3);
    } else {
      return w;
    }
  }
}

bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }

bool ends_sentence(std::string_view word) {
  std::string_view core = strip_closers(word);
  if (core.empty()) return false;
  char last = core.back();
  if (last != '.' && last != '!' && last != '?') return false;
  if (last == '.') {
    std::string_view stem = strip_openers(core.substr(0, core.size() - 1));
    if (stem.size() == 1 && is_upper_ascii(stem[0])) return false;
  }
  return true;
}

bool starts_sentence(std::string_view word) {
  if (word.empty()) return false;
  auto c = static_cast<unsigned char>(word[0]);
  if (is_upper_ascii(word[0]) || (c >= '0' && c <= '9')) return true;
  if (word[0] == '"' || word[0] == '\'') return true;
  if (starts_with(word, kLeftDoubleQuote) || starts_with(word, kLeftSingleQuote))
    return true;
  // Latin-1 supplement capitals (U+00C0..U+00DE, except U+00D7) in UTF-8.
  if (c == 0xC3 && word.size() >= 2) {
    auto d = static_cast<unsigned char>(word[1]);
    return d >= 0x80 && d <= 0x9E && d != 0x97;
  }
  return false;
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection sampling; std::uniform_int_distribution is not portable.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace

std::string clean_text(std::string_view raw) {
  static const std::regex kEscape(R"(\s*@([-.,])@\s*)");
  std::string s(raw);
  s = std::regex_replace(s, kEscape, "$1");
  return text::normalize_whitespace(s);
}

std::vector<SentenceSpan> segment_sentences(std::string_view text_in) {
  auto words = text::split_words(text_in);
  if (words.empty()) throw Error("segment_sentences: empty text");
  std::vector<SentenceSpan> spans;
  std::size_t start = 0;
  auto close = [&](std::size_t end) {
    std::vector<std::string> part(words.begin() + static_cast<long>(start),
                                  words.begin() + static_cast<long>(end));
    spans.push_back({start, end, text::join(part, " ")});
    start = end;
  };
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    if (ends_sentence(words[i]) && starts_sentence(words[i + 1])) close(i + 1);
  }
  close(words.size());
  return spans;
}

ContextUnit make_unit(std::string id, std::string doc_title,
                      std::vector<std::string> section_path,
                      std::string_view raw_text) {
  ContextUnit unit;
  unit.id = std::move(id);
  unit.doc_title = std::move(doc_title);
  unit.section_path = std::move(section_path);
  unit.text = clean_text(raw_text);
  unit.sentences = segment_sentences(unit.text);
  unit.word_count = text::word_count(unit.text);
  return unit;
}

std::vector<ContextUnit> ingest_dump(std::istream& dump,
                                     const IngestOptions& options) {
  if (!dump.good()) throw IoError("ingest_dump: unreadable stream");

  std::vector<ContextUnit> units;
  std::string doc_title;
  std::vector<std::string> path;
  std::size_t doc = 0;
  std::size_t para = 0;
  std::vector<std::string> block;

  auto flush = [&] {
    if (block.empty()) return;
    std::string cleaned = clean_text(text::join(block, " "));
    block.clear();
    if (cleaned.empty()) return;
    std::size_t ordinal = para++;
    if (text::word_count(cleaned) < options.min_words) return;
    units.push_back(make_unit(make_id(doc, ordinal), doc_title, path, cleaned));
  };

  std::string line;
  while (std::getline(dump, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (auto h = parse_heading(line)) {
      flush();
      if (h->depth <= 1) {
        ++doc;
        para = 0;
        doc_title = h->title;
        path.clear();
      } else {
        if (path.size() > h->depth - 2) path.resize(h->depth - 2);
        path.push_back(h->title);
      }
      continue;
    }
    block.push_back(line);
  }
  if (dump.bad()) throw IoError("ingest_dump: read error");
  flush();

  if (units.empty())
    throw EmptyCorpusError("no paragraph has at least " +
                           std::to_string(options.min_words) + " words");

  if (options.max_contexts && *options.max_contexts < units.size()) {
    std::vector<ContextUnit> picked;
    for (std::size_t i :
         sample_indices(units.size(), *options.max_contexts, options.seed))
      picked.push_back(std::move(units[i]));
    if (picked.empty())
      throw EmptyCorpusError("max_contexts=0 leaves an empty corpus");
    units = std::move(picked);
  }
  return units;
}

std::vector<ContextUnit> ingest_dump(const std::filesystem::path& file,
                                     const IngestOptions& options) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + file.string());
  return ingest_dump(in, options);
}

RenderedContext render_context(const ContextUnit& unit) {
  std::string trailer = "Section: " + unit.doc_title;
  for (const auto& s : unit.section_path) trailer += " > " + s;
  return {unit.id, unit.text + "\n" + trailer};
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k >= n) return idx;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(bounded(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Json to_json(const ContextUnit& unit) {
  Json sentences = Json::array();
  for (const auto& s : unit.sentences)
    sentences.push_back({{"start", s.start}, {"end", s.end}, {"text", s.text}});
  return {{"id", unit.id},
          {"doc_title", unit.doc_title},
          {"section_path", unit.section_path},
          {"text", unit.text},
          {"sentences", std::move(sentences)},
          {"word_count", unit.word_count}};
}

ContextUnit context_from_json(const Json& j) {
  ContextUnit unit;
  unit.id = j.at("id").get<std::string>();
  unit.doc_title = j.at("doc_title").get<std::string>();
  unit.section_path = j.at("section_path").get<std::vector<std::string>>();
  unit.text = j.at("text").get<std::string>();
  for (const auto& s : j.at("sentences"))
    unit.sentences.push_back({s.at("start").get<std::size_t>(),
                              s.at("end").get<std::size_t>(),
                              s.at("text").get<std::string>()});
  unit.word_count = j.at("word_count").get<std::size_t>();
  return unit;
}

}  // namespace qgbench::corpus
