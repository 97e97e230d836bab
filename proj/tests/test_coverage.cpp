#include <gtest/gtest.h>

#include <random>

#include "qgbench/coverage.hpp"
#include "qgbench/errors.hpp"

using namespace qgbench;
using namespace qgbench::coverage;

namespace {

// Unit whose sentences have the given word lengths; words are "w<i>".
corpus::ContextUnit unit_with(const std::vector<std::size_t>& lengths) {
  corpus::ContextUnit u;
  u.id = "c";
  u.doc_title = "Doc";
  std::size_t pos = 0;
  for (std::size_t len : lengths) {
    corpus::SentenceSpan s{pos, pos + len, ""};
    for (std::size_t w = pos; w < pos + len; ++w) {
      if (w > pos) s.text += ' ';
      s.text += "w" + std::to_string(w);
    }
    if (!u.text.empty()) u.text += ' ';
    u.text += s.text;
    u.sentences.push_back(std::move(s));
    pos += len;
  }
  u.word_count = pos;
  return u;
}

// Oracle: bucket every word of a sentence, then fill the gaps between its
// lowest and highest bucket (short contexts leave buckets without words).
BucketSet enumerate_buckets(const std::vector<std::size_t>& selected,
                            const corpus::ContextUnit& u) {
  BucketSet b;
  for (std::size_t idx : selected) {
    const auto& s = u.sentences[idx - 1];
    std::size_t lo = 9, hi = 0;
    for (std::size_t w = s.start; w < s.end; ++w) {
      std::size_t k = std::min<std::size_t>(9, 10 * w / u.word_count);
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
    for (std::size_t k = lo; k <= hi; ++k) b.set(k);
  }
  return b;
}

CoverageRecord touching(std::initializer_list<std::size_t> buckets) {
  CoverageRecord r;
  for (auto b : buckets) r.buckets_touched.set(b);
  return r;
}

}  // namespace

TEST(Selection, Parse) {
  EXPECT_EQ(parse_sentence_selection("1,3", 5), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(parse_sentence_selection("2, 2, 4", 5), (std::vector<std::size_t>{2, 4}));
  EXPECT_EQ(parse_sentence_selection("\n 4 ,1\nextra", 5), (std::vector<std::size_t>{1, 4}));
  EXPECT_FALSE(parse_sentence_selection("0,3", 5).has_value());
  EXPECT_FALSE(parse_sentence_selection("6", 5).has_value());
  EXPECT_FALSE(parse_sentence_selection("1, x", 5).has_value());
  EXPECT_FALSE(parse_sentence_selection("", 5).has_value());
  EXPECT_FALSE(parse_sentence_selection("1,,2", 5).has_value());
  EXPECT_FALSE(parse_sentence_selection("-1", 5).has_value());
}

TEST(Selection, UserPromptListsSentences) {
  auto u = unit_with({2, 3});
  EXPECT_EQ(coverage_user_prompt(u, "Q?"),
            "Context sentences:\n1. w0 w1\n2. w2 w3 w4\n\nQuestion: Q?");
  EXPECT_NE(coverage_system_prompt().find("comma-separated list on a single line"),
            std::string::npos);
}

TEST(Selection, JudgeRetryAndShortCircuit) {
  llm::ModelSpec judge;
  judge.name = "j";
  judge.endpoint_url = "http://localhost:1/v1";
  qgen::QuestionRecord q{"q", "c", qgen::Generated{"m", "v1"}, "Q?", 1, std::nullopt};

  auto retry = std::make_shared<llm::MockTransport>(std::vector<llm::MockTransport::Entry>{
      {"", "between 1 and 5", "3", 200, std::nullopt},
      {"", "", "0,3", 200, std::nullopt}});
  llm::Gateway gw({judge}, retry);
  EXPECT_EQ(select_relevant_sentences(gw, q, unit_with({1, 1, 1, 1, 1}), "j"),
            std::vector<std::size_t>{3});
  EXPECT_EQ(retry->calls(), 2u);

  auto never = std::make_shared<llm::MockTransport>(std::vector<llm::MockTransport::Entry>{
      {"", "", "0,3", 200, std::nullopt}});
  llm::Gateway bad({judge}, never);
  EXPECT_THROW(select_relevant_sentences(bad, q, unit_with({1, 1, 1, 1, 1}), "j"),
               CoverageParseError);

  auto unused = std::make_shared<llm::MockTransport>(std::vector<llm::MockTransport::Entry>{});
  llm::Gateway none({judge}, unused);
  EXPECT_EQ(select_relevant_sentences(none, q, unit_with({7}), "j"),
            std::vector<std::size_t>{1});
  EXPECT_EQ(unused->calls(), 0u);
}

TEST(Metrics, Examples) {
  auto four = unit_with({5, 5, 5, 5});
  auto r = coverage_metrics({1}, four);
  EXPECT_DOUBLE_EQ(r.pct_covered_sentences, 25.0);
  EXPECT_DOUBLE_EQ(r.pct_covered_words, 25.0);

  auto hundred = unit_with({10, 90});
  EXPECT_EQ(coverage_metrics({1}, hundred).buckets_touched, BucketSet("0000000001"));

  auto spans = unit_with({5, 20, 75});
  auto mid = coverage_metrics({2}, spans);
  EXPECT_EQ(mid.buckets_touched, enumerate_buckets({2}, spans));
  EXPECT_EQ(mid.buckets_touched, BucketSet("0000000111"));
  EXPECT_DOUBLE_EQ(mid.pct_covered_words, 20.0);

  auto single = unit_with({9});
  auto s = coverage_metrics({1}, single);
  EXPECT_DOUBLE_EQ(s.pct_covered_sentences, 100.0);
  EXPECT_DOUBLE_EQ(s.pct_covered_words, 100.0);

  EXPECT_THROW(coverage_metrics({}, four), Error);
  EXPECT_THROW(coverage_metrics({5}, four), Error);
}

TEST(Metrics, BucketOf) {
  EXPECT_EQ(bucket_of(0, 100), 0u);
  EXPECT_EQ(bucket_of(9, 100), 0u);
  EXPECT_EQ(bucket_of(10, 100), 1u);
  EXPECT_EQ(bucket_of(99, 100), 9u);
  EXPECT_EQ(bucket_of(2, 3), 6u);
  EXPECT_EQ(bucket_of(0, 1), 0u);
}

TEST(Metrics, RandomizedInvariants) {
  std::mt19937 rng(17);
  for (int iter = 0; iter < 2000; ++iter) {
    std::vector<std::size_t> lengths(1 + rng() % 12);
    for (auto& l : lengths) l = 1 + rng() % 30;
    auto u = unit_with(lengths);
    std::vector<std::size_t> selected;
    for (std::size_t i = 1; i <= lengths.size(); ++i)
      if (rng() % 2) selected.push_back(i);
    if (selected.empty()) selected.push_back(1 + rng() % lengths.size());

    auto r = coverage_metrics(selected, u);
    EXPECT_GT(r.pct_covered_sentences, 0.0);
    EXPECT_LE(r.pct_covered_sentences, 100.0);
    EXPECT_GT(r.pct_covered_words, 0.0);
    EXPECT_LE(r.pct_covered_words, 100.0);
    EXPECT_EQ(r.buckets_touched, enumerate_buckets(selected, u));

    std::vector<std::size_t> all(lengths.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i + 1;
    BucketSet nonempty;
    for (std::size_t w = 0; w < u.word_count; ++w)
      nonempty.set(std::min<std::size_t>(9, 10 * w / u.word_count));
    auto full = coverage_metrics(all, u);
    EXPECT_EQ((full.buckets_touched & nonempty), nonempty);
    if (u.word_count >= 10) EXPECT_TRUE(full.buckets_touched.all());
    EXPECT_DOUBLE_EQ(full.pct_covered_words, 100.0);
  }
}

TEST(Frequencies, Examples) {
  auto f = bucket_frequencies({touching({0}), touching({0, 9})});
  EXPECT_DOUBLE_EQ(f[0], 100.0);
  EXPECT_DOUBLE_EQ(f[9], 50.0);
  for (std::size_t b = 1; b < 9; ++b) EXPECT_DOUBLE_EQ(f[b], 0.0);

  auto sat = bucket_frequencies({touching({0, 1, 2, 3, 4, 5, 6, 7, 8, 9})});
  for (double v : sat) EXPECT_DOUBLE_EQ(v, 100.0);

  std::vector<CoverageRecord> own;
  for (std::size_t b = 0; b < 10; ++b) own.push_back(touching({b}));
  for (double v : bucket_frequencies(own)) EXPECT_DOUBLE_EQ(v, 10.0);

  EXPECT_THROW(bucket_frequencies({}), Error);
}

TEST(Frequencies, TwoComputationsAgree) {
  std::mt19937 rng(23);
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<CoverageRecord> records(1 + rng() % 40);
    for (auto& r : records) r.buckets_touched = BucketSet(rng() % 1024);
    // Per-bucket counting.
    std::array<double, kBuckets> oracle{};
    for (std::size_t b = 0; b < kBuckets; ++b) {
      std::size_t hits = 0;
      for (const auto& r : records) hits += r.buckets_touched.test(b);
      oracle[b] = 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
    }
    auto got = bucket_frequencies(records);
    for (std::size_t b = 0; b < kBuckets; ++b) {
      EXPECT_EQ(got[b], oracle[b]);
      EXPECT_GE(got[b], 0.0);
      EXPECT_LE(got[b], 100.0);
    }
  }
}

TEST(CoverageJson, RoundTrip) {
  auto u = unit_with({3, 4, 5});
  auto r = coverage_metrics({1, 3}, u);
  r.question_id = "q1";
  auto back = coverage_from_json(to_json(r));
  EXPECT_EQ(back.question_id, "q1");
  EXPECT_EQ(back.selected_sentences, r.selected_sentences);
  EXPECT_EQ(back.buckets_touched, r.buckets_touched);
  EXPECT_DOUBLE_EQ(back.pct_covered_words, r.pct_covered_words);
}
