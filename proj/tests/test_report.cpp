#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "qgbench/errors.hpp"
#include "qgbench/report.hpp"
#include "test_support.hpp"

using namespace qgbench;
using namespace qgbench::report;

namespace {

MeanStd two_pass(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

// Closed-form Pearson over raw sums.
double closed_form_r(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

std::vector<double> random_vector(std::mt19937& rng, std::size_t n) {
  std::normal_distribution<double> dist(10.0, 25.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

ReportInputs sample_inputs() {
  using answers::AnswerMode;
  using answers::AnswerVariant;
  ReportInputs in;
  in.contexts.push_back(corpus::make_unit("c1", "Doc", {}, "One two three. Four five six. Seven."));
  for (const char* variant : {"v1", "v2"}) {
    for (int k = 1; k <= 2; ++k) {
      std::string id = std::string("c1|gen|") + variant + "|q" + std::to_string(k);
      in.questions.push_back({id, "c1", qgen::Generated{"gen", variant},
                              "What is number " + std::to_string(k) + "?", 4,
                              std::nullopt});
      in.types.push_back({id, k == 1 ? classify::QuestionType::T5
                                     : classify::QuestionType::T8, "T"});
      auto cov = coverage::coverage_metrics({static_cast<std::size_t>(k)}, in.contexts[0]);
      cov.question_id = id;
      in.coverage.push_back(cov);
      answers::AnswerRecord base{id, AnswerMode::WithContext, AnswerVariant::base(),
                                 "one two three four", 4};
      answers::AnswerRecord bare{id, AnswerMode::WithoutContext, AnswerVariant::base(),
                                 "no idea", 2};
      answers::AnswerRecord lim{id, AnswerMode::WithContext, AnswerVariant::limit(1),
                                "one", 1};
      in.answers.insert(in.answers.end(), {base, bare, lim});
      in.ratings.push_back({id, AnswerMode::WithContext, AnswerVariant::base(), {4, ""}});
      in.ratings.push_back({id, AnswerMode::WithoutContext, AnswerVariant::base(),
                            {k == 1 ? 1 : 5, ""}});
      in.ratings.push_back({id, AnswerMode::WithContext, AnswerVariant::limit(1), {4, ""}});
      in.shortening.push_back({id, 4, 1, AnswerVariant::limit(1)});
    }
  }
  in.questions.push_back({"trivia-000001", std::nullopt, qgen::Imported{"trivia"},
                          "Who wrote it?", 3, "Ann Smith"});
  in.types.push_back({"trivia-000001", classify::QuestionType::T1, "T1"});
  return in;
}

}  // namespace

TEST(MeanStd, Examples) {
  std::vector<double> same = {5, 5, 5};
  auto a = mean_std(same);
  EXPECT_DOUBLE_EQ(a.mean, 5.0);
  EXPECT_DOUBLE_EQ(a.std, 0.0);
  std::vector<double> two = {1, 3};
  auto b = mean_std(two);
  EXPECT_DOUBLE_EQ(b.mean, 2.0);
  EXPECT_NEAR(b.std, std::sqrt(2.0), 1e-12);
  std::vector<double> one = {7};
  EXPECT_DOUBLE_EQ(mean_std(one).std, 0.0);
  EXPECT_THROW(mean_std(std::vector<double>{}), Error);
}

TEST(MeanStd, MatchesTwoPassOracle) {
  std::mt19937 rng(2024);
  for (int iter = 0; iter < 100; ++iter) {
    auto v = random_vector(rng, 1 + rng() % 200);
    auto got = mean_std(v);
    auto want = two_pass(v);
    EXPECT_NEAR(got.mean, want.mean, 1e-9);
    EXPECT_NEAR(got.std, want.std, 1e-9);
  }
}

TEST(Pearson, Examples) {
  std::vector<double> x = {1, 2, 3}, y = {1, 2, 4};
  EXPECT_NEAR(pearson(x, x), 1.0, 1e-12);
  std::vector<double> neg = {-1, -2, -3};
  EXPECT_NEAR(pearson(x, neg), -1.0, 1e-12);
  EXPECT_NEAR(pearson(x, y), closed_form_r(x, y), 1e-12);
  EXPECT_NEAR(pearson(x, y), 0.98198, 1e-5);
}

TEST(Pearson, Errors) {
  std::vector<double> x = {1, 2, 3}, flat = {2, 2, 2}, shorter = {1, 2};
  std::vector<double> one = {1};
  EXPECT_THROW(pearson(x, shorter), Error);
  EXPECT_THROW(pearson(x, flat), Error);
  EXPECT_THROW(pearson(one, one), Error);
}

TEST(Pearson, AffineInvarianceAndOracle) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> coef(0.1, 10.0);
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t n = 2 + rng() % 50;
    auto x = random_vector(rng, n);
    auto y = random_vector(rng, n);
    double r = pearson(x, y);
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
    EXPECT_NEAR(r, closed_form_r(x, y), 1e-9);
    double a = coef(rng), b = coef(rng) - 5.0;
    std::vector<double> pos(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      pos[i] = a * x[i] + b;
      neg[i] = -a * x[i] + b;
    }
    EXPECT_NEAR(pearson(pos, y), r, 1e-9);
    EXPECT_NEAR(pearson(neg, y), -r, 1e-9);
  }
}

TEST(Format, OneDecimal) {
  EXPECT_EQ(fmt1(16.74), "16.7");
  EXPECT_EQ(fmt1(-0.01), "0.0");
  EXPECT_EQ(fmt1(100.0), "100.0");
}

TEST(Format, RoundPercentagesKeepsTotal) {
  std::vector<double> thirds = {100.0 / 3, 100.0 / 3, 100.0 / 3};
  auto r = round_percentages(thirds);
  EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 100.0, 1e-9);
  std::mt19937 rng(4);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<int> counts(11);
    int n = 1 + static_cast<int>(rng() % 97);
    for (int k = 0; k < n; ++k) ++counts[rng() % 11];
    std::vector<double> pct;
    for (int c : counts) pct.push_back(100.0 * c / n);
    auto rounded = round_percentages(pct);
    EXPECT_NEAR(std::accumulate(rounded.begin(), rounded.end(), 0.0), 100.0, 0.05);
    for (std::size_t i = 0; i < pct.size(); ++i) EXPECT_LE(std::abs(rounded[i] - pct[i]), 0.1);
  }
}

TEST(Labels, Grouping) {
  qgen::QuestionRecord g{"q", "c", qgen::Generated{"gpt-4o", "v2"}, "Q", 1, std::nullopt};
  qgen::QuestionRecord i{"q", std::nullopt, qgen::Imported{"hotpot"}, "Q", 1, std::nullopt};
  EXPECT_EQ(dataset_label(g, Grouping::Dataset), "gpt-4o@v2");
  EXPECT_EQ(dataset_label(g, Grouping::Model), "gpt-4o");
  EXPECT_EQ(dataset_label(g, Grouping::Variant), "v2");
  EXPECT_EQ(dataset_label(i, Grouping::Variant), "hotpot");
  EXPECT_EQ(sanitize_label("a/b c"), "a_b_c");
  EXPECT_EQ(sanitize_label(".."), "_..");
  EXPECT_EQ(grouping_from_name("model"), Grouping::Model);
  EXPECT_THROW(grouping_from_name("x"), ConfigError);
}

TEST(BuildReport, TablesAndCounts) {
  auto in = sample_inputs();
  auto rep = build_report(in, Grouping::Dataset);
  ASSERT_EQ(rep.datasets.size(), 3u);
  EXPECT_EQ(rep.datasets[0].dataset_label, "gen@v1");
  EXPECT_EQ(rep.datasets[0].n_questions, 2u);
  EXPECT_EQ(rep.datasets[2].dataset_label, "trivia");
  for (const auto& d : rep.datasets)
    for (auto name : kTableNames) EXPECT_TRUE(d.tables.count(std::string(name))) << name;
  auto summary = Json::parse(rep.summary_json);
  EXPECT_EQ(summary["n_questions"], 5);
  EXPECT_EQ(summary["grouping"], "dataset");
  const std::string& types = rep.combined.at("type_distribution");
  EXPECT_EQ(types.substr(0, types.find('\n')), "type,label,gen@v1,gen@v2,trivia");

  // With-context ratings are all 4; without context one of two scored <= 2.
  const std::string& hist = rep.datasets[0].tables.at("rating_histograms");
  EXPECT_NE(hist.find("without_context"), std::string::npos);
  EXPECT_NE(hist.find("50.0"), std::string::npos);
}

TEST(BuildReport, VariantGroupingShape) {
  auto rep = build_report(sample_inputs(), Grouping::Variant);
  const std::string& types = rep.combined.at("type_distribution");
  EXPECT_EQ(types.substr(0, types.find('\n')), "type,label,trivia,v1,v2");
  // One header plus eleven categories.
  EXPECT_EQ(std::count(types.begin(), types.end(), '\n'), 12);
}

TEST(BuildReport, Deterministic) {
  auto a = build_report(sample_inputs(), Grouping::Dataset);
  auto b = build_report(sample_inputs(), Grouping::Dataset);
  EXPECT_EQ(a.summary_json, b.summary_json);
  EXPECT_EQ(a.combined, b.combined);
  for (std::size_t i = 0; i < a.datasets.size(); ++i)
    EXPECT_EQ(a.datasets[i].tables, b.datasets[i].tables);
}

TEST(BuildReport, DanglingReferences) {
  auto in = sample_inputs();
  in.ratings.push_back({"ghost", answers::AnswerMode::WithContext,
                        answers::AnswerVariant::base(), {3, ""}});
  try {
    build_report(in, Grouping::Dataset);
    FAIL();
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
  auto bad_ctx = sample_inputs();
  bad_ctx.questions[0].context_id = "missing-context";
  EXPECT_THROW(build_report(bad_ctx, Grouping::Dataset), IntegrityError);
}

TEST(WriteReport, Layout) {
  qgtest::TempDir dir;
  auto rep = build_report(sample_inputs(), Grouping::Dataset);
  write_report(rep, dir / "report");
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / "summary.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / "type_distribution.csv"));
  for (auto name : kTableNames)
    EXPECT_TRUE(std::filesystem::exists(dir / "report" / "gen@v1" /
                                        (std::string(name) + ".csv")));
  // Rewriting clears stale files.
  qgtest::write_file(dir / "report" / "stale.csv", "x");
  write_report(rep, dir / "report");
  EXPECT_FALSE(std::filesystem::exists(dir / "report" / "stale.csv"));
}
