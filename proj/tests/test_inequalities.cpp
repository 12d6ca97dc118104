#include <gtest/gtest.h>

#include <cmath>

#include "rplab/inequalities.hpp"
#include "rplab/statistics.hpp"

using namespace rplab;

namespace {

Estimate sampled(double mean, double sigma, int blocks = 20) {
  // replicas spread so that the jackknife error equals sigma
  Estimate e;
  e.mean = mean;
  e.n_samples = 1000;
  e.n_blocks = blocks;
  const double d = sigma / std::sqrt(static_cast<double>(blocks - 1));
  for (int b = 0; b < blocks; ++b) e.replicas.push_back(mean + (b % 2 ? d : -d));
  e.std_error = jackknife_error(e.replicas, e.mean);
  return e;
}

EnergyCurve curve_of(const std::vector<int>& z, double (*f)(double)) {
  std::vector<double> e;
  for (int x : z) e.push_back(f(x));
  return exact_curve(z, e);
}

}  // namespace

TEST(Jackknife, BlockMeansOfConstantHaveNoError) {
  const auto e = from_block_means(std::vector<cplx>(10, cplx(2.0, 1.0)), 100);
  EXPECT_EQ(e.mean, cplx(2.0, 1.0));
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.n_blocks, 10);
}

TEST(Jackknife, LinearMeanMatchesNaiveStandardError) {
  std::vector<cplx> blocks{1.0, 2.0, 4.0, 3.0, 5.0};
  const auto e = from_block_means(blocks, 50);
  double mean = 3.0, var = 0.0;
  for (const auto& b : blocks) var += (b.real() - mean) * (b.real() - mean);
  var /= (blocks.size() - 1);
  EXPECT_NEAR(e.mean.real(), mean, 1e-15);
  EXPECT_NEAR(e.std_error, std::sqrt(var / blocks.size()), 1e-14);
}

TEST(Jackknife, DeriveKeepsCorrelations) {
  const auto a = from_block_means({1.0, 2.0, 3.0, 4.0}, 4);
  // a - a is exactly zero in every replica
  const auto d = derive({&a, &a}, [](const std::vector<cplx>& v) { return v[0] - v[1]; });
  EXPECT_EQ(d.mean, cplx(0.0));
  EXPECT_EQ(d.std_error, 0.0);
  const auto mixed = derive({&a}, [](const std::vector<cplx>& v) { return 2.0 * v[0]; });
  EXPECT_NEAR(mixed.std_error, 2 * a.std_error, 1e-14);
}

TEST(Jackknife, OverlapFlagging) {
  Estimate e = sampled(0.01, 0.05);
  flag_overlap(e, 0.5);
  EXPECT_TRUE(e.flagged);
  Estimate ok = sampled(1.0, 0.05);
  flag_overlap(ok, 0.5);
  EXPECT_FALSE(ok.flagged);
}

TEST(Verdicts, ExactAndSampledRules) {
  EXPECT_EQ(verdict_nonnegative("x", Estimate::exact_value(0.0)).status, Status::pass);
  EXPECT_EQ(verdict_nonnegative("x", Estimate::exact_value(-1e-6)).status, Status::fail);
  EXPECT_EQ(verdict_nonnegative("x", Estimate::exact_value(-5e-13)).status, Status::pass);
  const auto noisy = verdict_nonnegative("x", sampled(-0.001, 0.01));
  EXPECT_EQ(noisy.status, Status::pass);
  EXPECT_NEAR(noisy.z_score, -0.1, 1e-9);
  EXPECT_EQ(verdict_nonnegative("x", sampled(-0.05, 0.01)).status, Status::fail);
  Estimate flagged = sampled(-0.05, 0.01);
  flagged.flagged = true;
  EXPECT_EQ(verdict_nonnegative("x", flagged).status, Status::inconclusive);
}

TEST(Verdicts, PositivityChecksImaginaryPart) {
  EXPECT_EQ(check_rp(cplx(1.0, 1e-13)).status, Status::pass);
  EXPECT_EQ(check_rp(cplx(1.0, 1e-9)).status, Status::fail);
  EXPECT_EQ(check_rp(cplx(-1e-9, 0.0)).status, Status::fail);
}

TEST(Schwarz, Examples) {
  EXPECT_EQ(check_schwarz(cplx(0.5), cplx(1.0), cplx(1.0)).status, Status::pass);
  EXPECT_EQ(check_schwarz(cplx(2.0), cplx(2.0), cplx(2.0)).status, Status::pass);  // f1 = f2
  EXPECT_EQ(check_schwarz(cplx(0.0, 1.5), cplx(1.0), cplx(2.0)).status, Status::fail);
  EXPECT_EQ(check_schwarz(cplx(0.0), cplx(-1.0), cplx(1.0)).status, Status::fail);
}

TEST(Concavity, AnalyticCurves) {
  const std::vector<int> z{1, 2, 3, 4, 5};
  for (const auto& v : concavity_scan(curve_of(z, [](double x) { return -1.0 / x; })))
    EXPECT_EQ(v.status, Status::pass) << v.details;
  int fails = 0;
  for (const auto& v : concavity_scan(curve_of(z, [](double x) { return x * x; })))
    fails += v.status == Status::fail ? 1 : 0;
  EXPECT_GT(fails, 0);
}

TEST(Concavity, MidpointPairsAndSecondDifferences) {
  const auto vs = concavity_scan(curve_of({2, 4, 6, 8}, [](double x) { return std::log(x); }));
  int mid = 0, second = 0;
  for (const auto& v : vs) {
    mid += v.check == "concavity_midpoint";
    second += v.check == "concavity_second_difference";
  }
  EXPECT_EQ(mid, 2);  // (2,6) and (4,8); odd or off-grid midpoints are skipped
  EXPECT_EQ(second, 2);
}

TEST(Concavity, NeedsAUniformGrid) {
  EXPECT_THROW(concavity_scan(exact_curve({1, 2, 4}, {0, 0, 0})), Error);
  EXPECT_THROW(concavity_scan(exact_curve({1, 2}, {0, 0})), Error);
}

TEST(Monotonicity, Examples) {
  EXPECT_EQ(monotonicity_check(exact_curve({1, 2, 3}, {-1.0, -0.5, -0.25})).status, Status::pass);
  EXPECT_EQ(monotonicity_check(exact_curve({1, 2}, {-0.25, -0.5})).status, Status::fail);
  // beyond the cutoff a decrease is not examined
  EXPECT_EQ(monotonicity_check(exact_curve({2, 4, 6}, {1.0, 2.0, 1.0}), 4).status, Status::pass);
}

TEST(Torque, SingleRotationTriviallyPasses) {
  const auto vs = torque_verdicts({{Estimate::exact_value(-0.3)}});
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].status, Status::pass);
}

TEST(Torque, DetectsOffDiagonalMinimum) {
  auto x = [](double v) { return Estimate::exact_value(v); };
  const auto good = torque_verdicts({{x(-2.0), x(-1.0)}, {x(-1.0), x(-2.0)}});
  for (const auto& v : good) EXPECT_EQ(v.status, Status::pass);
  const auto bad = torque_verdicts({{x(-1.0), x(-3.0)}, {x(-3.0), x(-1.0)}});
  int fails = 0;
  for (const auto& v : bad) fails += v.status == Status::fail;
  EXPECT_EQ(fails, 3);
}

TEST(Combine, WorstStatusWins) {
  auto make = [](Status s, double margin) {
    Verdict v;
    v.status = s;
    v.margin = margin;
    return v;
  };
  const Verdict p = make(Status::pass, 1.0), i = make(Status::inconclusive, 0.5), f = make(Status::fail, -1.0);
  EXPECT_EQ(combine("x", {p, i}).status, Status::inconclusive);
  EXPECT_EQ(combine("x", {p, i, f}).status, Status::fail);
  EXPECT_EQ(combine("x", {p, i, f}).margin, -1.0);
}
