#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rplab/quadrature.hpp"
#include "rplab/random_functionals.hpp"
#include "rplab/scalar.hpp"
#include "rplab/scalar_exact.hpp"

using namespace rplab;

namespace {

const cplx I{0.0, 1.0};

// 2 x 3, periodic time, open space with the mirror through the middle row
LatticeGeometry strip() { return build_geometry({2, 3}, {Boundary::periodic, Boundary::open}, 1, 1); }

}  // namespace

TEST(Action, ZeroFieldWithVanishingPotential) {
  const auto g = build_geometry({4, 4}, 1, 0);
  ScalarConfig phi(g.num_sites(), 0.0);
  EXPECT_EQ(scalar_action({0.5, 0.1}, g, phi), 0.0);
}

TEST(Action, SingleOpenLink) {
  // spatial chain of two sites, time extent 2: one spatial link per time slice
  const auto g = build_geometry({2, 2}, {Boundary::periodic, Boundary::open}, 0, 0);
  ScalarConfig phi(g.num_sites(), 0.0);
  phi[g.site({0, 1, 0, 0})] = 1.0;
  // links touching the site: one spatial (diff 1) and two time links on the
  // extent-2 ring (both diff 1)
  EXPECT_DOUBLE_EQ(scalar_action({0.0, 0.0}, g, phi), 1.5);
}

TEST(Action, MatchesTermByTermSum) {
  const auto g = build_geometry({2, 2}, 1, 0);
  Rng rng(5);
  ScalarConfig phi(g.num_sites());
  for (auto& x : phi) x = rng.normal();
  const ScalarModel m{0.3, 0.2};
  // each ordered neighbor pair on a 2-ring appears twice (two distinct links)
  double expect = 0.0;
  for (int t = 0; t < 2; ++t)
    for (int x = 0; x < 2; ++x) {
      const double a = phi[g.site({t, x, 0, 0})];
      expect += 0.3 * a * a + 0.2 * a * a * a * a;
      const double up_t = phi[g.site({(t + 1) % 2, x, 0, 0})];
      const double up_x = phi[g.site({t, (x + 1) % 2, 0, 0})];
      expect += 0.5 * (a - up_t) * (a - up_t) + 0.5 * (a - up_x) * (a - up_x);
    }
  EXPECT_NEAR(scalar_action(m, g, phi), expect, 1e-12);
}

TEST(Metropolis, TinyProposalsAreAlwaysAccepted) {
  const auto g = build_geometry({4, 4}, 1, 0);
  ScalarConfig phi(g.num_sites(), 0.0);
  Rng rng(1);
  double rate = 0.0;
  for (int i = 0; i < 20; ++i) rate += metropolis_sweep({0.5, 0.1}, g, phi, rng, 1e-9);
  EXPECT_GT(rate / 20, 0.999);
}

TEST(Metropolis, IsolatedSiteSamplesExpMinusV) {
  // a site with no neighbors samples exp(-V); compare P(|phi| < 0.5)
  const ScalarModel m{0.5, 0.25};
  SiteEnvironment env;  // degree 0
  Rng rng(99);
  double x = 0.0;
  const int n = 400000;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    metropolis_update(m, env, x, rng, 1.5);
    inside += std::abs(x) < 0.5 ? 1 : 0;
  }
  double num = 0.0, den = 0.0;
  for (int k = -40000; k <= 40000; ++k) {
    const double y = k * 1e-4;
    const double w = std::exp(-m.potential(y));
    den += w;
    if (std::abs(y) < 0.5) num += w;
  }
  const double p = num / den;
  const double frac = static_cast<double>(inside) / n;
  // autocorrelated chain: allow a generous effective sample size of n/10
  const double sigma = std::sqrt(p * (1 - p) / (n / 10.0));
  EXPECT_NEAR(frac, p, 3 * sigma);
}

TEST(Metropolis, FixedSeedReproducesTrajectory) {
  const auto g = build_geometry({4, 2}, 1, 0);
  auto run = [&] {
    ScalarConfig phi(g.num_sites(), 0.0);
    Rng rng(42);
    for (int i = 0; i < 50; ++i) metropolis_sweep({0.5, 0.1}, g, phi, rng, 1.0);
    return phi;
  };
  EXPECT_EQ(run(), run());
}

TEST(Quadrature, ReproducesGaussHermite) {
  // V = phi^2: nodes 0, +-sqrt(3/2), weights sqrt(pi) * {2/3, 1/6, 1/6}
  const auto q = gauss_quadrature({1.0, 0.0}, 3);
  const double sp = std::sqrt(std::numbers::pi);
  ASSERT_EQ(q.levels(), 3);
  EXPECT_NEAR(q.nodes[0], -std::sqrt(1.5), 1e-10);
  EXPECT_NEAR(q.nodes[1], 0.0, 1e-10);
  EXPECT_NEAR(q.nodes[2], std::sqrt(1.5), 1e-10);
  EXPECT_NEAR(q.weights[0], sp / 6, 1e-10);
  EXPECT_NEAR(q.weights[1], 2 * sp / 3, 1e-10);
  EXPECT_NEAR(q.weights[2], sp / 6, 1e-10);
}

TEST(Quadrature, IntegratesQuarticMomentsExactly) {
  // n levels integrate polynomials up to degree 2n-1 against exp(-V)
  const ScalarModel m{-0.5, 0.25};  // double well
  const auto q = gauss_quadrature(m, 4);
  auto brute = [&](int k) {
    double s = 0.0;
    for (int i = -200000; i <= 200000; ++i) {
      const double y = i * 5e-5;
      s += 5e-5 * std::pow(y, k) * std::exp(-m.potential(y));
    }
    return s;
  };
  for (int k : {0, 2, 4, 6}) {
    double s = 0.0;
    for (int j = 0; j < 4; ++j) s += q.weights[j] * std::pow(q.nodes[j], k);
    EXPECT_NEAR(s / brute(k), 1.0, 1e-8) << "moment " << k;
  }
}

TEST(Functional, EvaluationExamples) {
  std::vector<double> phi{0.0, 2.0};
  EXPECT_EQ(evaluate_functional(ScalarFunctional::constant({3.0, -1.0}), phi), cplx(3.0, -1.0));
  EXPECT_EQ(evaluate_functional({{{1.0, {{1, 1}}}}}, phi), cplx(2.0));
  EXPECT_EQ(evaluate_functional({{{1.0 + I, {{1, 2}}}}}, phi), cplx(4.0, 4.0));
}

TEST(Functional, ThetaConjugatesAndReflects) {
  const auto g = strip();
  const int s = g.site({0, 2, 0, 0});
  const ScalarFunctional f{{{I, {{s, 1}}}}};
  const auto tf = theta_functional(g, f);
  ASSERT_EQ(tf.terms.size(), 1u);
  EXPECT_EQ(tf.terms[0].coeff, -I);
  EXPECT_EQ(tf.terms[0].factors[0].site, g.site({0, 0, 0, 0}));
  const auto back = theta_functional(g, tf);
  EXPECT_EQ(back.terms[0].coeff, f.terms[0].coeff);
  EXPECT_EQ(back.terms[0].factors[0].site, s);
}

TEST(Functional, ThetaRejectsMixedSupport) {
  const auto g = strip();
  const ScalarFunctional f{{{1.0, {{g.site({0, 1, 0, 0}), 1}}}}};
  EXPECT_THROW(theta_functional(g, f), SupportError);
}

TEST(ExactScalar, NormalizationAndCommutativity) {
  const auto g = strip();
  const ScalarModel m{0.5, 0.1};
  const auto one = ScalarFunctional::constant(1.0);
  EXPECT_NEAR(std::abs(exact_correlator(m, g, one, one, 3) - 1.0), 0.0, 1e-14);
  Rng rng(3);
  const auto f = random_scalar_functional(g, Region::plus, rng);
  const auto h = random_scalar_functional(g, Region::zero, rng);
  EXPECT_NEAR(std::abs(exact_correlator(m, g, f, h, 3) - exact_correlator(m, g, h, f, 3)), 0.0, 1e-13);
}

TEST(ExactScalar, MatchesIndependentResummation) {
  const auto g = build_geometry({2, 2}, 1, 0);
  const auto q = gauss_quadrature({0.4, 0.2}, 2);
  const ScalarFunctional f{{{1.0 + 2.0 * I, {{0, 1}, {3, 2}}}, {{0.5, 0.0}, {{1, 1}}}}};
  // brute force over 2^4 level assignments with the action written out by hand
  cplx num{0.0, 0.0};
  double z = 0.0;
  for (int mask = 0; mask < 16; ++mask) {
    double phi[4];
    double w = 1.0;
    for (int s = 0; s < 4; ++s) {
      phi[s] = q.nodes[(mask >> s) & 1];
      w *= q.weights[(mask >> s) & 1];
    }
    // sites (t, x) -> 2t + x; two links between every neighboring pair
    double kin = 0.0;
    for (auto [a, b] : {std::pair{0, 1}, {2, 3}, {0, 2}, {1, 3}}) kin += 2 * 0.5 * (phi[a] - phi[b]) * (phi[a] - phi[b]);
    w *= std::exp(-kin);
    const cplx fv = (1.0 + 2.0 * I) * phi[0] * phi[3] * phi[3] + 0.5 * phi[1];
    num += w * fv;
    z += w;
  }
  const auto got = exact_scalar_expectations(q, g, {f}, {{0}});
  EXPECT_NEAR(std::abs(got[0] - num / z), 0.0, 1e-14);
}

TEST(ExactScalar, PositivityOnOpenStrip) {
  const auto g = strip();
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const auto f = random_scalar_functional(g, Region::plus, rng);
    const cplx v = exact_correlator({0.5, 0.1}, g, f, theta_functional(g, f), 3);
    EXPECT_GE(v.real(), -1e-12);
    EXPECT_LE(std::abs(v.imag()), 1e-12);
  }
}

TEST(ExactScalar, BudgetIsEnforced) {
  const auto g = build_geometry({4, 4}, 1, 0);
  const auto q = gauss_quadrature({0.5, 0.0}, 3);
  try {
    exact_scalar_expectations(q, g, {ScalarFunctional::constant(1.0)}, {{0}}, 1000);
    FAIL() << "expected BudgetError";
  } catch (const BudgetError& e) {
    EXPECT_NE(std::string(e.what()).find("budget"), std::string::npos);
  }
}

TEST(Factorization, AgreesWithFullEnumeration) {
  const auto g = strip();
  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    const auto f = random_scalar_functional(g, Region::plus, rng);
    const auto r = factorization_check({0.5, 0.1}, g, f, 3);
    EXPECT_GE(r.rhs, 0.0);
    EXPECT_NEAR(r.lhs.real(), r.rhs, 1e-12 * std::max(1.0, r.rhs));
  }
}

TEST(Factorization, ConstantGivesOne) {
  const auto r = factorization_check({0.5, 0.0}, strip(), ScalarFunctional::constant(1.0), 3);
  EXPECT_NEAR(r.lhs.real(), 1.0, 1e-14);
  EXPECT_NEAR(r.rhs, 1.0, 1e-14);
}

TEST(Factorization, RejectsFunctionalOutsidePlus) {
  const auto g = strip();
  const ScalarFunctional f{{{1.0, {{g.site({0, 0, 0, 0}), 1}}}}};
  EXPECT_THROW(factorization_check({0.5, 0.0}, g, f, 3), SupportError);
}
