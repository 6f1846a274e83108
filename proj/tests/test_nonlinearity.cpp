#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mgs/nonlinearity.hpp"
#include "oracles.hpp"

using namespace mgs;

namespace {

NonlinearityModel two_hump() { return analyze(NonlinearityModel::factored({0, 1, 3, 9, 18}, -1.0), 40.0); }

NonlinearityModel cubic() { return analyze(NonlinearityModel::polynomial({0, -1, 0, 1}), 4.0); }

// Two humps where the second never climbs back to F(beta_1).
std::vector<std::pair<double, double>> low_second_hump_knots() {
  return {{0, 0}, {0.5, -1}, {1, 0}, {2, 100}, {3, 0}, {3.5, -200}, {4, 0}, {4.5, 150}, {5, 0}, {5.5, -1}, {7, -1}};
}

}  // namespace

TEST(Nonlinearity, FactoredMatchesHandWrittenF) {
  const auto m = two_hump();
  for (double s = 0.01; s < 20.0; s += 0.137) {
    EXPECT_NEAR(m.f(s), oracle::two_hump_f(s), 1e-12 * std::max(1.0, std::abs(oracle::two_hump_f(s))));
    EXPECT_NEAR(m.F(s), oracle::two_hump_F(s), 1e-11 * std::max(1.0, std::abs(oracle::two_hump_F(s))));
  }
}

TEST(Nonlinearity, ExpandedAndFactoredAgree) {
  const auto a = two_hump();
  const auto b = analyze(NonlinearityModel::polynomial({0, -486, 729, -273, 31, -1}), 40.0);
  for (double s = 0.05; s < 19.0; s += 0.31) EXPECT_NEAR(a.F(s), b.F(s), 1e-9 * std::max(1.0, std::abs(a.F(s))));
  EXPECT_EQ(a.require_structure().n(), b.require_structure().n());
}

TEST(Nonlinearity, KnownValues) {
  const auto m = two_hump();
  EXPECT_DOUBLE_EQ(m.f(2.0), 224.0);
  EXPECT_NEAR(m.F(3.0), 230.85, 1e-9);
  EXPECT_NEAR(m.F(18.0), 220449.6, 1e-6);
  EXPECT_EQ(m.f(0.0), 0.0);
  EXPECT_EQ(m.f(-4.0), 0.0);
  EXPECT_EQ(m.F(-4.0), 0.0);
}

TEST(Nonlinearity, StructureMatchesBruteForceRoots) {
  const auto m = two_hump();
  const auto& st = m.require_structure();
  const auto roots = oracle::sign_changes(oracle::two_hump_f, 40.0, 200000);
  ASSERT_EQ(roots.size(), 4u);
  ASSERT_EQ(st.n(), 2);
  EXPECT_NEAR(st.alpha(1), roots[0], 1e-9);
  EXPECT_NEAR(st.beta(1), roots[1], 1e-9);
  EXPECT_NEAR(st.alpha(2), roots[2], 1e-9);
  EXPECT_NEAR(st.beta(2), roots[3], 1e-9);
  EXPECT_NEAR(st.alpha(1), 1.0, 1e-9);
  EXPECT_NEAR(st.beta(1), 3.0, 1e-9);
  EXPECT_NEAR(st.alpha(2), 9.0, 1e-9);
  EXPECT_NEAR(st.beta(2), 18.0, 1e-9);
  EXPECT_FALSE(st.tail_positive());
}

TEST(Nonlinearity, XiMatchesClosedFormOracle) {
  const auto m = two_hump();
  const auto& st = m.require_structure();
  const double xi1 = oracle::bisect(oracle::two_hump_F, 1.0, 3.0);
  const double xi2 = oracle::bisect(oracle::two_hump_F, 9.0, 18.0);
  EXPECT_NEAR(st.xi(1), xi1, 1e-10);
  EXPECT_NEAR(st.xi(2), xi2, 1e-9);
  EXPECT_NEAR(st.xi(1), 1.67, 5e-3);
  EXPECT_GT(st.xi(2), 9.0);
  EXPECT_LT(st.xi(2), 18.0);
  for (int k = 1; k <= 2; ++k) {
    EXPECT_GT(st.gamma(k), st.xi(k));
    EXPECT_LT(st.gamma(k), st.beta(k));
    EXPECT_GT(oracle::two_hump_F(st.gamma(k)), 0.0);
  }
}

TEST(Nonlinearity, CubicHasPositiveTail) {
  const auto m = cubic();
  const auto& st = m.require_structure();
  EXPECT_EQ(st.n(), 1);
  EXPECT_TRUE(st.tail_positive());
  EXPECT_NEAR(st.alpha(1), 1.0, 1e-12);
  EXPECT_TRUE(std::isinf(st.beta(1)));
  EXPECT_NEAR(st.xi(1), std::sqrt(2.0), 1e-11);
  EXPECT_NEAR(m.F(1.7), oracle::cubic_F(1.7), 1e-14);
}

TEST(Nonlinearity, PiecewiseLinearFIsExact) {
  const auto knots = low_second_hump_knots();
  const auto m = NonlinearityModel::piecewise_linear(knots);
  for (double u = 0.03; u < 6.9; u += 0.173) EXPECT_NEAR(m.F(u), oracle::piecewise_F(knots, u), 1e-9);
  const auto a = analyze(m, 8.0);
  for (double u = 0.03; u < 6.9; u += 0.173) EXPECT_NEAR(a.F(u), oracle::piecewise_F(knots, u), 1e-9);
}

TEST(Nonlinearity, AssumptionsPassForTwoHump) {
  const auto rep = verify_assumptions(two_hump(), 3);
  EXPECT_TRUE(rep.all_pass());
  ASSERT_EQ(rep.entries.size(), 5u);
  EXPECT_EQ(rep.entries[0].assumption, "A1");
  EXPECT_EQ(rep.entries[1].assumption, "A2");
  EXPECT_FALSE(rep.at("A5").skipped);
}

TEST(Nonlinearity, A5SkippedInTwoDimensions) {
  const auto rep = verify_assumptions(two_hump(), 2);
  EXPECT_TRUE(rep.at("A5").skipped);
  EXPECT_TRUE(rep.all_pass());
}

TEST(Nonlinearity, CubicReportsPrimedShape) {
  const auto rep = verify_assumptions(cubic(), 3);
  EXPECT_EQ(rep.entries[1].assumption, "A2'");
  EXPECT_TRUE(rep.all_pass());
}

TEST(Nonlinearity, A4FailsWhenSecondHumpIsLow) {
  const auto m = analyze(NonlinearityModel::piecewise_linear(low_second_hump_knots()), 8.0);
  const auto rep = verify_assumptions(m, 3);
  EXPECT_TRUE(rep.at("A3").pass);
  EXPECT_FALSE(rep.at("A4").pass);
  EXPECT_FALSE(rep.all_pass());
}

TEST(Nonlinearity, A5FailsAtFlatCrossing) {
  // Triple zero at alpha = 1: f(1 + d) ~ 2 d^3.
  const auto m = analyze(NonlinearityModel::factored({0, 1, 1, 1, 3}, -1.0), 6.0);
  const auto& st = m.require_structure();
  ASSERT_EQ(st.n(), 1);
  const auto rep = verify_assumptions(m, 3);
  EXPECT_FALSE(rep.at("A5").pass);
  EXPECT_TRUE(verify_assumptions(m, 2).all_pass());
}

TEST(Nonlinearity, PositiveNearZeroIsStructureError) {
  try {
    detect_sign_structure(NonlinearityModel::factored({1, 3}, 1.0), 5.0);
    FAIL() << "expected a structure error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Structure);
  }
}

TEST(Nonlinearity, NeverPositiveIsStructureError) {
  try {
    detect_sign_structure(NonlinearityModel::polynomial({0, -1}), 5.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Structure);
  }
}

TEST(Nonlinearity, HumpWithoutZeroOfFIsAssumptionError) {
  // F(9) is far below zero and (9, 10) cannot recover it.
  try {
    analyze(NonlinearityModel::factored({0, 1, 3, 9, 10}, -1.0), 20.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Assumption);
  }
}

TEST(Nonlinearity, TangentialZeroIsNotASignChange) {
  // -s (s-1) (s-2)^2 (s-4) touches 0 at s = 2 without changing sign.
  const auto m = NonlinearityModel::factored({0, 1, 2, 2, 4}, -1.0);
  const auto st = detect_sign_structure(m, 8.0);
  for (double a : st.alphas) EXPECT_GT(std::abs(a - 2.0), 1e-3);
  for (double b : st.betas) EXPECT_GT(std::abs(b - 2.0), 1e-3);
}

TEST(Nonlinearity, CheckedEvaluationRejectsNonFinite) {
  const auto m = two_hump();
  EXPECT_THROW(eval_f(m, std::nan("")), Error);
  EXPECT_THROW(eval_F(m, kInf), Error);
  EXPECT_DOUBLE_EQ(eval_f(m, 2.0), 224.0);
}

TEST(Nonlinearity, TruncationFreezesAboveBeta) {
  const auto m = two_hump();
  const double b = m.require_structure().beta(1);
  const auto t = truncate(m, 1);
  EXPECT_EQ(t.f(5.0), m.f(b));
  EXPECT_EQ(t.f(4.0), t.f(5.0));
  EXPECT_NEAR(t.F(5.0), m.F(b) + m.f(b) * (5.0 - b), 1e-9);
  EXPECT_EQ(t.f(2.0), m.f(2.0));
  EXPECT_THROW(truncate(m, 3), Error);
  const auto c = cubic();
  EXPECT_EQ(truncate(c, 1).f(10.0), c.f(10.0));
}

TEST(Nonlinearity, RandomPolynomialRootsMatchOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gap(0.3, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> roots{0.0};
    double r = 0.0;
    for (int i = 0; i < 4; ++i) roots.push_back(r += gap(rng));
    const auto m = NonlinearityModel::factored(roots, -1.0);
    const double top = roots.back() * 1.5;
    const auto st = detect_sign_structure(m, top);
    auto g = [&](double s) { return m.f(s); };
    const auto brute = oracle::sign_changes(g, top, 100000);
    ASSERT_EQ(brute.size(), st.alphas.size() + st.betas.size());
    for (std::size_t i = 0; i < st.alphas.size(); ++i) EXPECT_NEAR(st.alphas[i], brute[2 * i], 1e-9);
    for (std::size_t i = 0; i < st.betas.size(); ++i) EXPECT_NEAR(st.betas[i], brute[2 * i + 1], 1e-9);
  }
}
