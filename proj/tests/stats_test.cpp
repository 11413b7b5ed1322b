#include "rankr/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "rankr/rng.hpp"

namespace {

using rankr::Rng;

constexpr double kPi = 3.14159265358979323846264338327950288;

// --- quadrature oracle for the t distribution ---------------------------

double t_pdf(double x, double df) {
  const double ln_c = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                      0.5 * std::log(df * kPi);
  return std::exp(ln_c - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

double simpson(const std::function<double(double)>& f, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
}

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left = simpson(f, lo, mid);
  const double right = simpson(f, mid, hi);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, lo, mid, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, mid, hi, right, 0.5 * tol, depth - 1);
}

// Two-sided tail mass by integrating the central density and subtracting.
double t_two_sided_p_quadrature(double t, double df) {
  const double hi = std::abs(t);
  if (hi == 0.0) return 1.0;
  auto f = [df](double x) { return t_pdf(x, df); };
  const double central = adaptive_simpson(f, -hi, hi, simpson(f, -hi, hi), 1e-10, 40);
  return 1.0 - central;
}

// --- enumeration oracle for Mann-Whitney --------------------------------

// Counts assignments by recursive combination generation, scoring each
// subset with direct pairwise comparison; shares no code with the library.
struct OracleCensus {
  std::uint64_t doubled_u = 0;
  std::uint64_t count_le = 0;
  std::uint64_t count_ge = 0;
  std::uint64_t total = 0;
};

std::uint64_t doubled_u_by_pairs(const std::vector<double>& a, const std::vector<double>& b) {
  std::uint64_t doubled = 0;
  for (double va : a) {
    for (double vb : b) {
      if (va > vb) doubled += 2;
      else if (va == vb) doubled += 1;
    }
  }
  return doubled;
}

void visit_subsets(const std::vector<double>& pool, std::size_t need, std::size_t start,
                   std::vector<std::size_t>& chosen,
                   const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (chosen.size() == need) {
    fn(chosen);
    return;
  }
  for (std::size_t i = start; i + (need - chosen.size()) <= pool.size(); ++i) {
    chosen.push_back(i);
    visit_subsets(pool, need, i + 1, chosen, fn);
    chosen.pop_back();
  }
}

OracleCensus enumerate_census(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pool = a;
  pool.insert(pool.end(), b.begin(), b.end());
  OracleCensus census;
  census.doubled_u = doubled_u_by_pairs(a, b);

  std::vector<std::size_t> chosen;
  visit_subsets(pool, a.size(), 0, chosen, [&](const std::vector<std::size_t>& idx) {
    std::vector<double> ga, gb;
    std::vector<bool> taken(pool.size(), false);
    for (std::size_t i : idx) taken[i] = true;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      (taken[i] ? ga : gb).push_back(pool[i]);
    }
    const std::uint64_t du = doubled_u_by_pairs(ga, gb);
    if (du <= census.doubled_u) ++census.count_le;
    if (du >= census.doubled_u) ++census.count_ge;
    ++census.total;
  });
  return census;
}

// --- regularized incomplete beta -----------------------------------------

TEST(IncompleteBeta, EndpointsAndUniformCase) {
  EXPECT_EQ(rankr::regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(rankr::regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0);
  // a = b = 1 is the uniform distribution: I_x(1,1) = x.
  for (double x : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    EXPECT_NEAR(rankr::regularized_incomplete_beta(1.0, 1.0, x), x, 1e-14);
  }
}

TEST(IncompleteBeta, MatchesArcsineClosedForm) {
  // I_x(1/2, 1/2) = (2/pi) asin(sqrt(x)).
  for (double x : {0.05, 0.2, 0.5, 0.8, 0.95}) {
    const double expected = 2.0 / kPi * std::asin(std::sqrt(x));
    EXPECT_NEAR(rankr::regularized_incomplete_beta(0.5, 0.5, x), expected, 1e-12);
  }
}

TEST(IncompleteBeta, ComplementSymmetry) {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const double a = rng.uniform(0.2, 5.0);
    const double b = rng.uniform(0.2, 5.0);
    const double x = rng.uniform(0.01, 0.99);
    const double lhs = rankr::regularized_incomplete_beta(a, b, x);
    const double rhs = 1.0 - rankr::regularized_incomplete_beta(b, a, 1.0 - x);
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(IncompleteBeta, RejectsBadArguments) {
  EXPECT_THROW(rankr::regularized_incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(rankr::regularized_incomplete_beta(1.0, -2.0, 0.5), std::invalid_argument);
  EXPECT_THROW(rankr::regularized_incomplete_beta(1.0, 1.0, 1.5), std::invalid_argument);
  EXPECT_THROW(rankr::regularized_incomplete_beta(1.0, 1.0, -0.1), std::invalid_argument);
}

// --- Student t -----------------------------------------------------------

TEST(StudentT, MatchesCauchyClosedFormAtOneDof) {
  // df = 1 is Cauchy: two-sided p = 1 - (2/pi) atan(|t|).
  for (double t : {0.3, 1.0, 2.5, 10.0}) {
    const double expected = 1.0 - 2.0 / kPi * std::atan(t);
    EXPECT_NEAR(rankr::student_t_two_sided_p(t, 1.0), expected, 1e-12);
  }
}

TEST(StudentT, MatchesTwoDofClosedForm) {
  // df = 2: two-sided p = 1 - t / sqrt(2 + t^2) for t >= 0.
  for (double t : {0.5, 1.0, 3.0, 8.0}) {
    const double expected = 1.0 - t / std::sqrt(2.0 + t * t);
    EXPECT_NEAR(rankr::student_t_two_sided_p(t, 2.0), expected, 1e-12);
  }
}

TEST(StudentT, ZeroStatisticGivesExactlyOne) {
  EXPECT_EQ(rankr::student_t_two_sided_p(0.0, 7.3), 1.0);
}

TEST(StudentT, SymmetricInSign) {
  for (double t : {0.4, 1.7, 5.0}) {
    EXPECT_EQ(rankr::student_t_two_sided_p(t, 4.5), rankr::student_t_two_sided_p(-t, 4.5));
  }
}

TEST(StudentT, MatchesQuadratureOracle) {
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const double df = rng.uniform(1.5, 30.0);
    const double t = rng.uniform(-5.0, 5.0);
    const double p = rankr::student_t_two_sided_p(t, df);
    const double oracle = t_two_sided_p_quadrature(t, df);
    EXPECT_NEAR(p, oracle, 1e-6) << "df " << df << " t " << t;
  }
}

TEST(NormalCdf, KnownValuesAndSymmetry) {
  EXPECT_DOUBLE_EQ(rankr::normal_cdf(0.0), 0.5);
  EXPECT_NEAR(rankr::normal_cdf(1.959963984540054), 0.975, 1e-12);
  for (double z : {0.3, 1.0, 2.8}) {
    EXPECT_NEAR(rankr::normal_cdf(-z), 1.0 - rankr::normal_cdf(z), 1e-15);
  }
}

// --- Welch t test ---------------------------------------------------------

TEST(WelchT, IdenticalSamplesGiveZeroStatisticAndUnitP) {
  const std::vector<double> a{0.3, 0.7, 0.4, 0.9};
  const auto r = rankr::welch_t_test(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(WelchT, HandComputedStatisticAndDof) {
  // Equal variances 5/3 and a unit mean gap give t = -sqrt(6/5), df = 6.
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> b{2.0, 3.0, 4.0, 5.0};
  const auto r = rankr::welch_t_test(a, b);
  EXPECT_NEAR(r.statistic, -std::sqrt(1.2), 1e-14);
  EXPECT_NEAR(r.df, 6.0, 1e-12);
}

TEST(WelchT, ExtremeSeparationIsSignificant) {
  std::vector<double> a{0.0, 0.0, 0.0, 0.0, 0.0};
  std::vector<double> b{1.0, 1.0, 1.0, 1.0, 1.0};
  a[0] += 1e-9;
  b[4] -= 1e-9;
  const auto r = rankr::welch_t_test(a, b);
  EXPECT_LT(r.p_value, 1e-6);
}

TEST(WelchT, SwapSymmetry) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(5), b(7);
    for (double& v : a) v = rng.uniform(0.0, 1.0);
    for (double& v : b) v = rng.uniform(0.2, 1.2);
    const auto ab = rankr::welch_t_test(a, b);
    const auto ba = rankr::welch_t_test(b, a);
    EXPECT_NEAR(ab.p_value, ba.p_value, 1e-12);
    EXPECT_EQ(ab.statistic, -ba.statistic);
  }
}

TEST(WelchT, MatchesQuadratureOracleOnRandomPairs) {
  Rng rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(3 + trial % 5), b(4 + trial % 4);
    for (double& v : a) v = rng.uniform(0.0, 1.0);
    for (double& v : b) v = rng.uniform(0.1, 0.9);
    const auto r = rankr::welch_t_test(a, b);
    const double oracle = t_two_sided_p_quadrature(r.statistic, r.df);
    EXPECT_NEAR(r.p_value, oracle, 1e-6);
  }
}

TEST(WelchT, RejectsDegenerateInputs) {
  EXPECT_THROW(rankr::welch_t_test({1.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(rankr::welch_t_test({1.0, 2.0}, {3.0}), std::invalid_argument);
  EXPECT_THROW(rankr::welch_t_test({2.0, 2.0}, {5.0, 5.0}), std::invalid_argument);
}

// --- Mann-Whitney U --------------------------------------------------------

TEST(MannWhitney, SeparatedTripletsGiveZeroUAndTenthP) {
  const auto r = rankr::mann_whitney_u_test({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0});
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.u, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.1);  // 2 * (1/20) over C(6,3) assignments
}

TEST(MannWhitney, EqualMultisetsGiveHalfProductU) {
  const std::vector<double> a{3.0, 1.0, 2.0, 2.0};
  const std::vector<double> b{2.0, 1.0, 3.0, 2.0};
  const auto r = rankr::mann_whitney_u_test(a, b);
  EXPECT_DOUBLE_EQ(r.u, 8.0);  // n_a * n_b / 2
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(MannWhitney, FullyTiedPoolGivesUnitP) {
  const std::vector<double> a{5.0, 5.0, 5.0};
  const std::vector<double> b{5.0, 5.0};
  EXPECT_DOUBLE_EQ(rankr::mann_whitney_exact_p(a, b), 1.0);
  EXPECT_DOUBLE_EQ(rankr::mann_whitney_normal_p(a, b), 1.0);
}

TEST(MannWhitney, ExactCensusMatchesIndependentEnumeration) {
  Rng rng(25);
  for (std::size_t na = 1; na <= 5; ++na) {
    for (std::size_t nb = 1; nb <= 5; ++nb) {
      std::vector<double> a(na), b(nb);
      // small integer grid forces plenty of cross-group ties
      for (double& v : a) v = static_cast<double>(rng.bounded(4));
      for (double& v : b) v = static_cast<double>(rng.bounded(4));
      const auto lib = rankr::mann_whitney_exact_detail(a, b);
      const auto oracle = enumerate_census(a, b);
      EXPECT_EQ(lib.doubled_u, oracle.doubled_u);
      EXPECT_EQ(lib.count_le, oracle.count_le);
      EXPECT_EQ(lib.count_ge, oracle.count_ge);
      EXPECT_EQ(lib.total, oracle.total);
    }
  }
}

TEST(MannWhitney, ExactAndNormalPathsAgreeAtBoundarySize) {
  Rng rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> a(8), b(8);
    for (double& v : a) v = rng.uniform(0.0, 1.0);
    for (double& v : b) v = rng.uniform(0.0, 1.0);
    const double exact = rankr::mann_whitney_exact_p(a, b);
    const double approx = rankr::mann_whitney_normal_p(a, b);
    EXPECT_NEAR(exact, approx, 0.02);
  }
}

TEST(MannWhitney, LargeSamplesUseNormalPath) {
  Rng rng(27);
  std::vector<double> a(9), b(12);
  for (double& v : a) v = rng.uniform(0.0, 1.0);
  for (double& v : b) v = rng.uniform(0.3, 1.3);
  const auto r = rankr::mann_whitney_u_test(a, b);
  EXPECT_FALSE(r.exact);
  EXPECT_DOUBLE_EQ(r.p_value, rankr::mann_whitney_normal_p(a, b));
}

TEST(MannWhitney, SwapSymmetry) {
  Rng rng(28);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t na = 2 + rng.bounded(8);
    const std::size_t nb = 2 + rng.bounded(8);
    std::vector<double> a(na), b(nb);
    for (double& v : a) v = static_cast<double>(rng.bounded(6)) * 0.5;
    for (double& v : b) v = static_cast<double>(rng.bounded(6)) * 0.5;
    const auto ab = rankr::mann_whitney_u_test(a, b);
    const auto ba = rankr::mann_whitney_u_test(b, a);
    EXPECT_NEAR(ab.p_value, ba.p_value, 1e-12);
    const double product = static_cast<double>(na) * static_cast<double>(nb);
    EXPECT_DOUBLE_EQ(ab.u + ba.u, product);
  }
}

TEST(MannWhitney, RejectsEmptyAndNonFiniteInput) {
  EXPECT_THROW(rankr::mann_whitney_u_test({}, {1.0}), std::invalid_argument);
  EXPECT_THROW(rankr::mann_whitney_u_test({1.0}, {}), std::invalid_argument);
  EXPECT_THROW(rankr::mann_whitney_u_test({std::nan("")}, {1.0}), std::invalid_argument);
}

}  // namespace
