#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rankr {

namespace detail {

/// Continued-fraction kernel for the regularized incomplete beta function,
/// evaluated with the modified Lentz scheme. Valid for x below the switch
/// point (a+1)/(a+b+2); callers apply the symmetry transform otherwise.
inline double ibeta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 3e-16) break;
  }
  return h;
}

}  // namespace detail

inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("regularized_incomplete_beta: a and b must be positive");
  }
  if (!(x >= 0.0) || !(x <= 1.0)) {
    throw std::invalid_argument("regularized_incomplete_beta: x must lie in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::ibeta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::ibeta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided tail probability of Student's t with (possibly fractional)
/// degrees of freedom. t = 0 gives exactly 1.
inline double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided_p: df must be positive");
  if (!std::isfinite(t)) throw std::invalid_argument("student_t_two_sided_p: non-finite t");
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(0.5 * df, 0.5, x);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct TTestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Welch's unequal-variance t test with Welch-Satterthwaite degrees of
/// freedom. Requires two values per sample and variance in at least one.
inline TTestResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("welch_t_test: each sample needs at least two values");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / na;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / nb;
  double va = 0.0;
  for (double v : a) va += (v - ma) * (v - ma);
  va /= na - 1.0;
  double vb = 0.0;
  for (double v : b) vb += (v - mb) * (v - mb);
  vb /= nb - 1.0;
  if (va == 0.0 && vb == 0.0) {
    throw std::invalid_argument("welch_t_test: both samples have zero variance");
  }
  const double sa = va / na;
  const double sb = vb / nb;
  TTestResult r;
  r.statistic = (ma - mb) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = student_t_two_sided_p(r.statistic, r.df);
  return r;
}

namespace detail {

/// Midranks of the pooled sample, doubled so ties stay integral: an entry
/// tied across positions p1..p2 (1-based) gets p1 + p2.
inline std::vector<std::uint64_t> doubled_midranks(const std::vector<double>& pooled_sorted) {
  std::vector<std::uint64_t> dr(pooled_sorted.size());
  std::size_t i = 0;
  while (i < pooled_sorted.size()) {
    std::size_t j = i;
    while (j < pooled_sorted.size() && pooled_sorted[j] == pooled_sorted[i]) ++j;
    const std::uint64_t doubled = static_cast<std::uint64_t>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) dr[k] = doubled;
    i = j;
  }
  return dr;
}

}  // namespace detail

/// Integer census behind the exact two-sided p: how many of the
/// total = C(n, n_a) equally likely group assignments give a doubled U
/// statistic at or below / at or above the observed one.
struct MwuExactDetail {
  std::uint64_t doubled_u = 0;
  std::uint64_t count_le = 0;
  std::uint64_t count_ge = 0;
  std::uint64_t total = 0;
};

struct UTestResult {
  double u = 0.0;  // U statistic of the first sample, midranks for ties
  double p_value = 1.0;
  bool exact = false;
};

namespace detail {

struct MwuPrep {
  std::vector<double> pooled;          // sorted
  std::vector<std::uint64_t> ranks;    // doubled midranks of pooled
  std::uint64_t doubled_u_a = 0;       // 2 * U_a for the observed assignment
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

inline MwuPrep mwu_prepare(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("mann_whitney_u_test: samples must be nonempty");
  }
  for (double v : a) {
    if (!std::isfinite(v)) throw std::invalid_argument("mann_whitney_u_test: non-finite value");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw std::invalid_argument("mann_whitney_u_test: non-finite value");
  }
  MwuPrep prep;
  prep.n_a = a.size();
  prep.n_b = b.size();
  prep.pooled = a;
  prep.pooled.insert(prep.pooled.end(), b.begin(), b.end());
  std::sort(prep.pooled.begin(), prep.pooled.end());
  prep.ranks = doubled_midranks(prep.pooled);

  // 2*U_a by direct pair counting: two per strict win, one per tie.
  std::uint64_t doubled = 0;
  for (double va : a) {
    for (double vb : b) {
      if (va > vb) doubled += 2;
      else if (va == vb) doubled += 1;
    }
  }
  prep.doubled_u_a = doubled;
  return prep;
}

}  // namespace detail

/// Full enumeration of every way to pick which pooled positions belong to the
/// first sample; only feasible for small samples (the caller gates on size).
inline MwuExactDetail mann_whitney_exact_detail(const std::vector<double>& a,
                                                const std::vector<double>& b) {
  const detail::MwuPrep prep = detail::mwu_prepare(a, b);
  const std::size_t n = prep.n_a + prep.n_b;
  if (n > 20) throw std::invalid_argument("mann_whitney_exact_detail: pooled sample too large");

  const std::uint64_t offset =
      static_cast<std::uint64_t>(prep.n_a) * (static_cast<std::uint64_t>(prep.n_a) + 1);
  MwuExactDetail detail_out;
  detail_out.doubled_u = prep.doubled_u_a;

  // Walk all n-choose-n_a subsets as the lexicographically increasing list of
  // chosen positions; doubled U = sum of chosen doubled ranks - n_a(n_a+1).
  std::vector<std::size_t> pick(prep.n_a);
  for (std::size_t i = 0; i < prep.n_a; ++i) pick[i] = i;
  while (true) {
    std::uint64_t rank_sum = 0;
    for (std::size_t i : pick) rank_sum += prep.ranks[i];
    const std::uint64_t doubled_u = rank_sum - offset;
    if (doubled_u <= prep.doubled_u_a) ++detail_out.count_le;
    if (doubled_u >= prep.doubled_u_a) ++detail_out.count_ge;
    ++detail_out.total;

    // next combination
    std::size_t k = prep.n_a;
    while (k > 0 && pick[k - 1] == n - prep.n_a + (k - 1)) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t i = k; i < prep.n_a; ++i) pick[i] = pick[i - 1] + 1;
  }
  return detail_out;
}

inline double mann_whitney_exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  const MwuExactDetail d = mann_whitney_exact_detail(a, b);
  const std::uint64_t tail = std::min(d.count_le, d.count_ge);
  const double p = 2.0 * static_cast<double>(tail) / static_cast<double>(d.total);
  return std::min(1.0, p);
}

/// Normal approximation with tie-corrected variance and a 0.5 continuity
/// correction; a fully tied pool has zero variance and yields p = 1.
inline double mann_whitney_normal_p(const std::vector<double>& a, const std::vector<double>& b) {
  const detail::MwuPrep prep = detail::mwu_prepare(a, b);
  const double na = static_cast<double>(prep.n_a);
  const double nb = static_cast<double>(prep.n_b);
  const double n = na + nb;

  double tie_term = 0.0;
  std::size_t i = 0;
  while (i < prep.pooled.size()) {
    std::size_t j = i;
    while (j < prep.pooled.size() && prep.pooled[j] == prep.pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  const double u = 0.5 * static_cast<double>(prep.doubled_u_a);
  const double mu = 0.5 * na * nb;
  const double variance = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (variance <= 0.0) return 1.0;
  const double gap = std::max(0.0, std::abs(u - mu) - 0.5);
  const double p = 2.0 * normal_cdf(-gap / std::sqrt(variance));
  return std::min(1.0, p);
}

/// U of the first sample plus a two-sided p: exact by enumeration when both
/// samples have at most eight values, normal approximation otherwise.
inline UTestResult mann_whitney_u_test(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  const detail::MwuPrep prep = detail::mwu_prepare(a, b);
  UTestResult r;
  r.u = 0.5 * static_cast<double>(prep.doubled_u_a);
  r.exact = std::max(prep.n_a, prep.n_b) <= 8;
  r.p_value = r.exact ? mann_whitney_exact_p(a, b) : mann_whitney_normal_p(a, b);
  return r;
}

}  // namespace rankr
