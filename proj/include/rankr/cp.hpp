#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rankr/matrix.hpp"
#include "rankr/tensor.hpp"

namespace rankr {

/// Khatri-Rao (columnwise Kronecker) product of an m x R and an n x R matrix.
/// Row (ia * n + ib) of the result is A(ia, :) .* B(ib, :), so the left
/// factor's row index varies slowest. That orientation is what makes the
/// high-to-low chains below line up with the first-index-fastest flat layout.
inline Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ");
  }
  const std::size_t r = a.cols();
  Matrix out(a.rows() * b.rows(), r);
  for (std::size_t ia = 0; ia < a.rows(); ++ia) {
    for (std::size_t ib = 0; ib < b.rows(); ++ib) {
      const std::size_t row = ia * b.rows() + ib;
      for (std::size_t c = 0; c < r; ++c) out(row, c) = a(ia, c) * b(ib, c);
    }
  }
  return out;
}

/// Khatri-Rao chain over all factors with the highest mode leftmost:
/// factors[D-1] kr factors[D-2] kr ... kr factors[0].
inline Matrix khatri_rao_chain(const std::vector<Matrix>& factors) {
  if (factors.empty()) throw std::invalid_argument("khatri_rao_chain: no factors");
  Matrix chain = factors.back();
  for (std::size_t d = factors.size() - 1; d-- > 0;) {
    chain = khatri_rao(chain, factors[d]);
  }
  return chain;
}

/// Same chain with one mode left out; pairs with the mode-`skip` unfolding.
inline Matrix khatri_rao_chain_excluding(const std::vector<Matrix>& factors,
                                         std::size_t skip) {
  if (skip >= factors.size()) {
    throw std::invalid_argument("khatri_rao_chain_excluding: mode out of range");
  }
  if (factors.size() < 2) {
    throw std::invalid_argument("khatri_rao_chain_excluding: need at least two factors");
  }
  Matrix chain(0, 0);
  bool seeded = false;
  for (std::size_t d = factors.size(); d-- > 0;) {
    if (d == skip) continue;
    if (!seeded) {
      chain = factors[d];
      seeded = true;
    } else {
      chain = khatri_rao(chain, factors[d]);
    }
  }
  return chain;
}

/// Factor matrices of a rank-R decomposition: factors[d] has shape
/// extent(d) x R and the tensor entry at (i_1, ..., i_D) is
/// sum_r prod_d factors[d](i_d, r).
struct CpFactors {
  std::vector<Matrix> factors;

  CpFactors() = default;

  explicit CpFactors(std::vector<Matrix> f) : factors(std::move(f)) { validate(); }

  /// Zero-initialized factors for the given shape and rank.
  CpFactors(const std::vector<std::size_t>& shape, std::size_t rank) {
    if (rank == 0) throw std::invalid_argument("CpFactors: rank must be positive");
    factors.reserve(shape.size());
    for (std::size_t p : shape) factors.emplace_back(p, rank);
    validate();
  }

  void validate() const {
    if (factors.empty()) throw std::invalid_argument("CpFactors: no factors");
    const std::size_t r = factors.front().cols();
    if (r == 0) throw std::invalid_argument("CpFactors: rank must be positive");
    for (const Matrix& f : factors) {
      if (f.cols() != r) throw std::invalid_argument("CpFactors: ranks differ across modes");
      if (f.rows() == 0) throw std::invalid_argument("CpFactors: zero extent");
    }
  }

  std::size_t order() const { return factors.size(); }
  std::size_t rank() const { return factors.front().cols(); }

  std::vector<std::size_t> shape() const {
    std::vector<std::size_t> s(factors.size());
    for (std::size_t d = 0; d < factors.size(); ++d) s[d] = factors[d].rows();
    return s;
  }
};

/// Expands factors into the dense tensor they represent. The flat entries are
/// produced in canonical order via the full Khatri-Rao chain times a vector of
/// ones, which keeps the summation order identical between callers.
inline DenseTensor cp_reconstruct(const CpFactors& cp) {
  cp.validate();
  const Matrix chain = khatri_rao_chain(cp.factors);
  std::vector<double> flat(chain.rows());
  for (std::size_t i = 0; i < chain.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t r = 0; r < chain.cols(); ++r) sum += chain(i, r);
    flat[i] = sum;
  }
  return DenseTensor(cp.shape(), std::move(flat));
}

}  // namespace rankr
