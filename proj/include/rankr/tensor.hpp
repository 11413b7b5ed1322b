#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rankr/matrix.hpp"

namespace rankr {

/// Dense D-order tensor with the first-index-fastest linearization.
///
/// Index conventions, fixed once for the whole library:
///   * Math-level formulas index entries 1-based as (i_1, ..., i_D); code is
///     0-based throughout, with i_d(code) = i_d(math) - 1. This is the single
///     translation layer; tests pin it by brute-force enumeration.
///   * The canonical flat position of 0-based (i_1, ..., i_D) is
///       flat = i_1 + i_2 * p_1 + i_3 * p_1 * p_2 + ...
///     i.e. mode 0 varies fastest. vec() returns entries in exactly this
///     order and ten() inverts it.
///   * Mode arguments are 0-based: mode d in code is mode d+1 at math level.
class DenseTensor {
public:
  DenseTensor() = default;

  /// Zero tensor of the given shape.
  explicit DenseTensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)) {
    validate_shape();
    data_.assign(element_count(shape_), 0.0);
    init_strides();
  }

  DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape();
    if (data_.size() != element_count(shape_)) {
      throw std::invalid_argument("DenseTensor: data length does not match shape product");
    }
    init_strides();
  }

  std::size_t order() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t extent(std::size_t mode) const { return shape_[mode]; }
  std::size_t size() const { return data_.size(); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < shape_.size(); ++d) flat += idx[d] * strides_[d];
    return flat;
  }

  double& at(std::span<const std::size_t> idx) { return data_[flat_index(idx)]; }
  double at(std::span<const std::size_t> idx) const { return data_[flat_index(idx)]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t p : shape) n *= p;
    return n;
  }

private:
  void validate_shape() const {
    if (shape_.empty()) throw std::invalid_argument("DenseTensor: empty shape");
    for (std::size_t p : shape_) {
      if (p == 0) throw std::invalid_argument("DenseTensor: zero extent");
    }
  }

  void init_strides() {
    strides_.resize(shape_.size());
    std::size_t s = 1;
    for (std::size_t d = 0; d < shape_.size(); ++d) {
      strides_[d] = s;
      s *= shape_[d];
    }
  }

  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;
};

inline bool same_shape(const DenseTensor& a, const DenseTensor& b) {
  return a.shape() == b.shape();
}

/// Advances a 0-based multi-index with mode 0 fastest; returns false once the
/// index wraps back to all zeros.
inline bool next_multi_index(std::vector<std::size_t>& idx,
                             const std::vector<std::size_t>& shape) {
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (++idx[d] < shape[d]) return true;
    idx[d] = 0;
  }
  return false;
}

/// Stacks the entries of a tensor into a flat vector in the canonical order.
inline std::vector<double> vec(const DenseTensor& t) { return t.data(); }

/// Inverse of vec for the given shape.
inline DenseTensor ten(std::vector<double> v, std::vector<std::size_t> shape) {
  if (v.size() != DenseTensor::element_count(shape)) {
    throw std::invalid_argument("ten: vector length does not match shape product");
  }
  return DenseTensor(std::move(shape), std::move(v));
}

/// Mode-d unfolding: rows are indexed by the unfolded mode, columns by the
/// remaining modes with lower modes varying fastest.
inline Matrix matricize(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order()) throw std::invalid_argument("matricize: mode out of range");
  const auto& shape = t.shape();
  const std::size_t rows = shape[mode];
  const std::size_t cols = t.size() / rows;

  std::vector<std::size_t> col_stride(shape.size(), 0);
  std::size_t s = 1;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (d == mode) continue;
    col_stride[d] = s;
    s *= shape[d];
  }

  Matrix out(rows, cols);
  std::vector<std::size_t> idx(shape.size(), 0);
  std::size_t flat = 0;
  do {
    std::size_t col = 0;
    for (std::size_t d = 0; d < shape.size(); ++d) col += idx[d] * col_stride[d];
    out(idx[mode], col) = t[flat];
    ++flat;
  } while (next_multi_index(idx, shape));
  return out;
}

/// Tensor inner product: the sum over all positions of elementwise products.
inline double inner(const DenseTensor& a, const DenseTensor& b) {
  if (!same_shape(a, b)) throw std::invalid_argument("inner: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace rankr
