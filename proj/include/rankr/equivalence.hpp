#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rankr/matrix.hpp"
#include "rankr/model.hpp"
#include "rankr/rng.hpp"
#include "rankr/tensor.hpp"

namespace rankr {

/// Two-layer fully connected classifier over flattened inputs; the row q of
/// hidden_weights is the flattened weight tensor of hidden neuron q.
struct Fcfnn {
  std::size_t input_dim = 0;
  Matrix hidden_weights;  // hidden x input_dim
  Matrix output_weights;  // hidden x classes
  Activation activation = Activation::kSigmoid;

  void validate() const {
    if (input_dim == 0) throw std::invalid_argument("Fcfnn: zero input dimension");
    if (hidden_weights.rows() == 0 || hidden_weights.cols() != input_dim) {
      throw std::invalid_argument("Fcfnn: hidden weight shape mismatch");
    }
    if (output_weights.rows() != hidden_weights.rows() || output_weights.cols() < 2) {
      throw std::invalid_argument("Fcfnn: output weight shape mismatch");
    }
    for (double v : hidden_weights.data()) {
      if (!std::isfinite(v)) throw std::invalid_argument("Fcfnn: non-finite hidden weight");
    }
    for (double v : output_weights.data()) {
      if (!std::isfinite(v)) throw std::invalid_argument("Fcfnn: non-finite output weight");
    }
  }

  std::size_t hidden() const { return hidden_weights.rows(); }
  std::size_t classes() const { return output_weights.cols(); }
};

inline std::vector<double> fcfnn_hidden_preactivations(const Fcfnn& f,
                                                       const DenseTensor& x) {
  if (x.size() != f.input_dim) {
    throw std::invalid_argument("fcfnn: input size does not match input_dim");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("fcfnn: non-finite input entries");
  }
  std::vector<double> s(f.hidden(), 0.0);
  for (std::size_t q = 0; q < f.hidden(); ++q) {
    double sum = 0.0;
    for (std::size_t j = 0; j < f.input_dim; ++j) {
      sum += f.hidden_weights(q, j) * x.data()[j];
    }
    s[q] = sum;
  }
  return s;
}

/// Class probabilities over the flattened input; activation and softmax
/// conventions match the factored model's forward pass.
inline std::vector<double> fcfnn_forward(const Fcfnn& f, const DenseTensor& x) {
  const std::vector<double> s = fcfnn_hidden_preactivations(f, x);
  std::vector<double> logits(f.classes(), 0.0);
  for (std::size_t k = 0; k < f.classes(); ++k) {
    double sum = 0.0;
    for (std::size_t q = 0; q < f.hidden(); ++q) {
      sum += f.output_weights(q, k) * activate(f.activation, s[q]);
    }
    logits[k] = sum;
  }
  return softmax(logits);
}

/// Largest rank any flattened weight of this shape can need: the smallest
/// over modes i of the product of the other extents. Ties go to the smaller
/// mode index (relevant to which mode the converter places fibers in).
inline std::size_t rank_upper_bound(const std::vector<std::size_t>& shape) {
  if (shape.size() < 2) {
    throw std::invalid_argument("rank_upper_bound: order must be at least 2");
  }
  for (std::size_t p : shape) {
    if (p == 0) throw std::invalid_argument("rank_upper_bound: zero extent");
  }
  std::size_t best = 0;
  bool first = true;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    std::size_t prod = 1;
    for (std::size_t d = 0; d < shape.size(); ++d) {
      if (d != i) prod *= shape[d];
    }
    if (first || prod < best) {
      best = prod;
      first = false;
    }
  }
  return best;
}

/// Constructive converter: produces a factored model computing exactly the
/// same function. With i* the smallest mode attaining the rank bound R, the
/// r-th component pins one multi-index over the other modes via standard
/// basis columns and stores the matching mode-i* fiber of the weight tensor.
/// Every weight entry is copied, never recomputed, so per-neuron
/// reconstruction is exact to the bit.
inline RankRModel fcfnn_to_rankr(const Fcfnn& f, const std::vector<std::size_t>& shape) {
  f.validate();
  if (DenseTensor::element_count(shape) != f.input_dim) {
    throw std::invalid_argument("fcfnn_to_rankr: shape product does not match input_dim");
  }
  const std::size_t rank = rank_upper_bound(shape);
  std::size_t pivot = 0;
  {
    std::size_t best = 0;
    bool first = true;
    for (std::size_t i = 0; i < shape.size(); ++i) {
      std::size_t prod = 1;
      for (std::size_t d = 0; d < shape.size(); ++d) {
        if (d != i) prod *= shape[d];
      }
      if (first || prod < best) {
        best = prod;
        pivot = i;
        first = false;
      }
    }
  }

  ModelConfig cfg;
  cfg.input_shape = shape;
  cfg.rank = rank;
  cfg.hidden = f.hidden();
  cfg.classes = f.classes();
  cfg.activation = f.activation;
  RankRModel m(cfg);
  m.output_weights = f.output_weights;

  // The multi-indices over the non-pivot modes, walked with lower modes
  // fastest; component r of every neuron is tied to combo r.
  std::vector<std::size_t> reduced_shape;
  std::vector<std::size_t> reduced_modes;
  for (std::size_t d = 0; d < shape.size(); ++d) {
    if (d != pivot) {
      reduced_shape.push_back(shape[d]);
      reduced_modes.push_back(d);
    }
  }

  for (std::size_t q = 0; q < f.hidden(); ++q) {
    std::vector<double> w_row(f.input_dim);
    for (std::size_t j = 0; j < f.input_dim; ++j) w_row[j] = f.hidden_weights(q, j);
    const DenseTensor w = ten(std::move(w_row), shape);

    std::vector<std::size_t> combo(reduced_shape.size(), 0);
    std::size_t r = 0;
    do {
      std::vector<std::size_t> idx(shape.size(), 0);
      for (std::size_t j = 0; j < reduced_modes.size(); ++j) {
        m.hidden_weights[q].factors[reduced_modes[j]](combo[j], r) = 1.0;
        idx[reduced_modes[j]] = combo[j];
      }
      Matrix& pivot_factor = m.hidden_weights[q].factors[pivot];
      for (std::size_t t = 0; t < shape[pivot]; ++t) {
        idx[pivot] = t;
        pivot_factor(t, r) = w.at(idx);
      }
      ++r;
    } while (next_multi_index(combo, reduced_shape));
  }
  return m;
}

struct EquivalenceReport {
  double max_abs_gap = 0.0;
  bool pass = false;
};

/// Evaluates both networks on random inputs with entries in [-1, 1] and
/// reports the worst absolute probability gap. trials = 0 passes vacuously
/// with gap 0.
inline EquivalenceReport verify_equivalence(const Fcfnn& f, const RankRModel& m,
                                            std::size_t trials, std::uint64_t seed,
                                            double threshold = 1e-10) {
  f.validate();
  m.config.validate();
  if (DenseTensor::element_count(m.config.input_shape) != f.input_dim) {
    throw std::invalid_argument("verify_equivalence: input dimensions differ");
  }
  if (m.config.classes != f.classes() || m.config.hidden != f.hidden()) {
    throw std::invalid_argument("verify_equivalence: layer widths differ");
  }
  if (!(threshold >= 0.0)) {
    throw std::invalid_argument("verify_equivalence: threshold must be nonnegative");
  }

  Rng rng(seed);
  EquivalenceReport report;
  for (std::size_t t = 0; t < trials; ++t) {
    DenseTensor x(m.config.input_shape);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
    const std::vector<double> pf = fcfnn_forward(f, x);
    const std::vector<double> pm = forward(m, x);
    for (std::size_t k = 0; k < pf.size(); ++k) {
      report.max_abs_gap = std::max(report.max_abs_gap, std::abs(pf[k] - pm[k]));
    }
  }
  report.pass = report.max_abs_gap <= threshold;
  return report;
}

}  // namespace rankr
