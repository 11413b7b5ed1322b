#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rankr/cp.hpp"
#include "rankr/matrix.hpp"
#include "rankr/tensor.hpp"

namespace rankr {

enum class Activation { kSigmoid, kTanh, kRelu };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  throw std::invalid_argument("activation_name: unknown activation");
}

inline Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation: " + name);
}

inline double activate(Activation a, double x) {
  switch (a) {
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::kTanh: return std::tanh(x);
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
  }
  throw std::invalid_argument("activate: unknown activation");
}

/// Derivative of the activation at preactivation x. ReLU uses subgradient 0
/// at x = 0.
inline double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::kRelu:
      return x > 0.0 ? 1.0 : 0.0;
  }
  throw std::invalid_argument("activate_grad: unknown activation");
}

/// Numerically safe softmax: subtracts the max logit before exponentiating.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    sum += p[k];
  }
  for (double& x : p) x /= sum;
  return p;
}

struct ModelConfig {
  std::vector<std::size_t> input_shape;
  std::size_t rank = 1;
  std::size_t hidden = 1;
  std::size_t classes = 2;
  Activation activation = Activation::kSigmoid;
  std::uint64_t seed = 0;

  void validate() const {
    if (input_shape.size() < 2) {
      throw std::invalid_argument("ModelConfig: input order must be at least 2");
    }
    for (std::size_t p : input_shape) {
      if (p == 0) throw std::invalid_argument("ModelConfig: zero input extent");
    }
    if (rank == 0) throw std::invalid_argument("ModelConfig: rank must be positive");
    if (hidden == 0) throw std::invalid_argument("ModelConfig: hidden size must be positive");
    if (classes < 2) throw std::invalid_argument("ModelConfig: need at least two classes");
  }
};

/// Two-layer classifier whose q-th hidden neuron scores an input tensor by
/// the inner product with a rank-R weight tensor held in factored form.
struct RankRModel {
  ModelConfig config;
  std::vector<CpFactors> hidden_weights;  // one CpFactors per hidden neuron
  Matrix output_weights;                  // hidden x classes

  RankRModel() = default;

  /// Zero-weight model of the configured architecture.
  explicit RankRModel(ModelConfig cfg) : config(std::move(cfg)) {
    config.validate();
    hidden_weights.assign(config.hidden, CpFactors(config.input_shape, config.rank));
    output_weights = Matrix(config.hidden, config.classes);
  }
};

enum class ParamFamily { kRankR, kFcfnn };

/// Trainable-parameter count: R*Q*sum(I_d) + Q*C for the factored family,
/// Q*prod(I_d) + Q*C for the fully connected one.
inline std::size_t param_count(const ModelConfig& cfg, ParamFamily family) {
  cfg.validate();
  std::size_t first = 0;
  if (family == ParamFamily::kRankR) {
    std::size_t sum = 0;
    for (std::size_t p : cfg.input_shape) sum += p;
    first = cfg.rank * cfg.hidden * sum;
  } else {
    first = cfg.hidden * DenseTensor::element_count(cfg.input_shape);
  }
  return first + cfg.hidden * cfg.classes;
}

namespace detail {

inline void check_input(const RankRModel& m, const DenseTensor& x) {
  if (x.shape() != m.config.input_shape) {
    throw std::invalid_argument("input shape does not match model input shape");
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("input has non-finite entries");
  }
}

}  // namespace detail

/// Contraction of the input against every factor of neuron q except mode d:
/// Z = X_(d) * (chain of the other factors). Pairing it with factor d gives
/// the neuron's preactivation regardless of which mode was left out.
inline Matrix z_excluding(const RankRModel& m, const DenseTensor& x, std::size_t q,
                          std::size_t mode) {
  detail::check_input(m, x);
  if (q >= m.config.hidden) throw std::invalid_argument("z_excluding: neuron out of range");
  if (mode >= x.order()) throw std::invalid_argument("z_excluding: mode out of range");
  return matmul(matricize(x, mode),
                khatri_rao_chain_excluding(m.hidden_weights[q].factors, mode));
}

/// Preactivation s_q = trace(W_d^T Z); equal for every mode d.
inline double hidden_preactivation(const RankRModel& m, const DenseTensor& x,
                                   std::size_t q, std::size_t mode) {
  return frobenius_dot(m.hidden_weights[q].factors[mode], z_excluding(m, x, q, mode));
}

/// Class probabilities for one input. Hidden preactivations are evaluated at
/// the last mode, whose excluded chain is the cheapest for patch-shaped
/// inputs; any mode gives the same result.
inline std::vector<double> forward(const RankRModel& m, const DenseTensor& x) {
  detail::check_input(m, x);
  const std::size_t last = x.order() - 1;
  std::vector<double> u(m.config.hidden);
  for (std::size_t q = 0; q < m.config.hidden; ++q) {
    const Matrix z = matmul(matricize(x, last),
                            khatri_rao_chain_excluding(m.hidden_weights[q].factors, last));
    u[q] = activate(m.config.activation,
                    frobenius_dot(m.hidden_weights[q].factors[last], z));
  }
  std::vector<double> logits(m.config.classes, 0.0);
  for (std::size_t k = 0; k < m.config.classes; ++k) {
    double s = 0.0;
    for (std::size_t q = 0; q < m.config.hidden; ++q) s += m.output_weights(q, k) * u[q];
    logits[k] = s;
  }
  return softmax(logits);
}

/// Most probable class; ties resolve to the smallest index.
inline std::size_t predict(const RankRModel& m, const DenseTensor& x) {
  const std::vector<double> p = forward(m, x);
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return best;
}

}  // namespace rankr
