#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rankr/data.hpp"
#include "rankr/matrix.hpp"
#include "rankr/model.hpp"
#include "rankr/rng.hpp"
#include "rankr/tensor.hpp"

namespace rankr {

/// Probabilities are clamped here before the log so a confidently wrong
/// prediction yields a huge but finite loss term.
inline constexpr double kProbFloor = 1e-300;

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t max_epochs = 100;
  /// Training stops once the absolute epoch-over-epoch NLL change drops
  /// below tol; 0 disables the check and runs every epoch.
  double tol = 1e-6;
  enum class Mode { kAlternating, kJoint };
  Mode mode = Mode::kAlternating;
  std::uint64_t seed = 0;

  void validate() const {
    // 0 is allowed: a zero step leaves the model unchanged, which callers
    // use as a no-op baseline.
    if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
      throw std::invalid_argument("TrainConfig: learning rate must be a nonnegative real");
    }
    if (max_epochs == 0) throw std::invalid_argument("TrainConfig: need at least one epoch");
    if (!std::isfinite(tol) || tol < 0.0) {
      throw std::invalid_argument("TrainConfig: tol must be a nonnegative real");
    }
  }
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based, contiguous
  double train_nll = 0.0;
  double train_accuracy = 0.0;
  bool has_test = false;
  double test_accuracy = 0.0;
};

struct RunRecord {
  std::vector<EpochStats> epochs;
  double elapsed_seconds = 0.0;
};

using EpochObserver = std::function<void(const EpochStats&)>;

/// Thrown when the training loss stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_dataset(const RankRModel& m, const LabeledPatchSet& data) {
  if (data.classes != m.config.classes) {
    throw std::invalid_argument("dataset class count does not match model");
  }
  for (const DenseTensor& x : data.patches) {
    if (x.shape() != m.config.input_shape) {
      throw std::invalid_argument("patch shape does not match model input shape");
    }
  }
  for (std::size_t l : data.labels) {
    if (l >= m.config.classes) throw std::invalid_argument("label out of range");
  }
}

/// Hidden preactivations of one sample, evaluated at the last mode.
inline std::vector<double> sample_preactivations(const RankRModel& m,
                                                 const DenseTensor& x) {
  const std::size_t last = x.order() - 1;
  const Matrix xm = matricize(x, last);
  std::vector<double> s(m.config.hidden);
  for (std::size_t q = 0; q < m.config.hidden; ++q) {
    const Matrix z =
        matmul(xm, khatri_rao_chain_excluding(m.hidden_weights[q].factors, last));
    s[q] = frobenius_dot(m.hidden_weights[q].factors[last], z);
  }
  return s;
}

inline std::vector<double> probabilities_from(const RankRModel& m,
                                              const std::vector<double>& s) {
  std::vector<double> logits(m.config.classes, 0.0);
  for (std::size_t k = 0; k < m.config.classes; ++k) {
    double sum = 0.0;
    for (std::size_t q = 0; q < m.config.hidden; ++q) {
      sum += m.output_weights(q, k) * activate(m.config.activation, s[q]);
    }
    logits[k] = sum;
  }
  return softmax(logits);
}

inline std::size_t argmax_smallest(const std::vector<double>& p) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return best;
}

}  // namespace detail

/// Negative log-likelihood of the data under the model.
inline double nll(const RankRModel& m, const LabeledPatchSet& data) {
  detail::check_dataset(m, data);
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> p =
        detail::probabilities_from(m, detail::sample_preactivations(m, data.patches[i]));
    loss -= std::log(std::max(p[data.labels[i]], kProbFloor));
  }
  return loss;
}

/// Fraction of samples whose predicted class matches the label.
inline double accuracy(const RankRModel& m, const LabeledPatchSet& data) {
  detail::check_dataset(m, data);
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (predict(m, data.patches[i]) == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

/// Loss gradient with respect to the output weights: sum over samples of
/// u (p - t)^T.
inline Matrix grad_output(const RankRModel& m, const LabeledPatchSet& data) {
  detail::check_dataset(m, data);
  Matrix g(m.config.hidden, m.config.classes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> s = detail::sample_preactivations(m, data.patches[i]);
    const std::vector<double> p = detail::probabilities_from(m, s);
    for (std::size_t q = 0; q < m.config.hidden; ++q) {
      const double u = activate(m.config.activation, s[q]);
      for (std::size_t k = 0; k < m.config.classes; ++k) {
        g(q, k) += u * (p[k] - (k == data.labels[i] ? 1.0 : 0.0));
      }
    }
  }
  return g;
}

/// Loss gradient with respect to factor d of neuron q, all other parameters
/// held fixed. The preactivation is linear in that factor given the
/// contraction Z of the input with the other factors, so the gradient is a
/// weighted sum of the per-sample Z matrices.
inline Matrix grad_factor(const RankRModel& m, const LabeledPatchSet& data,
                          std::size_t q, std::size_t d) {
  detail::check_dataset(m, data);
  if (q >= m.config.hidden) throw std::invalid_argument("grad_factor: neuron out of range");
  if (d >= m.config.input_shape.size()) {
    throw std::invalid_argument("grad_factor: mode out of range");
  }
  const Matrix chain = khatri_rao_chain_excluding(m.hidden_weights[q].factors, d);
  Matrix g(m.config.input_shape[d], m.config.rank);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> s = detail::sample_preactivations(m, data.patches[i]);
    const std::vector<double> p = detail::probabilities_from(m, s);
    double back = 0.0;
    for (std::size_t k = 0; k < m.config.classes; ++k) {
      back += (p[k] - (k == data.labels[i] ? 1.0 : 0.0)) * m.output_weights(q, k);
    }
    const double delta = activate_grad(m.config.activation, s[q]) * back;
    const Matrix z = matmul(matricize(data.patches[i], d), chain);
    for (std::size_t j = 0; j < g.size(); ++j) g.data()[j] += delta * z.data()[j];
  }
  return g;
}

/// Glorot-style uniform initialization: factor d of every neuron is drawn
/// from [-a_d, a_d] with a_d = sqrt(6 / (I_d + R)), the output weights from
/// [-b, b] with b = sqrt(6 / (Q + C)). Draw order is fixed (neuron, then
/// mode, then row-major entries; output weights last).
inline RankRModel init_weights(const ModelConfig& cfg) {
  RankRModel m(cfg);
  Rng rng(cfg.seed);
  for (std::size_t q = 0; q < cfg.hidden; ++q) {
    for (std::size_t d = 0; d < cfg.input_shape.size(); ++d) {
      const double a = std::sqrt(
          6.0 / (static_cast<double>(cfg.input_shape[d]) + static_cast<double>(cfg.rank)));
      Matrix& f = m.hidden_weights[q].factors[d];
      for (std::size_t j = 0; j < f.size(); ++j) f.data()[j] = rng.uniform(-a, a);
    }
  }
  const double b = std::sqrt(
      6.0 / (static_cast<double>(cfg.hidden) + static_cast<double>(cfg.classes)));
  for (std::size_t j = 0; j < m.output_weights.size(); ++j) {
    m.output_weights.data()[j] = rng.uniform(-b, b);
  }
  return m;
}

/// Full-batch gradient descent over the factored weights.
///
/// One epoch in alternating mode walks modes in order; for each mode d and
/// neuron q it rebuilds the contraction Z of every sample against the other
/// factors of that neuron, refreshes the neuron's cached preactivations from
/// that Z, takes one descent step on factor d, and refreshes again (Z stays
/// valid because it excludes mode d). After all modes a single step is taken
/// on the output weights. Joint mode instead evaluates every gradient at the
/// epoch's starting point and applies all steps at once.
///
/// Epoch statistics are computed from the post-update state; training stops
/// after max_epochs or once |NLL change| < tol (needs at least two epochs).
/// Throws DivergenceError when the loss stops being finite.
inline RunRecord train(RankRModel& m, const LabeledPatchSet& data, const TrainConfig& cfg,
                       const LabeledPatchSet* test_data = nullptr,
                       const EpochObserver& observer = {}) {
  cfg.validate();
  m.config.validate();
  detail::check_dataset(m, data);
  if (data.size() == 0) throw std::invalid_argument("train: empty training set");
  if (test_data != nullptr) detail::check_dataset(m, *test_data);
  for (const DenseTensor& x : data.patches) {
    for (double v : x.data()) {
      if (!std::isfinite(v)) throw std::invalid_argument("train: non-finite input entry");
    }
  }

  const auto t_start = std::chrono::steady_clock::now();
  const std::size_t n = data.size();
  const std::size_t d_count = m.config.input_shape.size();
  const std::size_t q_count = m.config.hidden;
  const std::size_t c_count = m.config.classes;
  const double lr = cfg.learning_rate;

  // Inputs never change, so their unfoldings are computed once per mode.
  std::vector<std::vector<Matrix>> xmat(d_count);
  for (std::size_t d = 0; d < d_count; ++d) {
    xmat[d].reserve(n);
    for (std::size_t i = 0; i < n; ++i) xmat[d].push_back(matricize(data.patches[i], d));
  }

  // s[i][q]: cached preactivation of neuron q on sample i, kept in sync with
  // the weights after every update.
  std::vector<std::vector<double>> s(n, std::vector<double>(q_count, 0.0));
  const std::size_t last = d_count - 1;
  auto refresh_all = [&]() {
    for (std::size_t q = 0; q < q_count; ++q) {
      const Matrix chain =
          khatri_rao_chain_excluding(m.hidden_weights[q].factors, last);
      for (std::size_t i = 0; i < n; ++i) {
        s[i][q] = frobenius_dot(m.hidden_weights[q].factors[last],
                                matmul(xmat[last][i], chain));
      }
    }
  };
  refresh_all();

  auto probs = [&](std::size_t i) { return detail::probabilities_from(m, s[i]); };

  auto output_step = [&]() {
    Matrix g(q_count, c_count);
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> p = probs(i);
      for (std::size_t q = 0; q < q_count; ++q) {
        const double u = activate(m.config.activation, s[i][q]);
        for (std::size_t k = 0; k < c_count; ++k) {
          g(q, k) += u * (p[k] - (k == data.labels[i] ? 1.0 : 0.0));
        }
      }
    }
    for (std::size_t j = 0; j < g.size(); ++j) {
      m.output_weights.data()[j] -= lr * g.data()[j];
    }
  };

  RunRecord record;
  double prev_nll = std::numeric_limits<double>::quiet_NaN();
  std::vector<Matrix> z(n);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.mode == TrainConfig::Mode::kAlternating) {
      for (std::size_t d = 0; d < d_count; ++d) {
        for (std::size_t q = 0; q < q_count; ++q) {
          const Matrix chain =
              khatri_rao_chain_excluding(m.hidden_weights[q].factors, d);
          Matrix& factor = m.hidden_weights[q].factors[d];
          for (std::size_t i = 0; i < n; ++i) {
            z[i] = matmul(xmat[d][i], chain);
            s[i][q] = frobenius_dot(factor, z[i]);
          }
          Matrix g(factor.rows(), factor.cols());
          for (std::size_t i = 0; i < n; ++i) {
            const std::vector<double> p = probs(i);
            double back = 0.0;
            for (std::size_t k = 0; k < c_count; ++k) {
              back += (p[k] - (k == data.labels[i] ? 1.0 : 0.0)) * m.output_weights(q, k);
            }
            const double delta = activate_grad(m.config.activation, s[i][q]) * back;
            for (std::size_t j = 0; j < g.size(); ++j) {
              g.data()[j] += delta * z[i].data()[j];
            }
          }
          for (std::size_t j = 0; j < factor.size(); ++j) {
            factor.data()[j] -= lr * g.data()[j];
          }
          for (std::size_t i = 0; i < n; ++i) s[i][q] = frobenius_dot(factor, z[i]);
        }
      }
      output_step();
    } else {
      // Joint mode: every gradient is taken at the epoch's starting state.
      std::vector<std::vector<Matrix>> factor_grads(q_count);
      std::vector<std::vector<double>> delta(n, std::vector<double>(q_count, 0.0));
      Matrix g_out(q_count, c_count);
      for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> p = probs(i);
        for (std::size_t q = 0; q < q_count; ++q) {
          double back = 0.0;
          for (std::size_t k = 0; k < c_count; ++k) {
            back += (p[k] - (k == data.labels[i] ? 1.0 : 0.0)) * m.output_weights(q, k);
          }
          delta[i][q] = activate_grad(m.config.activation, s[i][q]) * back;
          const double u = activate(m.config.activation, s[i][q]);
          for (std::size_t k = 0; k < c_count; ++k) {
            g_out(q, k) += u * (p[k] - (k == data.labels[i] ? 1.0 : 0.0));
          }
        }
      }
      for (std::size_t q = 0; q < q_count; ++q) {
        factor_grads[q].reserve(d_count);
        for (std::size_t d = 0; d < d_count; ++d) {
          const Matrix chain =
              khatri_rao_chain_excluding(m.hidden_weights[q].factors, d);
          Matrix g(m.config.input_shape[d], m.config.rank);
          for (std::size_t i = 0; i < n; ++i) {
            const Matrix zi = matmul(xmat[d][i], chain);
            for (std::size_t j = 0; j < g.size(); ++j) {
              g.data()[j] += delta[i][q] * zi.data()[j];
            }
          }
          factor_grads[q].push_back(std::move(g));
        }
      }
      for (std::size_t q = 0; q < q_count; ++q) {
        for (std::size_t d = 0; d < d_count; ++d) {
          Matrix& factor = m.hidden_weights[q].factors[d];
          for (std::size_t j = 0; j < factor.size(); ++j) {
            factor.data()[j] -= lr * factor_grads[q][d].data()[j];
          }
        }
      }
      for (std::size_t j = 0; j < g_out.size(); ++j) {
        m.output_weights.data()[j] -= lr * g_out.data()[j];
      }
      refresh_all();
    }

    EpochStats stats;
    stats.epoch = epoch;
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> p = probs(i);
      loss -= std::log(std::max(p[data.labels[i]], kProbFloor));
      if (detail::argmax_smallest(p) == data.labels[i]) ++correct;
    }
    if (!std::isfinite(loss)) {
      throw DivergenceError("training diverged: loss is not finite at epoch " +
                            std::to_string(epoch));
    }
    stats.train_nll = loss;
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (test_data != nullptr) {
      stats.has_test = true;
      stats.test_accuracy = accuracy(m, *test_data);
    }
    record.epochs.push_back(stats);
    if (observer) observer(stats);

    if (epoch >= 2 && std::abs(loss - prev_nll) < cfg.tol) break;
    prev_nll = loss;
  }

  record.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return record;
}

}  // namespace rankr
