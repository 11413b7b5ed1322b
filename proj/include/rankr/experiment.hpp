#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankr/data.hpp"
#include "rankr/model.hpp"
#include "rankr/rng.hpp"
#include "rankr/stats.hpp"
#include "rankr/train.hpp"

namespace rankr {

/// Seed discipline: every random choice in an experiment is derived from
/// base_seed. Run r splits (and, when enabled, perturbs) the data with
/// seed base_seed + r, identically across ranks, so models of different
/// rank see the same data partitions; the weight initialization for
/// (rank, run) uses mix_seed(base_seed + r, rank).
constexpr std::uint64_t kSynthDataTag = 0x64617461;  // spells "data"
constexpr std::uint64_t kNoiseTag = 0x6e6f6973;      // spells "nois"

/// Parameters of the built-in synthetic classification task, used whenever
/// no cube path is given. The generation seed derives from base_seed.
struct SynthSpec {
  std::size_t n_per_class = 80;
  std::vector<std::size_t> shape{5, 5, 8};
  std::size_t classes = 3;
  double noise_std = 0.1;
};

struct ExperimentSpec {
  std::string cube_path;  // empty selects the synthetic task
  std::size_t patch_size = 5;
  SynthSpec synth;
  std::vector<std::size_t> ranks{1, 2, 3, 4, 5};
  std::size_t hidden = 75;
  std::size_t alpha = 10;
  double noise_level = 0.0;
  std::size_t runs = 10;
  std::vector<std::size_t> checkpoints{50, 500};
  double learning_rate = 0.05;
  double tol = 0.0;  // zero runs every epoch, keeping epoch counts identical
  Activation activation = Activation::kSigmoid;
  TrainConfig::Mode mode = TrainConfig::Mode::kAlternating;
  std::uint64_t base_seed = 0;
  std::string output_dir;

  std::size_t max_epochs() const {
    return *std::max_element(checkpoints.begin(), checkpoints.end());
  }

  void validate() const {
    if (runs < 1) throw std::invalid_argument("experiment: runs must be at least 1");
    if (ranks.empty()) throw std::invalid_argument("experiment: ranks must be nonempty");
    for (std::size_t r : ranks) {
      if (r == 0) throw std::invalid_argument("experiment: rank 0 is not a model");
    }
    if (checkpoints.empty()) {
      throw std::invalid_argument("experiment: checkpoints must be nonempty");
    }
    for (std::size_t c : checkpoints) {
      if (c == 0) throw std::invalid_argument("experiment: checkpoint epochs are 1-based");
    }
    if (hidden == 0) throw std::invalid_argument("experiment: hidden width must be positive");
    if (alpha == 0) throw std::invalid_argument("experiment: alpha must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw std::invalid_argument("experiment: learning rate must be finite and nonnegative");
    }
    if (!(tol >= 0.0) || !std::isfinite(tol)) {
      throw std::invalid_argument("experiment: tolerance must be finite and nonnegative");
    }
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
      throw std::invalid_argument("experiment: noise level must be finite and nonnegative");
    }
    if (output_dir.empty()) throw std::invalid_argument("experiment: output directory required");
    if (cube_path.empty()) {
      if (synth.classes < 2) throw std::invalid_argument("experiment: synthetic classes < 2");
      if (synth.n_per_class == 0) {
        throw std::invalid_argument("experiment: synthetic samples per class must be positive");
      }
    }
  }
};

/// Accuracies of one (rank, checkpoint) cell across completed runs, with
/// their mean and (n-1)-divisor standard deviation.
struct RankCheckpointCell {
  std::size_t rank = 0;
  std::size_t checkpoint = 0;
  std::vector<double> raw;  // run order; failed runs never appear
  std::size_t runs_completed = 0;
  double mean_test_acc = 0.0;
  double std_test_acc = 0.0;
};

struct AggregateResult {
  std::vector<std::size_t> ranks;
  std::vector<std::size_t> checkpoints;
  std::vector<RankCheckpointCell> cells;  // rank-major, checkpoint-minor
  std::vector<std::string> warnings;      // one line per failed run

  const RankCheckpointCell& cell(std::size_t rank, std::size_t checkpoint) const {
    for (const auto& c : cells) {
      if (c.rank == rank && c.checkpoint == checkpoint) return c;
    }
    throw std::invalid_argument("aggregate: no such (rank, checkpoint) cell");
  }
};

inline double sample_mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

/// Standard deviation with the n-1 divisor; a single observation has none
/// and reports 0.
inline double sample_stddev(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace detail {

/// Shortest round-trippable decimal form, stable across platforms for the
/// same bits; all CSV doubles go through here so reruns are byte-identical.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create output file: " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

inline LabeledPatchSet experiment_dataset(const ExperimentSpec& spec) {
  if (!spec.cube_path.empty()) {
    const HsiCube cube = load_cube(spec.cube_path);
    return extract_patches(cube, spec.patch_size);
  }
  const SynthTask task =
      make_synthetic_task(mix_seed(spec.base_seed, kSynthDataTag), spec.synth.n_per_class,
                          spec.synth.shape, spec.synth.classes, spec.synth.noise_std);
  return task.set;
}

}  // namespace detail

/// Banner lines describing the configuration, including exact trainable
/// parameter counts for every swept rank and for the flat baseline. The
/// flat network stands in for convolutional baselines at order-of-magnitude
/// level only, and the banner says so.
inline std::string experiment_banner(const ExperimentSpec& spec,
                                     const std::vector<std::size_t>& shape,
                                     std::size_t classes) {
  std::ostringstream out;
  out << "# rank sweep experiment\n";
  if (spec.cube_path.empty()) {
    out << "# dataset: synthetic task, shape ";
  } else {
    out << "# dataset: " << spec.cube_path << ", patch shape ";
  }
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << "x";
    out << shape[i];
  }
  out << ", classes " << classes << "\n";
  out << "# hidden " << spec.hidden << ", alpha " << spec.alpha << ", runs " << spec.runs
      << ", noise level " << detail::format_double(spec.noise_level) << "\n";
  out << "# learning rate " << detail::format_double(spec.learning_rate) << ", checkpoints";
  for (std::size_t c : spec.checkpoints) out << " " << c;
  out << ", base seed " << spec.base_seed << "\n";

  ModelConfig cfg;
  cfg.input_shape = shape;
  cfg.hidden = spec.hidden;
  cfg.classes = classes;
  out << "# parameter counts: fcfnn=" << param_count(cfg, ParamFamily::kFcfnn);
  for (std::size_t r : spec.ranks) {
    cfg.rank = r;
    out << " rank" << r << "=" << param_count(cfg, ParamFamily::kRankR);
  }
  out << "\n";
  out << "# note: the fully connected baseline replaces convolutional baselines "
         "at order-of-magnitude level only\n";
  return out.str();
}

/// Sweeps every (rank, run) pair on a shared sequence of data splits,
/// training to the last checkpoint epoch, and writes runs.csv (one row per
/// epoch) plus aggregate.csv (one row per rank and checkpoint) into
/// spec.output_dir. A diverged run is excluded from the aggregate and
/// reported in warnings; its completed epochs stay in runs.csv.
inline AggregateResult run_experiment(const ExperimentSpec& spec, std::ostream& log) {
  spec.validate();
  const LabeledPatchSet all = detail::experiment_dataset(spec);
  if (all.size() == 0) throw std::runtime_error("experiment: dataset is empty");
  const std::vector<std::size_t> shape = all.patches.front().shape();
  const std::size_t max_epochs = spec.max_epochs();

  std::filesystem::create_directories(spec.output_dir);
  const std::string banner = experiment_banner(spec, shape, all.classes);
  log << banner;

  AggregateResult result;
  result.ranks = spec.ranks;
  result.checkpoints = spec.checkpoints;

  std::ostringstream runs_csv;
  runs_csv << "rank,run,epoch,train_nll,train_acc,test_acc\n";

  for (std::size_t rank : spec.ranks) {
    std::vector<std::vector<double>> per_checkpoint(spec.checkpoints.size());
    for (std::size_t r = 0; r < spec.runs; ++r) {
      auto [train_set, test_set] = split_per_class(all, spec.alpha, spec.base_seed + r);
      if (train_set.size() == 0 || test_set.size() == 0) {
        throw std::runtime_error("experiment: split produced an empty train or test set");
      }
      if (spec.noise_level > 0.0) {
        train_set =
            add_noise(train_set, spec.noise_level, mix_seed(spec.base_seed + r, kNoiseTag));
      }

      ModelConfig cfg;
      cfg.input_shape = shape;
      cfg.rank = rank;
      cfg.hidden = spec.hidden;
      cfg.classes = all.classes;
      cfg.activation = spec.activation;
      cfg.seed = mix_seed(spec.base_seed + r, rank);
      RankRModel model = init_weights(cfg);

      TrainConfig tc;
      tc.learning_rate = spec.learning_rate;
      tc.max_epochs = max_epochs;
      tc.tol = spec.tol;
      tc.mode = spec.mode;
      tc.seed = cfg.seed;

      std::vector<EpochStats> history;
      history.reserve(max_epochs);
      bool failed = false;
      try {
        train(model, train_set, tc, &test_set, [&](const EpochStats& s) {
          history.push_back(s);
          runs_csv << rank << "," << r << "," << s.epoch << ","
                   << detail::format_double(s.train_nll) << ","
                   << detail::format_double(s.train_accuracy) << ","
                   << detail::format_double(s.test_accuracy) << "\n";
        });
      } catch (const DivergenceError& e) {
        failed = true;
        result.warnings.push_back("rank " + std::to_string(rank) + " run " +
                                  std::to_string(r) + " diverged: " + e.what());
      }
      if (failed || history.empty()) continue;

      // A run that converged before a checkpoint holds its final accuracy.
      for (std::size_t c = 0; c < spec.checkpoints.size(); ++c) {
        const std::size_t epoch = std::min(spec.checkpoints[c], history.size());
        per_checkpoint[c].push_back(history[epoch - 1].test_accuracy);
      }
    }

    for (std::size_t c = 0; c < spec.checkpoints.size(); ++c) {
      RankCheckpointCell cell;
      cell.rank = rank;
      cell.checkpoint = spec.checkpoints[c];
      cell.raw = per_checkpoint[c];
      cell.runs_completed = cell.raw.size();
      if (!cell.raw.empty()) {
        cell.mean_test_acc = sample_mean(cell.raw);
        cell.std_test_acc = sample_stddev(cell.raw, cell.mean_test_acc);
      }
      result.cells.push_back(cell);
    }
  }

  for (const std::string& w : result.warnings) log << "# warning: " << w << "\n";

  std::ostringstream agg_csv;
  agg_csv << "rank,checkpoint,runs_completed,mean_test_acc,std_test_acc\n";
  for (const RankCheckpointCell& cell : result.cells) {
    agg_csv << cell.rank << "," << cell.checkpoint << "," << cell.runs_completed << ","
            << detail::format_double(cell.mean_test_acc) << ","
            << detail::format_double(cell.std_test_acc) << "\n";
  }

  const std::filesystem::path dir(spec.output_dir);
  detail::write_text_file((dir / "runs.csv").string(), runs_csv.str());
  detail::write_text_file((dir / "aggregate.csv").string(), agg_csv.str());
  detail::write_text_file((dir / "banner.txt").string(), banner);
  return result;
}

struct SignificanceRow {
  std::size_t rank = 0;
  std::size_t checkpoint = 0;
  double p_welch = 1.0;
  double p_mwu = 1.0;
  bool reject = false;
};

struct SignificanceReport {
  double alpha_sig = 0.05;
  std::vector<SignificanceRow> rows;
};

namespace detail {

/// Two-sided p-values for one pair of accuracy samples. Constant samples
/// sidestep the t-test: equal means keep the null (p 1), distinct constant
/// means reject it outright (p 0).
inline void cell_significance(const std::vector<double>& raw_a,
                              const std::vector<double>& raw_b, SignificanceRow& row) {
  if (raw_a.size() != raw_b.size()) {
    throw std::invalid_argument("compare_models: runs count differs between results");
  }
  if (raw_a.empty()) {
    throw std::invalid_argument("compare_models: cell has no completed runs");
  }
  const double mean_a = sample_mean(raw_a);
  const double mean_b = sample_mean(raw_b);
  const bool no_spread_a = sample_stddev(raw_a, mean_a) == 0.0;
  const bool no_spread_b = sample_stddev(raw_b, mean_b) == 0.0;
  if (raw_a.size() < 2 || (no_spread_a && no_spread_b)) {
    row.p_welch = mean_a == mean_b ? 1.0 : 0.0;
  } else {
    row.p_welch = welch_t_test(raw_a, raw_b).p_value;
  }
  row.p_mwu = mann_whitney_u_test(raw_a, raw_b).p_value;
}

}  // namespace detail

/// Per-cell hypothesis tests between two sweeps of the same layout. Both
/// tests must agree (p below alpha_sig) before a difference counts as
/// significant.
inline SignificanceReport compare_models(const AggregateResult& a, const AggregateResult& b,
                                         double alpha_sig = 0.05) {
  if (a.ranks != b.ranks || a.checkpoints != b.checkpoints) {
    throw std::invalid_argument("compare_models: result layouts differ");
  }
  if (a.cells.size() != b.cells.size()) {
    throw std::invalid_argument("compare_models: result layouts differ");
  }
  if (!(alpha_sig > 0.0) || !(alpha_sig < 1.0)) {
    throw std::invalid_argument("compare_models: significance level must lie in (0, 1)");
  }

  SignificanceReport report;
  report.alpha_sig = alpha_sig;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const RankCheckpointCell& ca = a.cells[i];
    const RankCheckpointCell& cb = b.cells[i];
    if (ca.rank != cb.rank || ca.checkpoint != cb.checkpoint) {
      throw std::invalid_argument("compare_models: result layouts differ");
    }
    SignificanceRow row;
    row.rank = ca.rank;
    row.checkpoint = ca.checkpoint;
    detail::cell_significance(ca.raw, cb.raw, row);
    row.reject = row.p_welch < alpha_sig && row.p_mwu < alpha_sig;
    report.rows.push_back(row);
  }
  return report;
}

/// Within one sweep, tests every later rank's accuracies against the first
/// rank's at each checkpoint; rows are labeled by the candidate rank.
inline SignificanceReport compare_to_first_rank(const AggregateResult& result,
                                                double alpha_sig = 0.05) {
  if (result.ranks.size() < 2) {
    throw std::invalid_argument("compare_to_first_rank: needs at least two ranks");
  }
  if (!(alpha_sig > 0.0) || !(alpha_sig < 1.0)) {
    throw std::invalid_argument("compare_to_first_rank: significance level must lie in (0, 1)");
  }
  SignificanceReport report;
  report.alpha_sig = alpha_sig;
  const std::size_t base_rank = result.ranks.front();
  for (std::size_t i = 1; i < result.ranks.size(); ++i) {
    for (std::size_t checkpoint : result.checkpoints) {
      SignificanceRow row;
      row.rank = result.ranks[i];
      row.checkpoint = checkpoint;
      detail::cell_significance(result.cell(result.ranks[i], checkpoint).raw,
                                result.cell(base_rank, checkpoint).raw, row);
      row.reject = row.p_welch < alpha_sig && row.p_mwu < alpha_sig;
      report.rows.push_back(row);
    }
  }
  return report;
}

inline std::string significance_csv(const SignificanceReport& report) {
  std::ostringstream out;
  out << "rank,checkpoint,p_welch,p_mwu,reject_5pct\n";
  for (const SignificanceRow& row : report.rows) {
    out << row.rank << "," << row.checkpoint << "," << detail::format_double(row.p_welch)
        << "," << detail::format_double(row.p_mwu) << "," << (row.reject ? 1 : 0) << "\n";
  }
  return out.str();
}

/// A named input geometry for the parameter-count table.
struct ParamTableConfig {
  std::string name;
  std::vector<std::size_t> input_shape;
  std::size_t classes = 2;
};

/// The three scene geometries used throughout: 5x5 patches over the band
/// counts and class counts of the standard hyperspectral benchmarks.
inline std::vector<ParamTableConfig> default_param_table_configs() {
  return {
      {"indian_pines", {5, 5, 200}, 16},
      {"botswana", {5, 5, 145}, 14},
      {"pavia_university", {5, 5, 103}, 9},
  };
}

/// Exact trainable-parameter counts per geometry for the flat baseline and
/// ranks 1..max_rank, plus the flat/rank-1 ratio. Counts are integers from
/// the closed-form formulas; the ratio is their exact quotient.
inline std::string param_table(const std::vector<ParamTableConfig>& configs,
                               std::size_t hidden = 75, std::size_t max_rank = 5) {
  if (configs.empty()) throw std::invalid_argument("param_table: no configurations");
  if (max_rank == 0) throw std::invalid_argument("param_table: max_rank must be positive");
  std::ostringstream out;
  out << "# trainable parameter counts; the fully connected baseline replaces "
         "convolutional baselines at order-of-magnitude level only\n";
  out << "name,height,width,bands,classes,hidden,fcfnn";
  for (std::size_t r = 1; r <= max_rank; ++r) out << ",rank" << r;
  out << ",fcfnn_over_rank1\n";
  for (const ParamTableConfig& c : configs) {
    if (c.input_shape.size() != 3) {
      throw std::invalid_argument("param_table: expected height x width x bands shapes");
    }
    ModelConfig cfg;
    cfg.input_shape = c.input_shape;
    cfg.hidden = hidden;
    cfg.classes = c.classes;
    cfg.rank = 1;
    const std::size_t fc = param_count(cfg, ParamFamily::kFcfnn);
    out << c.name << "," << c.input_shape[0] << "," << c.input_shape[1] << ","
        << c.input_shape[2] << "," << c.classes << "," << hidden << "," << fc;
    std::size_t rank1 = 0;
    for (std::size_t r = 1; r <= max_rank; ++r) {
      cfg.rank = r;
      const std::size_t count = param_count(cfg, ParamFamily::kRankR);
      if (r == 1) rank1 = count;
      out << "," << count;
    }
    out << ","
        << detail::format_double(static_cast<double>(fc) / static_cast<double>(rank1))
        << "\n";
  }
  return out.str();
}

}  // namespace rankr
