// Command-line front end: training, evaluation, rank sweeps, parameter
// tables, network conversion, gradient checking, and synthetic data tools.
// Exit codes: 0 success, 2 invalid usage or validation failure, 3 runtime
// failure (I/O, divergence, failed verification).
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rankr/data.hpp"
#include "rankr/equivalence.hpp"
#include "rankr/experiment.hpp"
#include "rankr/model.hpp"
#include "rankr/rng.hpp"
#include "rankr/serialize.hpp"
#include "rankr/stats.hpp"
#include "rankr/train.hpp"

namespace {

using rankr::detail::format_double;

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

rankr::TrainConfig::Mode parse_mode(const std::string& name) {
  if (name == "alternating") return rankr::TrainConfig::Mode::kAlternating;
  if (name == "joint") return rankr::TrainConfig::Mode::kJoint;
  throw std::invalid_argument("unknown training mode: " + name);
}

/// Options shared by every subcommand that consumes a labeled dataset.
struct DataOpts {
  std::string cube;
  std::size_t patch_size = 5;
  std::vector<std::size_t> synth_shape{5, 5, 8};
  std::size_t synth_classes = 3;
  std::size_t synth_per_class = 80;
  double synth_noise_std = 0.1;
  std::uint64_t synth_seed = 42;
};

void add_data_options(CLI::App* sub, DataOpts& d) {
  sub->add_option("--cube", d.cube, "labeled cube file; omitting it selects the synthetic task");
  sub->add_option("--patch-size", d.patch_size, "odd window size for cube patch extraction")
      ->capture_default_str();
  sub->add_option("--synth-shape", d.synth_shape, "synthetic sample shape")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--synth-classes", d.synth_classes, "synthetic class count")
      ->capture_default_str();
  sub->add_option("--synth-per-class", d.synth_per_class, "synthetic samples per class")
      ->capture_default_str();
  sub->add_option("--synth-noise-std", d.synth_noise_std, "synthetic additive noise scale")
      ->capture_default_str();
  sub->add_option("--synth-seed", d.synth_seed, "synthetic generation seed")
      ->capture_default_str();
}

rankr::LabeledPatchSet load_dataset(const DataOpts& d) {
  if (!d.cube.empty()) {
    return rankr::extract_patches(rankr::load_cube(d.cube), d.patch_size);
  }
  return rankr::make_synthetic_task(d.synth_seed, d.synth_per_class, d.synth_shape,
                                    d.synth_classes, d.synth_noise_std)
      .set;
}

// ---------------------------------------------------------------- train --

struct TrainOpts {
  DataOpts data;
  std::size_t alpha = 10;
  std::uint64_t split_seed = 0;
  double noise_level = 0.0;
  std::size_t rank = 1;
  std::size_t hidden = 75;
  std::string activation = "sigmoid";
  std::string mode = "alternating";
  double lr = 0.05;
  std::size_t epochs = 50;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::string model_out;
};

int run_train(const TrainOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  const rankr::LabeledPatchSet all = load_dataset(o.data);
  if (all.size() == 0) throw std::invalid_argument("dataset has no labeled samples");
  auto [train_set, test_set] = rankr::split_per_class(all, o.alpha, o.split_seed);
  if (train_set.size() == 0 || test_set.size() == 0) {
    throw std::invalid_argument("split produced an empty train or test set");
  }
  if (o.noise_level > 0.0) {
    train_set = rankr::add_noise(train_set, o.noise_level,
                                 rankr::mix_seed(o.split_seed, rankr::kNoiseTag));
  }

  rankr::ModelConfig cfg;
  cfg.input_shape = all.patches.front().shape();
  cfg.rank = o.rank;
  cfg.hidden = o.hidden;
  cfg.classes = all.classes;
  cfg.activation = rankr::parse_activation(o.activation);
  cfg.seed = o.seed;
  rankr::RankRModel model = rankr::init_weights(cfg);

  rankr::TrainConfig tc;
  tc.learning_rate = o.lr;
  tc.max_epochs = o.epochs;
  tc.tol = o.tol;
  tc.mode = parse_mode(o.mode);
  tc.seed = o.seed;

  std::cout << "epoch,train_nll,train_acc,test_acc\n";
  const rankr::RunRecord record =
      rankr::train(model, train_set, tc, &test_set, [](const rankr::EpochStats& s) {
        std::cout << s.epoch << "," << format_double(s.train_nll) << ","
                  << format_double(s.train_accuracy) << "," << format_double(s.test_accuracy)
                  << "\n";
      });

  if (!o.model_out.empty()) {
    rankr::save_model(model, o.model_out);
    std::cerr << "saved model to " << o.model_out << "\n";
  }
  std::cerr << "trained " << record.epochs.size() << " epochs on " << train_set.size()
            << " samples in " << seconds_since(start) << " s\n";
  return 0;
}

// ----------------------------------------------------------------- eval --

struct EvalOpts {
  DataOpts data;
  std::string model_path;
};

int run_eval(const EvalOpts& o) {
  const rankr::LabeledPatchSet all = load_dataset(o.data);
  if (all.size() == 0) throw std::invalid_argument("dataset has no labeled samples");

  double total_nll = 0.0;
  double acc = 0.0;
  const rankr::ParamFamily family = rankr::peek_model_family(o.model_path);
  if (family == rankr::ParamFamily::kRankR) {
    const rankr::RankRModel model = rankr::load_model(o.model_path);
    acc = rankr::accuracy(model, all);
    total_nll = rankr::nll(model, all);
  } else {
    const rankr::Fcfnn f = rankr::load_fcfnn(o.model_path);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      const std::vector<double> p = rankr::fcfnn_forward(f, all.patches[i]);
      std::size_t best = 0;
      for (std::size_t k = 1; k < p.size(); ++k) {
        if (p[k] > p[best]) best = k;
      }
      if (best == all.labels[i]) ++correct;
      total_nll -= std::log(std::max(p[all.labels[i]], rankr::kProbFloor));
    }
    acc = static_cast<double>(correct) / static_cast<double>(all.size());
  }

  std::cout << "samples,accuracy,mean_nll\n";
  std::cout << all.size() << "," << format_double(acc) << ","
            << format_double(total_nll / static_cast<double>(all.size())) << "\n";
  return 0;
}

// ----------------------------------------------------------- experiment --

struct ExperimentOpts {
  DataOpts data;
  rankr::ExperimentSpec spec;
  std::string activation = "sigmoid";
  std::string mode = "alternating";
};

int run_experiment_cmd(ExperimentOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  o.spec.cube_path = o.data.cube;
  o.spec.patch_size = o.data.patch_size;
  o.spec.synth.shape = o.data.synth_shape;
  o.spec.synth.classes = o.data.synth_classes;
  o.spec.synth.n_per_class = o.data.synth_per_class;
  o.spec.synth.noise_std = o.data.synth_noise_std;
  o.spec.activation = rankr::parse_activation(o.activation);
  o.spec.mode = parse_mode(o.mode);

  const rankr::AggregateResult result = rankr::run_experiment(o.spec, std::cout);

  const std::filesystem::path dir(o.spec.output_dir);
  std::cerr << "wrote " << (dir / "runs.csv").string() << "\n";
  std::cerr << "wrote " << (dir / "aggregate.csv").string() << "\n";
  if (o.spec.ranks.size() >= 2) {
    try {
      const rankr::SignificanceReport report = rankr::compare_to_first_rank(result);
      rankr::detail::write_text_file((dir / "significance.csv").string(),
                                     rankr::significance_csv(report));
      std::cerr << "wrote " << (dir / "significance.csv").string() << "\n";
    } catch (const std::invalid_argument& e) {
      std::cerr << "significance tests skipped: " << e.what() << "\n";
    }
  }
  std::cerr << "experiment finished in " << seconds_since(start) << " s\n";
  return 0;
}

// ----------------------------------------------------------- param-table --

struct ParamTableOpts {
  std::size_t hidden = 75;
  std::size_t max_rank = 5;
  std::string output;
};

int run_param_table(const ParamTableOpts& o) {
  const std::string csv = rankr::param_table(rankr::default_param_table_configs(), o.hidden,
                                             o.max_rank);
  std::cout << csv;
  if (!o.output.empty()) {
    rankr::detail::write_text_file(o.output, csv);
    std::cerr << "wrote " << o.output << "\n";
  }
  return 0;
}

// --------------------------------------------------------- convert-fcfnn --

struct ConvertOpts {
  std::string input;
  std::vector<std::size_t> shape;
  std::string output;
  std::size_t trials = 1000;
  std::uint64_t seed = 7;
  double threshold = 1e-10;
};

int run_convert(const ConvertOpts& o) {
  const rankr::Fcfnn f = rankr::load_fcfnn(o.input);
  const rankr::RankRModel m = rankr::fcfnn_to_rankr(f, o.shape);
  const rankr::EquivalenceReport report =
      rankr::verify_equivalence(f, m, o.trials, o.seed, o.threshold);

  std::cout << "rank,max_abs_gap,pass\n";
  std::cout << m.config.rank << "," << format_double(report.max_abs_gap) << ","
            << (report.pass ? 1 : 0) << "\n";
  if (!o.output.empty()) {
    rankr::save_model(m, o.output);
    std::cerr << "saved converted model to " << o.output << "\n";
  }
  if (!report.pass) {
    std::cerr << "equivalence verification failed: gap " << report.max_abs_gap
              << " exceeds threshold " << o.threshold << "\n";
    return 3;
  }
  return 0;
}

// -------------------------------------------------------------- gradcheck --

struct GradCheckOpts {
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  double h = 1e-5;
  double tolerance = 1e-4;
};

rankr::ModelConfig gradcheck_config(std::size_t trial) {
  rankr::ModelConfig cfg;
  switch (trial % 3) {
    case 0: cfg.input_shape = {2, 3}; break;
    case 1: cfg.input_shape = {3, 2, 4}; break;
    default: cfg.input_shape = {2, 2, 2, 3}; break;
  }
  cfg.rank = 1 + trial % 3;
  cfg.hidden = 1 + trial % 2;
  cfg.classes = 2 + trial % 2;
  switch (trial % 3) {
    case 0: cfg.activation = rankr::Activation::kSigmoid; break;
    case 1: cfg.activation = rankr::Activation::kTanh; break;
    default: cfg.activation = rankr::Activation::kRelu; break;
  }
  return cfg;
}

double norm_ratio_gap(const rankr::Matrix& analytic, const rankr::Matrix& fd) {
  double diff = 0.0, na = 0.0, nf = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double d = analytic.data()[i] - fd.data()[i];
    diff += d * d;
    na += analytic.data()[i] * analytic.data()[i];
    nf += fd.data()[i] * fd.data()[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nf), 1e-12);
}

int run_gradcheck(const GradCheckOpts& o) {
  if (o.trials == 0) throw std::invalid_argument("gradcheck: trials must be positive");
  if (!(o.h > 0.0) || !(o.tolerance > 0.0)) {
    throw std::invalid_argument("gradcheck: step and tolerance must be positive");
  }
  rankr::Rng rng(o.seed);
  bool all_pass = true;
  std::cout << "trial,worst_rel_gap,pass\n";
  for (std::size_t trial = 0; trial < o.trials; ++trial) {
    rankr::ModelConfig cfg = gradcheck_config(trial);
    cfg.seed = rng.next_u64();
    rankr::RankRModel m = rankr::init_weights(cfg);

    rankr::LabeledPatchSet data;
    data.classes = cfg.classes;
    for (int i = 0; i < 4; ++i) {
      rankr::DenseTensor x(cfg.input_shape);
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.gaussian();
      data.patches.push_back(x);
      data.labels.push_back(rng.bounded(cfg.classes));
    }

    double worst = 0.0;
    for (std::size_t q = 0; q < cfg.hidden; ++q) {
      for (std::size_t d = 0; d < cfg.input_shape.size(); ++d) {
        const rankr::Matrix analytic = rankr::grad_factor(m, data, q, d);
        rankr::Matrix fd(analytic.rows(), analytic.cols());
        for (std::size_t i = 0; i < fd.size(); ++i) {
          double& w = m.hidden_weights[q].factors[d].data()[i];
          const double saved = w;
          w = saved + o.h;
          const double up = rankr::nll(m, data);
          w = saved - o.h;
          const double down = rankr::nll(m, data);
          w = saved;
          fd.data()[i] = (up - down) / (2.0 * o.h);
        }
        worst = std::max(worst, norm_ratio_gap(analytic, fd));
      }
    }
    {
      const rankr::Matrix analytic = rankr::grad_output(m, data);
      rankr::Matrix fd(analytic.rows(), analytic.cols());
      for (std::size_t i = 0; i < fd.size(); ++i) {
        double& w = m.output_weights.data()[i];
        const double saved = w;
        w = saved + o.h;
        const double up = rankr::nll(m, data);
        w = saved - o.h;
        const double down = rankr::nll(m, data);
        w = saved;
        fd.data()[i] = (up - down) / (2.0 * o.h);
      }
      worst = std::max(worst, norm_ratio_gap(analytic, fd));
    }

    const bool pass = worst <= o.tolerance;
    all_pass = all_pass && pass;
    std::cout << trial << "," << format_double(worst) << "," << (pass ? 1 : 0) << "\n";
  }
  if (!all_pass) {
    std::cerr << "gradient check failed\n";
    return 3;
  }
  return 0;
}

// -------------------------------------------------------------- synth-data --

struct SynthDataOpts {
  std::size_t height = 60;
  std::size_t width = 40;
  std::size_t bands = 8;
  std::size_t classes = 3;
  std::uint64_t seed = 42;
  std::string output;
};

int run_synth_data(const SynthDataOpts& o) {
  const rankr::HsiCube cube =
      rankr::make_synthetic_cube(o.seed, o.height, o.width, o.bands, o.classes);
  rankr::save_cube(cube, o.output);
  std::cout << "height,width,bands,classes\n";
  std::cout << cube.height << "," << cube.width << "," << cube.bands << "," << cube.classes
            << "\n";
  std::cerr << "wrote " << o.output << "\n";
  return 0;
}

// ------------------------------------------------------------------ noise --

struct NoiseOpts {
  std::string input;
  std::string output;
  double level = 0.0;
  std::uint64_t seed = 0;
};

/// Adds zero-mean gaussian noise scaled per band by level times that band's
/// population standard deviation over all pixels. Draw order: band outer,
/// pixels in row-major order. Level 0 copies the cube bit for bit.
int run_noise(const NoiseOpts& o) {
  if (!(o.level >= 0.0) || !std::isfinite(o.level)) {
    throw std::invalid_argument("noise: level must be finite and nonnegative");
  }
  rankr::HsiCube cube = rankr::load_cube(o.input);
  if (o.level > 0.0) {
    const std::size_t pixels = cube.height * cube.width;
    rankr::Rng rng(o.seed);
    for (std::size_t b = 0; b < cube.bands; ++b) {
      double mean = 0.0;
      for (std::size_t p = 0; p < pixels; ++p) {
        mean += cube.values[p * cube.bands + b];
      }
      mean /= static_cast<double>(pixels);
      double ss = 0.0;
      for (std::size_t p = 0; p < pixels; ++p) {
        const double d = cube.values[p * cube.bands + b] - mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(pixels));
      for (std::size_t p = 0; p < pixels; ++p) {
        float& v = cube.values[p * cube.bands + b];
        v = static_cast<float>(v + o.level * sd * rng.gaussian());
      }
    }
  }
  rankr::save_cube(cube, o.output);
  std::cout << "bands,level\n";
  std::cout << cube.bands << "," << format_double(o.level) << "\n";
  std::cerr << "wrote " << o.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rank tensor classifier toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "read options from a key=value file; subcommand options go "
                 "under a [subcommand] section");
  app.allow_config_extras(CLI::config_extras_mode::error);

  int exit_code = 0;

  TrainOpts train_opts;
  CLI::App* train_cmd = app.add_subcommand("train", "train a factored model on a split");
  add_data_options(train_cmd, train_opts.data);
  train_cmd->add_option("--alpha", train_opts.alpha, "training samples per class")
      ->capture_default_str();
  train_cmd->add_option("--split-seed", train_opts.split_seed, "train/test split seed")
      ->capture_default_str();
  train_cmd->add_option("--noise-level", train_opts.noise_level,
                        "gaussian noise level applied to the training split")
      ->capture_default_str();
  train_cmd->add_option("--rank", train_opts.rank, "components per hidden weight")
      ->capture_default_str();
  train_cmd->add_option("--hidden", train_opts.hidden, "hidden neurons")->capture_default_str();
  train_cmd->add_option("--activation", train_opts.activation, "hidden activation")
      ->check(CLI::IsMember({"sigmoid", "tanh", "relu"}))
      ->capture_default_str();
  train_cmd->add_option("--mode", train_opts.mode, "update schedule")
      ->check(CLI::IsMember({"alternating", "joint"}))
      ->capture_default_str();
  train_cmd->add_option("--lr", train_opts.lr, "learning rate")->capture_default_str();
  train_cmd->add_option("--epochs", train_opts.epochs, "maximum epochs")->capture_default_str();
  train_cmd->add_option("--tol", train_opts.tol, "stop when the loss change drops below this")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_opts.seed, "weight initialization seed")
      ->capture_default_str();
  train_cmd->add_option("--model-out", train_opts.model_out, "write the trained model here");
  train_cmd->callback([&] { exit_code = run_train(train_opts); });

  EvalOpts eval_opts;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a saved model on a dataset");
  add_data_options(eval_cmd, eval_opts.data);
  eval_cmd->add_option("--model", eval_opts.model_path, "model file to evaluate")->required();
  eval_cmd->callback([&] { exit_code = run_eval(eval_opts); });

  ExperimentOpts exp_opts;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "rank sweep with per-epoch CSV output");
  add_data_options(exp_cmd, exp_opts.data);
  exp_cmd->add_option("--ranks", exp_opts.spec.ranks, "ranks to sweep")
      ->delimiter(',')
      ->capture_default_str();
  exp_cmd->add_option("--hidden", exp_opts.spec.hidden, "hidden neurons")->capture_default_str();
  exp_cmd->add_option("--alpha", exp_opts.spec.alpha, "training samples per class")
      ->capture_default_str();
  exp_cmd->add_option("--noise-level", exp_opts.spec.noise_level,
                      "gaussian noise level applied to each training split")
      ->capture_default_str();
  exp_cmd->add_option("--runs", exp_opts.spec.runs, "independent runs per rank")
      ->capture_default_str();
  exp_cmd->add_option("--checkpoints", exp_opts.spec.checkpoints,
                      "epochs at which test accuracy enters the aggregate")
      ->delimiter(',')
      ->capture_default_str();
  exp_cmd->add_option("--lr", exp_opts.spec.learning_rate, "learning rate")
      ->capture_default_str();
  exp_cmd->add_option("--tol", exp_opts.spec.tol, "early-stopping tolerance")
      ->capture_default_str();
  exp_cmd->add_option("--activation", exp_opts.activation, "hidden activation")
      ->check(CLI::IsMember({"sigmoid", "tanh", "relu"}))
      ->capture_default_str();
  exp_cmd->add_option("--mode", exp_opts.mode, "update schedule")
      ->check(CLI::IsMember({"alternating", "joint"}))
      ->capture_default_str();
  exp_cmd->add_option("--base-seed", exp_opts.spec.base_seed, "seed every run derives from")
      ->capture_default_str();
  exp_cmd->add_option("--output-dir", exp_opts.spec.output_dir, "directory for CSV outputs")
      ->required();
  exp_cmd->callback([&] { exit_code = run_experiment_cmd(exp_opts); });

  ParamTableOpts pt_opts;
  CLI::App* pt_cmd = app.add_subcommand("param-table", "trainable parameter counts per rank");
  pt_cmd->add_option("--hidden", pt_opts.hidden, "hidden neurons")->capture_default_str();
  pt_cmd->add_option("--max-rank", pt_opts.max_rank, "largest rank column")
      ->capture_default_str();
  pt_cmd->add_option("--output", pt_opts.output, "also write the table here");
  pt_cmd->callback([&] { exit_code = run_param_table(pt_opts); });

  ConvertOpts conv_opts;
  CLI::App* conv_cmd =
      app.add_subcommand("convert-fcfnn", "convert a flat network to an exact factored model");
  conv_cmd->add_option("--input", conv_opts.input, "flat network model file")->required();
  conv_cmd->add_option("--shape", conv_opts.shape, "tensor shape to fold inputs into")
      ->delimiter(',')
      ->required();
  conv_cmd->add_option("--output", conv_opts.output, "write the converted model here");
  conv_cmd->add_option("--trials", conv_opts.trials, "random inputs for verification")
      ->capture_default_str();
  conv_cmd->add_option("--seed", conv_opts.seed, "verification input seed")
      ->capture_default_str();
  conv_cmd->add_option("--threshold", conv_opts.threshold, "verification gap threshold")
      ->capture_default_str();
  conv_cmd->callback([&] { exit_code = run_convert(conv_opts); });

  GradCheckOpts gc_opts;
  CLI::App* gc_cmd =
      app.add_subcommand("gradcheck", "compare analytic gradients with finite differences");
  gc_cmd->add_option("--trials", gc_opts.trials, "randomized configurations to test")
      ->capture_default_str();
  gc_cmd->add_option("--seed", gc_opts.seed, "randomization seed")->capture_default_str();
  gc_cmd->add_option("--step", gc_opts.h, "finite-difference step")->capture_default_str();
  gc_cmd->add_option("--tolerance", gc_opts.tolerance, "largest acceptable relative gap")
      ->capture_default_str();
  gc_cmd->callback([&] { exit_code = run_gradcheck(gc_opts); });

  SynthDataOpts sd_opts;
  CLI::App* sd_cmd = app.add_subcommand("synth-data", "generate a labeled synthetic cube");
  sd_cmd->add_option("--height", sd_opts.height, "cube height")->capture_default_str();
  sd_cmd->add_option("--width", sd_opts.width, "cube width")->capture_default_str();
  sd_cmd->add_option("--bands", sd_opts.bands, "spectral bands")->capture_default_str();
  sd_cmd->add_option("--classes", sd_opts.classes, "class count")->capture_default_str();
  sd_cmd->add_option("--seed", sd_opts.seed, "generation seed")->capture_default_str();
  sd_cmd->add_option("--output", sd_opts.output, "cube file to write")->required();
  sd_cmd->callback([&] { exit_code = run_synth_data(sd_opts); });

  NoiseOpts noise_opts;
  CLI::App* noise_cmd =
      app.add_subcommand("noise", "add band-scaled gaussian noise to a cube");
  noise_cmd->add_option("--input", noise_opts.input, "cube file to read")->required();
  noise_cmd->add_option("--output", noise_opts.output, "cube file to write")->required();
  noise_cmd->add_option("--level", noise_opts.level, "noise level in band standard deviations")
      ->capture_default_str();
  noise_cmd->add_option("--seed", noise_opts.seed, "noise seed")->capture_default_str();
  noise_cmd->callback([&] { exit_code = run_noise(noise_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return exit_code;
}
