#include "rankr/model.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rankr/rng.hpp"

namespace {

using rankr::Activation;
using rankr::DenseTensor;
using rankr::Matrix;
using rankr::ModelConfig;
using rankr::RankRModel;
using testing_oracles::rel_gap;

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.input_shape = {2, 3, 4};
  cfg.rank = 2;
  cfg.hidden = 3;
  cfg.classes = 4;
  return cfg;
}

TEST(Activation, KnownValues) {
  EXPECT_DOUBLE_EQ(rankr::activate(Activation::kSigmoid, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(rankr::activate(Activation::kTanh, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(rankr::activate(Activation::kRelu, -1.5), 0.0);
  EXPECT_DOUBLE_EQ(rankr::activate(Activation::kRelu, 2.0), 2.0);
}

TEST(Activation, KnownDerivatives) {
  EXPECT_DOUBLE_EQ(rankr::activate_grad(Activation::kSigmoid, 0.0), 0.25);
  EXPECT_DOUBLE_EQ(rankr::activate_grad(Activation::kTanh, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(rankr::activate_grad(Activation::kRelu, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(rankr::activate_grad(Activation::kRelu, -3.0), 0.0);
  // Subgradient convention at the kink.
  EXPECT_DOUBLE_EQ(rankr::activate_grad(Activation::kRelu, 0.0), 0.0);
}

TEST(Activation, DerivativeMatchesCentralDifference) {
  rankr::Rng rng(101);
  const double h = 1e-6;
  for (Activation a : {Activation::kSigmoid, Activation::kTanh}) {
    for (int i = 0; i < 50; ++i) {
      const double x = rng.uniform(-3.0, 3.0);
      const double fd =
          (rankr::activate(a, x + h) - rankr::activate(a, x - h)) / (2.0 * h);
      EXPECT_NEAR(rankr::activate_grad(a, x), fd, 1e-6);
    }
  }
}

TEST(Activation, NameParseRoundTrip) {
  for (Activation a : {Activation::kSigmoid, Activation::kTanh, Activation::kRelu}) {
    EXPECT_EQ(rankr::parse_activation(rankr::activation_name(a)), a);
  }
  EXPECT_THROW(rankr::parse_activation("swish"), std::invalid_argument);
}

TEST(Softmax, NormalizesAndStaysInUnitInterval) {
  rankr::Rng rng(102);
  for (int trial = 0; trial < 100; ++trial) {
    // Gap kept under ~36 so the dominant probability stays representably
    // below 1.0 in double precision.
    std::vector<double> logits(5);
    for (double& l : logits) l = rng.uniform(-15.0, 15.0);
    const std::vector<double> p = rankr::softmax(logits);
    double sum = 0.0;
    for (double v : p) {
      ASSERT_GT(v, 0.0);
      ASSERT_LT(v, 1.0);
      sum += v;
    }
    ASSERT_LE(std::abs(sum - 1.0), 1e-12);
  }
}

TEST(Softmax, EqualLogitsSplitEvenly) {
  const std::vector<double> p = rankr::softmax({3.7, 3.7});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, SurvivesHugeLogits) {
  const std::vector<double> p = rankr::softmax({1000.0, 1000.5});
  ASSERT_TRUE(std::isfinite(p[0]));
  ASSERT_TRUE(std::isfinite(p[1]));
  EXPECT_LE(std::abs(p[0] + p[1] - 1.0), 1e-12);
  EXPECT_GT(p[1], p[0]);
}

TEST(ModelConfig, ValidationRejectsBadFields) {
  ModelConfig cfg = small_config();
  cfg.input_shape = {5};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.input_shape = {2, 0};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.rank = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.hidden = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.classes = 1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_NO_THROW(small_config().validate());
}

TEST(RankRModel, ZeroConstructionHasDeclaredShapes) {
  const RankRModel m(small_config());
  ASSERT_EQ(m.hidden_weights.size(), 3u);
  for (const auto& w : m.hidden_weights) {
    ASSERT_EQ(w.order(), 3u);
    EXPECT_EQ(w.rank(), 2u);
    EXPECT_EQ(w.shape(), (std::vector<std::size_t>{2, 3, 4}));
  }
  EXPECT_EQ(m.output_weights.rows(), 3u);
  EXPECT_EQ(m.output_weights.cols(), 4u);
}

TEST(ParamCount, FactoredFormula) {
  ModelConfig cfg;
  cfg.input_shape = {5, 5, 103};
  cfg.rank = 1;
  cfg.hidden = 75;
  cfg.classes = 9;
  EXPECT_EQ(rankr::param_count(cfg, rankr::ParamFamily::kRankR), 9150u);
  EXPECT_EQ(rankr::param_count(cfg, rankr::ParamFamily::kFcfnn), 193800u);
  cfg.rank = 2;
  EXPECT_EQ(rankr::param_count(cfg, rankr::ParamFamily::kRankR), 17625u);
}

TEST(ParamCount, FactoredBeatsFullForPatchConfigs) {
  for (std::size_t bands : {200UL, 145UL, 103UL}) {
    ModelConfig cfg;
    cfg.input_shape = {5, 5, bands};
    cfg.hidden = 75;
    cfg.classes = 16;
    for (std::size_t r = 1; r <= 5; ++r) {
      cfg.rank = r;
      EXPECT_LT(rankr::param_count(cfg, rankr::ParamFamily::kRankR),
                rankr::param_count(cfg, rankr::ParamFamily::kFcfnn));
    }
  }
}

TEST(ZExcluding, AllOnesRowSums) {
  ModelConfig cfg;
  cfg.input_shape = {2, 3};
  cfg.rank = 1;
  cfg.hidden = 1;
  cfg.classes = 2;
  RankRModel m(cfg);
  for (auto& f : m.hidden_weights[0].factors) {
    for (double& v : f.data()) v = 1.0;
  }
  DenseTensor x(std::vector<std::size_t>{2, 3});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0;
  const Matrix z = rankr::z_excluding(m, x, 0, 0);
  ASSERT_EQ(z.rows(), 2u);
  ASSERT_EQ(z.cols(), 1u);
  EXPECT_DOUBLE_EQ(z(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(z(1, 0), 3.0);
}

TEST(ZExcluding, ValidatesArguments) {
  rankr::Rng rng(103);
  const RankRModel m = testing_oracles::random_model(small_config(), rng);
  const DenseTensor x = testing_oracles::random_tensor({2, 3, 4}, rng);
  const DenseTensor wrong = testing_oracles::random_tensor({3, 2, 4}, rng);
  EXPECT_THROW(rankr::z_excluding(m, wrong, 0, 0), std::invalid_argument);
  EXPECT_THROW(rankr::z_excluding(m, x, 3, 0), std::invalid_argument);
  EXPECT_THROW(rankr::z_excluding(m, x, 0, 3), std::invalid_argument);
}

TEST(HiddenPreactivation, ZeroWeightsGiveZero) {
  rankr::Rng rng(104);
  const RankRModel m(small_config());
  const DenseTensor x = testing_oracles::random_tensor({2, 3, 4}, rng);
  for (std::size_t mode = 0; mode < 3; ++mode) {
    EXPECT_EQ(rankr::hidden_preactivation(m, x, 0, mode), 0.0);
  }
}

TEST(HiddenPreactivation, SameAcrossModes) {
  rankr::Rng rng(105);
  for (int trial = 0; trial < 50; ++trial) {
    const RankRModel m = testing_oracles::random_model(small_config(), rng);
    const DenseTensor x = testing_oracles::random_tensor({2, 3, 4}, rng);
    for (std::size_t q = 0; q < 3; ++q) {
      const double s0 = rankr::hidden_preactivation(m, x, q, 0);
      const double s1 = rankr::hidden_preactivation(m, x, q, 1);
      const double s2 = rankr::hidden_preactivation(m, x, q, 2);
      ASSERT_LE(rel_gap(s0, s1), 1e-10);
      ASSERT_LE(rel_gap(s0, s2), 1e-10);
    }
  }
}

TEST(HiddenPreactivation, MatchesDenseInnerProduct) {
  rankr::Rng rng(106);
  for (int trial = 0; trial < 50; ++trial) {
    const RankRModel m = testing_oracles::random_model(small_config(), rng);
    const DenseTensor x = testing_oracles::random_tensor({2, 3, 4}, rng);
    for (std::size_t q = 0; q < 3; ++q) {
      const double dense = rankr::inner(rankr::cp_reconstruct(m.hidden_weights[q]), x);
      for (std::size_t mode = 0; mode < 3; ++mode) {
        ASSERT_LE(rel_gap(rankr::hidden_preactivation(m, x, q, mode), dense), 1e-10);
      }
    }
  }
}

TEST(Forward, ZeroOutputWeightsGiveUniform) {
  rankr::Rng rng(107);
  RankRModel m = testing_oracles::random_model(small_config(), rng);
  for (double& v : m.output_weights.data()) v = 0.0;
  const DenseTensor x = testing_oracles::random_tensor({2, 3, 4}, rng);
  const std::vector<double> p = rankr::forward(m, x);
  ASSERT_EQ(p.size(), 4u);
  for (double v : p) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forward, IdenticalOutputColumnsSplitBinaryEvenly) {
  rankr::Rng rng(108);
  ModelConfig cfg = small_config();
  cfg.classes = 2;
  RankRModel m = testing_oracles::random_model(cfg, rng);
  for (std::size_t q = 0; q < cfg.hidden; ++q) {
    m.output_weights(q, 1) = m.output_weights(q, 0);
  }
  const std::vector<double> p = rankr::forward(m, testing_oracles::random_tensor({2, 3, 4}, rng));
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Forward, MatchesDenseOracle) {
  rankr::Rng rng(109);
  for (int trial = 0; trial < 30; ++trial) {
    ModelConfig cfg;
    cfg.input_shape = (trial % 2 == 0) ? std::vector<std::size_t>{3, 4}
                                       : std::vector<std::size_t>{2, 3, 4};
    cfg.rank = 1 + trial % 3;
    cfg.hidden = 1 + trial % 4;
    cfg.classes = 2 + trial % 3;
    cfg.activation = static_cast<Activation>(trial % 3);
    const RankRModel m = testing_oracles::random_model(cfg, rng);
    const DenseTensor x = testing_oracles::random_tensor(cfg.input_shape, rng);
    const std::vector<double> got = rankr::forward(m, x);
    const std::vector<double> want = testing_oracles::dense_forward(m, x);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      ASSERT_LE(rel_gap(got[k], want[k]), 1e-10);
    }
  }
}

TEST(Forward, RejectsBadInputs) {
  rankr::Rng rng(110);
  const RankRModel m = testing_oracles::random_model(small_config(), rng);
  EXPECT_THROW(rankr::forward(m, testing_oracles::random_tensor({4, 3, 2}, rng)),
               std::invalid_argument);
  DenseTensor bad = testing_oracles::random_tensor({2, 3, 4}, rng);
  bad[5] = std::nan("");
  EXPECT_THROW(rankr::forward(m, bad), std::invalid_argument);
}

TEST(Predict, UniformProbabilitiesPickSmallestIndex) {
  rankr::Rng rng(111);
  RankRModel m = testing_oracles::random_model(small_config(), rng);
  for (double& v : m.output_weights.data()) v = 0.0;
  EXPECT_EQ(rankr::predict(m, testing_oracles::random_tensor({2, 3, 4}, rng)), 0u);
}

TEST(Predict, DominantLogitWins) {
  ModelConfig cfg;
  cfg.input_shape = {2, 2};
  cfg.rank = 1;
  cfg.hidden = 1;
  cfg.classes = 3;
  RankRModel m(cfg);
  // Zero factors give u = sigmoid(0) = 0.5; scale the output row so the
  // logits come out as (0, 10, -5).
  m.output_weights(0, 0) = 0.0;
  m.output_weights(0, 1) = 20.0;
  m.output_weights(0, 2) = -10.0;
  DenseTensor x(std::vector<std::size_t>{2, 2});
  EXPECT_EQ(rankr::predict(m, x), 1u);
}

TEST(Predict, AgreesWithDenseOracleArgmax) {
  rankr::Rng rng(112);
  for (int trial = 0; trial < 200; ++trial) {
    ModelConfig cfg;
    cfg.input_shape = {2, 3, 2};
    cfg.rank = 1 + trial % 2;
    cfg.hidden = 2;
    cfg.classes = 3;
    const RankRModel m = testing_oracles::random_model(cfg, rng);
    const DenseTensor x = testing_oracles::random_tensor(cfg.input_shape, rng);
    EXPECT_EQ(rankr::predict(m, x),
              testing_oracles::dense_argmax(testing_oracles::dense_forward(m, x)));
  }
}

TEST(RankOne, ScoreEqualsOuterProductInnerProduct) {
  rankr::Rng rng(113);
  ModelConfig cfg;
  cfg.input_shape = {3, 2, 4};
  cfg.rank = 1;
  cfg.hidden = 1;
  cfg.classes = 2;
  for (int trial = 0; trial < 20; ++trial) {
    const RankRModel m = testing_oracles::random_model(cfg, rng);
    const DenseTensor x = testing_oracles::random_tensor(cfg.input_shape, rng);
    // Outer-product inner product computed by direct triple loop.
    double expected = 0.0;
    const auto& f = m.hidden_weights[0].factors;
    std::vector<std::size_t> idx(3, 0);
    do {
      expected += f[0](idx[0], 0) * f[1](idx[1], 0) * f[2](idx[2], 0) * x.at(idx);
    } while (rankr::next_multi_index(idx, cfg.input_shape));
    ASSERT_LE(rel_gap(rankr::hidden_preactivation(m, x, 0, 2), expected), 1e-10);
  }
}

}  // namespace
