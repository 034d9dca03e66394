/*
 * Copyright 2026 The Ablate Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>

#include <gtest/gtest.h>

#include "ablate/error.h"
#include "ablate/linear.h"
#include "ablate/nn.h"
#include "test_util.h"

namespace ablate {
namespace {

TEST(Dims, DepthAndWidth) {
  EXPECT_EQ(MakeLayerDims(24, 3, 1), (std::vector<std::size_t>{24, 100, 100, 100, 1}));
  EXPECT_EQ(MakeLayerDims(5, 0, 3), (std::vector<std::size_t>{5, 3}));
  EXPECT_THROW(MakeLayerDims(5, kMaxHiddenLayers + 1, 1), InvalidArgument);
}

TEST(Init, ParameterCount) {
  const MlpModel m = InitMlp(MakeLayerDims(24, 3, 1), Task::kRegression, 0);
  EXPECT_EQ(m.ParameterCount(), 24u * 100 + 100 + 2 * (100 * 100 + 100) + 101);
  EXPECT_EQ(m.hidden_layers(), 3u);
}

TEST(Init, HeUniformBoundsAndZeroBias) {
  const MlpModel m = InitMlp(MakeLayerDims(8, 2, 1), Task::kRegression, 3);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.layer_dims[l]));
    EXPECT_LE(m.layers[l].weights.cwiseAbs().maxCoeff(), bound);
    EXPECT_TRUE(m.layers[l].bias.isZero());
  }
  const MlpModel again = InitMlp(MakeLayerDims(8, 2, 1), Task::kRegression, 3);
  EXPECT_EQ(again.layers[1].weights, m.layers[1].weights);
  const MlpModel other = InitMlp(MakeLayerDims(8, 2, 1), Task::kRegression, 4);
  EXPECT_NE(other.layers[1].weights, m.layers[1].weights);
}

TEST(Init, RegressionHasOneOutput) {
  EXPECT_THROW(InitMlp({3, 2}, Task::kRegression, 0), InvalidArgument);
  EXPECT_NO_THROW(InitMlp({3, 2}, Task::kClassification, 0));
}

TEST(Forward, DepthZeroIsAffine) {
  MlpModel m = InitMlp(MakeLayerDims(3, 0, 1), Task::kRegression, 1);
  m.layers[0].bias[0] = 0.25;
  const Eigen::MatrixXd x = testing::RandomMatrix(6, 3, 2);
  const Eigen::MatrixXd out = Forward(m, x);
  EXPECT_LT((out - ((x * m.layers[0].weights).array() + 0.25).matrix()).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(Forward, ReluHidden) {
  MlpModel m = InitMlp({1, 1, 1}, Task::kRegression, 0);
  m.layers[0].weights.setConstant(1.0);
  m.layers[1].weights.setConstant(2.0);
  Eigen::MatrixXd x(2, 1);
  x << -3, 3;
  EXPECT_EQ(Forward(m, x), Eigen::Vector2d(0, 6));
}

TEST(Forward, WrongInputWidth) {
  const MlpModel m = InitMlp(MakeLayerDims(3, 1, 1), Task::kRegression, 0);
  EXPECT_THROW(Forward(m, Eigen::MatrixXd::Zero(2, 4)), InvalidArgument);
}

TEST(Loss, MseAndCrossEntropy) {
  Eigen::MatrixXd out(2, 1);
  out << 1, 3;
  EXPECT_DOUBLE_EQ(Loss(out, Eigen::Vector2d(0, 1), Task::kRegression), 2.5);
  const Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(4, 3);
  EXPECT_NEAR(Loss(logits, Eigen::Vector4d(0, 1, 2, 0), Task::kClassification), std::log(3.0),
              1e-14);
  EXPECT_THROW(Loss(logits, Eigen::Vector4d(0, 1, 5, 0), Task::kClassification), InvalidArgument);
}

double FiniteDifference(MlpModel& m, double& param, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& y) {
  const double h = 1e-6, saved = param;
  param = saved + h;
  const double up = Loss(Forward(m, x), y, m.task);
  param = saved - h;
  const double down = Loss(Forward(m, x), y, m.task);
  param = saved;
  return (up - down) / (2 * h);
}

void CheckParamGradients(MlpModel m, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const ParamGradients g = ComputeParamGradients(m, x, y);
  EXPECT_NEAR(g.loss, Loss(Forward(m, x), y, m.task), 1e-12);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    auto& w = m.layers[l].weights;
    for (Eigen::Index i = 0; i < w.size(); i += 7) {
      EXPECT_NEAR(g.layers[l].weights.data()[i], FiniteDifference(m, w.data()[i], x, y), 1e-6)
          << "layer " << l << " weight " << i;
    }
    auto& b = m.layers[l].bias;
    for (Eigen::Index i = 0; i < b.size(); i += 3) {
      EXPECT_NEAR(g.layers[l].bias[i], FiniteDifference(m, b[i], x, y), 1e-6)
          << "layer " << l << " bias " << i;
    }
  }
}

TEST(Backprop, RegressionMatchesFiniteDifferences) {
  const MlpModel m = testing::RandomNet(4, 2, 1, 5, 12);
  const Eigen::MatrixXd x = testing::RandomMatrix(9, 4, 6);
  CheckParamGradients(m, x, testing::RandomMatrix(9, 1, 7));
}

TEST(Backprop, ClassificationMatchesFiniteDifferences) {
  MlpModel m = testing::RandomNet(3, 1, 3, 8, 10);
  m.task = Task::kClassification;
  const Eigen::MatrixXd x = testing::RandomMatrix(7, 3, 9);
  Eigen::VectorXd y(7);
  y << 0, 1, 2, 2, 1, 0, 1;
  CheckParamGradients(m, x, y);
}

TEST(InputGradients, MatchFiniteDifferences) {
  const MlpModel m = testing::RandomNet(5, 3, 1, 10, 16);
  const Eigen::MatrixXd x = testing::RandomMatrix(6, 5, 11);
  const Eigen::MatrixXd g = InputGradients(m, x, 0);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      Eigen::MatrixXd up = x.row(i), down = x.row(i);
      up(0, j) += h;
      down(0, j) -= h;
      const double fd = (Forward(m, up)(0, 0) - Forward(m, down)(0, 0)) / (2 * h);
      EXPECT_NEAR(g(i, j), fd, 1e-6);
    }
  }
}

TEST(InputGradients, DepthZeroEqualsWeights) {
  const MlpModel m = InitMlp(MakeLayerDims(4, 0, 1), Task::kRegression, 12);
  const Eigen::MatrixXd g = InputGradients(m, testing::RandomMatrix(3, 4, 13), 0);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_LT((g.row(i).transpose() - m.layers[0].weights.col(0)).cwiseAbs().maxCoeff(), 1e-15);
  }
  EXPECT_THROW(InputGradients(m, Eigen::MatrixXd::Zero(1, 4), 1), InvalidArgument);
}

TEST(Adam, ReducesLoss) {
  MlpModel m = testing::RandomNet(3, 1, 1, 14, 8);
  const Eigen::MatrixXd x = testing::RandomMatrix(32, 3, 15);
  const Eigen::VectorXd y = x.col(0) - x.col(2);
  AdamOptimizer opt(m, AdamConfig{1e-2});
  const double start = Loss(Forward(m, x), y, m.task);
  for (int i = 0; i < 200; ++i) opt.Step(m, ComputeParamGradients(m, x, y));
  EXPECT_EQ(opt.steps(), 200u);
  EXPECT_LT(Loss(Forward(m, x), y, m.task), 0.2 * start);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  MlpModel m = InitMlp({2, 1}, Task::kRegression, 0);
  const MlpModel before = m;
  Eigen::MatrixXd x(1, 2);
  x << 1, -1;
  AdamOptimizer opt(m, AdamConfig{0.01});
  opt.Step(m, ComputeParamGradients(m, x, Eigen::VectorXd::Constant(1, 5.0)));
  const Eigen::MatrixXd delta = m.layers[0].weights - before.layers[0].weights;
  EXPECT_NEAR(delta.cwiseAbs().maxCoeff(), 0.01, 1e-6);
}

TEST(Train, DepthZeroMatchesOls) {
  const Dataset d = testing::Correlated(400, 3, 0.3, {1.0, -0.5, 0.25}, 0.5, 16);
  TrainConfig config;
  config.adam.learning_rate = 1e-2;
  config.epochs = 600;
  config.batch_size = 400;
  const TrainResult r =
      Train(InitMlp(MakeLayerDims(3, 0, 1), Task::kRegression, 1), d, d.Subset({}), config);
  const LinearModel ols = FitOls(d);
  EXPECT_LT((r.model.layers[0].weights.col(0) - ols.beta).cwiseAbs().maxCoeff(), 1e-2);
  EXPECT_NEAR(r.model.layers[0].bias[0], ols.intercept, 1e-2);
  EXPECT_FALSE(r.early_stopped);
  EXPECT_EQ(r.log.size(), 600u);
}

TEST(Train, DeterministicForSeed) {
  const Dataset d = testing::Correlated(120, 3, 0.3, {1, 1, 1}, 1.0, 17);
  TrainConfig config;
  config.epochs = 5;
  config.batch_size = 32;
  config.seed = 4;
  config.augment = AugmentSpec{AugmentMode::kInvertedDropout, 0.3, 0, 6};
  const MlpModel init = InitMlp(MakeLayerDims(3, 1, 1, 16), Task::kRegression, 2);
  const TrainResult a = Train(init, d, d, config);
  const TrainResult b = Train(init, d, d, config);
  EXPECT_EQ(a.model.layers[1].weights, b.model.layers[1].weights);
  config.augment->seed = 7;
  const TrainResult c = Train(init, d, d, config);
  EXPECT_NE(a.model.layers[1].weights, c.model.layers[1].weights);
}

TEST(Train, EarlyStoppingKeepsBestCheckpoint) {
  const Dataset d = testing::Correlated(100, 3, 0.0, {1, 0, 0}, 3.0, 18);
  const Dataset val = testing::Correlated(100, 3, 0.0, {-1, 0, 0}, 3.0, 19);
  TrainConfig config;
  config.epochs = 200;
  config.batch_size = 10;
  config.adam.learning_rate = 1e-2;
  config.early_stop_patience = 2;
  const TrainResult r = Train(InitMlp(MakeLayerDims(3, 1, 1, 16), Task::kRegression, 3), d, val, config);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_EQ(r.log.size(), r.best_epoch + 2);
  EXPECT_NEAR(Loss(Forward(r.model, val.features), val.response, Task::kRegression),
              r.best_validation_loss, 1e-12);
  for (const EpochLog& e : r.log) EXPECT_GE(e.validation_loss, r.best_validation_loss);
}

TEST(Train, ConfigValidation) {
  const Dataset d = testing::Correlated(20, 2, 0.0, {1, 1}, 1.0, 20);
  const MlpModel init = InitMlp(MakeLayerDims(2, 0, 1), Task::kRegression, 0);
  TrainConfig config;
  config.epochs = 0;
  EXPECT_THROW(Train(init, d, d, config), InvalidArgument);
  config = TrainConfig{};
  config.augment = AugmentSpec{AugmentMode::kMeanAblation, 1.0, 0, 0};
  EXPECT_THROW(Train(init, d, d, config), InvalidArgument);
}

TEST(Evaluate, ClassificationAccuracy) {
  MlpModel m = InitMlp({1, 2}, Task::kClassification, 0);
  m.layers[0].weights << -1, 1;
  Dataset d = testing::MakeRegression(Eigen::MatrixXd(Eigen::Vector4d(-1, -2, 1, 2)),
                                      Eigen::Vector4d(0, 0, 1, 0));
  d.task = Task::kClassification;
  d.class_labels = {"a", "b"};
  const Metrics metrics = Evaluate(m, d);
  EXPECT_DOUBLE_EQ(metrics.accuracy, 0.75);
  EXPECT_EQ(metrics.outputs.cols(), 2);
}

}  // namespace
}  // namespace ablate
