#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "checks.h"
#include "sotransfer/nn/adam.h"
#include "sotransfer/nn/gaussian.h"
#include "sotransfer/nn/mlp.h"
#include "sotransfer/nn/normalizer.h"
#include "sotransfer/nn/recurrent.h"

namespace sotransfer::nn {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274;

TEST(Mlp, ZeroNetworkGivesZeroOutput) {
  const Mlp net = ZeroMlp({4, 8, 8, 2});
  const Vec out = Forward(net, Vec::Constant(4, 3.5));
  EXPECT_EQ(out, Vec::Zero(2));
}

TEST(Mlp, WidthOneHiddenLayerAtZero) {
  Mlp net = ZeroMlp({1, 1, 1});
  net.weights[0](0, 0) = 1.0;
  net.weights[1](0, 0) = 1.0;
  EXPECT_EQ(Forward(net, Vec::Zero(1))[0], 0.0);
}

TEST(Mlp, InputWidthMismatchIsConfigError) {
  const Mlp net = ZeroMlp({3, 4, 1});
  EXPECT_THROW(Forward(net, Vec::Zero(2)), ConfigError);
}

TEST(Mlp, ZeroOutputGradientGivesZeroGradient) {
  Rng rng(1);
  const Mlp net = checks::RandomMlp({3, 5, 2}, rng);
  const Mlp g = Backward(net, StandardNormal(3, rng), Vec::Zero(2));
  EXPECT_EQ(Flatten(g).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Mlp, DuplicateBatchColumnDoublesGradient) {
  Rng rng(2);
  const Mlp net = checks::RandomMlp({3, 5, 2}, rng);
  const Vec x = StandardNormal(3, rng), gy = StandardNormal(2, rng);
  Mat xs(3, 2), gs(2, 2);
  xs << x, x;
  gs << gy, gy;
  const Vec single = Flatten(Backward(net, x, gy));
  const Vec doubled = Flatten(Backward(net, ForwardBatch(net, xs), gs));
  EXPECT_LT((doubled - 2.0 * single).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mlp, DefaultShapeIsThreeHiddenLayersOf64) {
  Rng rng(3);
  const Mlp net = MakeMlp(16, 2, rng);
  EXPECT_EQ(net.layer_sizes, (std::vector<int>{16, 64, 64, 64, 2}));
  net.Validate();
}

TEST(Mlp, FlattenAssignRoundTrip) {
  Rng rng(4);
  const Mlp net = checks::RandomMlp({3, 4, 2}, rng);
  Mlp copy = ZeroMlp({3, 4, 2});
  Assign(copy, Flatten(net));
  EXPECT_EQ(Flatten(copy), Flatten(net));
}

TEST(Gaussian, LogProbAtModeAndUnitDeviation) {
  EXPECT_NEAR(GaussianLogProb(Vec::Zero(1), Vec::Zero(1), Vec::Zero(1)), -kHalfLog2Pi, 1e-12);
  EXPECT_NEAR(GaussianLogProb(Vec::Zero(1), Vec::Zero(1), Vec::Ones(1)), -0.5 - kHalfLog2Pi,
              1e-12);
  EXPECT_NEAR(GaussianLogProb(Vec::Zero(3), Vec::Zero(3), Vec::Zero(3)), -3.0 * kHalfLog2Pi,
              1e-12);
}

TEST(Gaussian, VanishingStdSamplesTheMean) {
  Rng rng(5);
  const Vec mean = Vec::Constant(2, 3.0);
  const Vec log_std = Vec::Constant(2, -std::numeric_limits<double>::infinity());
  const Vec a = GaussianSample(mean, log_std, rng);
  EXPECT_LT((a - mean).cwiseAbs().maxCoeff(), 1e-8 * 3.0 + 1e-8);
}

TEST(Gaussian, SeededSamplesRepeat) {
  Rng a(9), b(9);
  EXPECT_EQ(GaussianSample(Vec::Zero(3), Vec::Zero(3), a),
            GaussianSample(Vec::Zero(3), Vec::Zero(3), b));
}

TEST(Adam, ZeroGradientDecaysMomentsAndFreshStateStays) {
  AdamState s = AdamState::ForSize(2);
  s.first_moment << 1.0, -1.0;
  s.second_moment << 4.0, 4.0;
  Vec p(2);
  p << 0.5, 0.25;
  const Vec before = p;
  AdamStep(s, p, Vec::Zero(2));
  EXPECT_EQ(s.first_moment[0], 0.9);
  EXPECT_DOUBLE_EQ(s.second_moment[0], 4.0 * 0.999);
  AdamState fresh = AdamState::ForSize(2);
  Vec q = before;
  AdamStep(fresh, q, Vec::Zero(2));
  EXPECT_EQ(q, before);
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  AdamState s = AdamState::ForSize(1, 1e-3);
  Vec p = Vec::Zero(1);
  double last = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double before = p[0];
    AdamStep(s, p, Vec::Constant(1, -2.0));
    last = p[0] - before;
  }
  EXPECT_GT(p[0], 0.0);
  EXPECT_NEAR(last, 1e-3, 1e-6);
}

TEST(Adam, NonFiniteGradientFails) {
  AdamState s = AdamState::ForSize(1);
  Vec p = Vec::Zero(1);
  EXPECT_THROW(AdamStep(s, p, Vec::Constant(1, std::nan(""))), RuntimeFailure);
}

TEST(Recurrent, ZeroWeightsGiveZeroOutputs) {
  const RecurrentModel m = ZeroRecurrent(3, 4, 2);
  const RecurrentResult r = RecurrentForward(m, {Mat::Ones(3, 2), Mat::Ones(3, 2)});
  for (const Mat& y : r.outputs) EXPECT_EQ(y.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Recurrent, LengthOneSequenceIsOneCellStep) {
  Rng rng(6);
  const RecurrentModel m = MakeRecurrent(3, 5, 2, rng);
  const Mat x = Mat::Random(3, 4);
  const RecurrentResult r = RecurrentForward(m, {x});
  const Mat h = RecurrentCell(m, Mat::Zero(5, 4), x);
  EXPECT_LT((r.final_hidden - h).cwiseAbs().maxCoeff(), 1e-15);
  Mat y = m.w_out * h;
  y.colwise() += m.b_out;
  EXPECT_LT((r.outputs[0] - y).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Recurrent, InputWidthMismatchIsConfigError) {
  const RecurrentModel m = ZeroRecurrent(3, 4, 2);
  EXPECT_THROW(RecurrentForward(m, {Mat::Zero(2, 1)}), ConfigError);
}

TEST(Normalizer, TracksBatchMoments) {
  RunningNormalizer n = RunningNormalizer::ForSize(2);
  Mat batch(2, 4);
  batch << 1, 2, 3, 4, 10, 10, 10, 10;
  n.Update(batch);
  EXPECT_NEAR(n.mean[0], 2.5, 1e-3);
  EXPECT_NEAR(n.var[0], 1.25, 1e-3);
  EXPECT_NEAR(n.mean[1], 10.0, 1e-3);
}

}  // namespace
}  // namespace sotransfer::nn
