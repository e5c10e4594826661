#include <gtest/gtest.h>

#include <memory>

#include "sotransfer/envs/env.h"
#include "sotransfer/policies/osi.h"
#include "sotransfer/policies/policy.h"
#include "sotransfer/ppo/budget.h"
#include "sotransfer/ppo/ppo.h"

namespace sotransfer::policies {
namespace {

std::shared_ptr<const ppo::ActorCritic> RandomUp(int input, int action, std::uint64_t seed) {
  Rng rng(seed);
  auto ac = std::make_shared<ppo::ActorCritic>(ppo::MakeActorCritic(input, action, rng));
  ac->actor = nn::MakeMlp(input, action, rng, 1.0);
  return ac;
}

TEST(Strategy, DeterministicCallsRepeat) {
  const auto up = RandomUp(16, 2, 1);
  Rng rng(2);
  const Vec obs = StandardNormal(11, rng);
  const Vec mu = Vec::Constant(5, 0.3);
  EXPECT_EQ(ActStrategy(*up, mu, obs, true, rng), ActStrategy(*up, mu, obs, true, rng));
}

TEST(Strategy, MidpointIsHalfVector) {
  const auto up = RandomUp(16, 2, 3);
  Rng rng(4);
  const Vec obs = StandardNormal(11, rng);
  Policy p = MakeStrategy(up, Vec::Constant(5, 0.5));
  p.Reset();
  Vec input(16);
  input << obs, Vec::Constant(5, 0.5);
  EXPECT_EQ(p.Act(obs, true, rng), ppo::ActionMean(*up, input));
}

TEST(Strategy, MuOutsideBoxRejected) {
  EXPECT_THROW(MakeStrategy(RandomUp(16, 2, 5), Vec::Constant(5, 1.2)), ConfigError);
}

TEST(Hist, PaddingAndConvergence) {
  ppo::HistoryContext h(11, 10);
  EXPECT_EQ(h.Width(), 110);
  h.BeginEpisode(Vec());
  Vec out;
  for (int t = 0; t < 3; ++t) out = h.Build(Vec::Ones(11));
  EXPECT_EQ(out.head(7 * 11), Vec::Zero(77));
  for (int t = 3; t < 10; ++t) out = h.Build(Vec::Ones(11));
  EXPECT_EQ(out, Vec::Ones(110));
}

TEST(Hist, LengthOneMatchesEmptyMuUniversal) {
  envs::EnvConfig cfg = envs::EnvConfig::Pendulum();
  cfg.active.clear();
  ppo::PpoConfig pc;
  pc.iterations = 2;
  pc.steps_per_iteration = 400;
  pc.epochs = 2;
  Rng a(6), b(6);
  const ppo::ActorCritic hist = TrainHist(cfg, 1, pc, a);
  const ppo::ActorCritic up = ppo::TrainUniversal(cfg, true, pc, b);
  EXPECT_EQ(hist.InputSize(), up.InputSize());
  EXPECT_EQ(ppo::FlattenParams(hist), ppo::FlattenParams(up));
}

TEST(Robust, InputIsObservationOnly) {
  const auto net = RandomUp(11, 2, 7);
  Policy p = MakeRobust(net);
  EXPECT_EQ(p.context().Width(), 11);
}

TEST(Uposi, PerfectEstimatorMatchesStrategyWithTrueMu) {
  const auto up = RandomUp(16, 2, 8);
  const Vec truth = (Vec(5) << 0.1, 0.9, 0.4, 0.6, 0.3).finished();
  Policy p("uposi", up,
           std::make_unique<OsiContext>(11, 2, 5, kHistoryLength, true,
                                        [&](const Vec&) { return truth; }));
  p.Reset();
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const Vec obs = StandardNormal(11, rng);
    EXPECT_EQ(p.Act(obs, true, rng), ActStrategy(*up, truth, obs, true, rng));
  }
}

TEST(Uposi, FirstStepEstimateIsFiniteAndClipped) {
  Rng rng(10);
  OsiDataset data{Mat::Random(kHistoryLength * 13, 64), Mat::Random(5, 64), {}};
  OsiTrainOptions opt;
  opt.epochs = 2;
  auto osi = std::make_shared<OsiModel>(TrainOsi(data, 11, 2, kHistoryLength, true, opt, rng));
  Policy p = MakeUposi(RandomUp(16, 2, 11), osi);
  p.Reset();
  const Vec a = p.Act(Vec::Zero(11), true, rng);
  EXPECT_TRUE(a.allFinite());
  const Vec est = dynamic_cast<const OsiContext&>(p.context()).last_estimate();
  EXPECT_TRUE(est.allFinite());
  EXPECT_GE(est.minCoeff(), 0.0);
  EXPECT_LE(est.maxCoeff(), 1.0);
}

TEST(Osi, ConstantLabelIsLearned) {
  Rng rng(12);
  OsiDataset data{Mat::Random(kHistoryLength * 3, 5000), Mat::Constant(2, 5000, 0.3), {}};
  OsiTrainOptions opt;
  opt.epochs = 150;
  OsiReport report;
  TrainOsi(data, 3, 0, kHistoryLength, false, opt, rng, &report);
  EXPECT_LT(report.holdout_rmse, 0.01);
}

TEST(Osi, EmptyDatasetIsConfigError) {
  Rng rng(13);
  EXPECT_THROW(TrainOsi(OsiDataset{}, 3, 1, kHistoryLength, true, {}, rng), ConfigError);
}

TEST(Osi, JsonRoundTrip) {
  Rng rng(14);
  OsiDataset data{Mat::Random(kHistoryLength * 4, 32), Mat::Random(2, 32), {}};
  OsiTrainOptions opt;
  opt.epochs = 1;
  const OsiModel m = TrainOsi(data, 3, 1, kHistoryLength, true, opt, rng);
  const OsiModel back = OsiFromJson(nlohmann::json::parse(OsiToJson(m).dump()));
  const Vec x = data.inputs.col(0);
  EXPECT_EQ(back.PredictRaw(x), m.PredictRaw(x));
  EXPECT_EQ(back.with_actions, m.with_actions);
}

TEST(Osi, DatasetLabelsFollowEpisodes) {
  const envs::EnvConfig cfg = envs::EnvConfig::Pendulum();
  ppo::RandomizedEnv env(cfg);
  Rng rng(15);
  OsiDataOptions opt;
  opt.episodes = 4;
  opt.samples_per_episode = 7;
  const OsiDataset d = CollectOsiDataset(*RandomUp(7, 1, 16), env, opt, rng);
  ASSERT_EQ(d.size(), 28);
  ASSERT_EQ(d.episode.size(), 28u);
  for (int i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.targets.col(i), d.targets.col(d.episode[i] * 7));
  }
}

TEST(Episode, BudgetCutEndsEpisode) {
  const envs::EnvConfig cfg = envs::EnvConfig::Pendulum();
  ppo::SampleBudget budget(50);
  ppo::FixedEnv env(cfg, envs::NominalDynamics(cfg), &budget);
  Policy p = MakeRobust(RandomUp(3, 1, 17));
  Rng rng(18);
  const EpisodeResult r = RunEpisode(p, env, true, rng);
  EXPECT_TRUE(r.budget_cut);
  EXPECT_EQ(r.length, 50);
}

TEST(Episode, EveryKindRunsThroughTheSameLoop) {
  const envs::EnvConfig cfg = envs::EnvConfig::Hopper(5);
  ppo::FixedEnv env(cfg, envs::NominalDynamics(cfg));
  Rng rng(19);
  OsiDataset data{Mat::Random(kHistoryLength * 13, 32), Mat::Random(5, 32), {}};
  OsiTrainOptions opt;
  opt.epochs = 1;
  auto osi = std::make_shared<OsiModel>(TrainOsi(data, 11, 2, kHistoryLength, true, opt, rng));
  std::vector<Policy> family = {MakeStrategy(RandomUp(16, 2, 20), Vec::Constant(5, 0.5)),
                                MakeRobust(RandomUp(11, 2, 21)),
                                MakeHist(RandomUp(110, 2, 22)),
                                MakeUposi(RandomUp(16, 2, 23), osi)};
  for (Policy& p : family) {
    const EpisodeResult r = RunEpisode(p, env, true, rng);
    EXPECT_GT(r.length, 0) << p.kind();
    EXPECT_TRUE(std::isfinite(r.total_return)) << p.kind();
  }
}

}  // namespace
}  // namespace sotransfer::policies
