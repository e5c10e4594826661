#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "sotransfer/envs/env.h"
#include "sotransfer/ppo/ppo.h"
#include "sotransfer/strategy/cma.h"
#include "sotransfer/strategy/gp.h"
#include "sotransfer/strategy/search.h"

namespace sotransfer::strategy {
namespace {

TEST(CmaPopulation, DefaultRule) {
  EXPECT_EQ(CmaPopulationSize(1), 4);
  EXPECT_EQ(CmaPopulationSize(2), 6);
  EXPECT_EQ(CmaPopulationSize(5), 8);
  EXPECT_EQ(CmaPopulationSize(8), 10);
  EXPECT_EQ(CmaPopulationSize(11), 11);
  EXPECT_EQ(CmaPopulationSize(25), 13);
}

TEST(CmaInit, DefaultsAndIdentityCovariance) {
  const CmaState s = CmaInit(Vec::Constant(5, 0.5), 0.25);
  EXPECT_EQ(s.lambda, 8);
  EXPECT_EQ(s.mu, 4);
  EXPECT_EQ(s.mean, Vec::Constant(5, 0.5));
  EXPECT_DOUBLE_EQ(s.sigma, 0.25);
  EXPECT_EQ(s.scales, Vec::Ones(5));
  EXPECT_NEAR(s.weights.sum(), 1.0, 1e-15);
  CmaOptions defaults;
  EXPECT_DOUBLE_EQ(defaults.mean0, 0.5);
  EXPECT_DOUBLE_EQ(defaults.sigma0, 0.25);
}

TEST(CmaAsk, VanishingStepSizeCollapsesOnMean) {
  CmaState s = CmaInit(Vec::Constant(3, 0.4), 1e-12);
  Rng rng(1);
  const Mat x = CmaAsk(s, rng);
  for (int k = 0; k < x.cols(); ++k) EXPECT_LT((x.col(k) - s.mean).norm(), 1e-9);
}

TEST(CmaAsk, SpreadMatchesSigma) {
  CmaState s = CmaInit(Vec::Constant(2, 0.5), 0.25, 10000);
  Rng rng(2);
  const Mat x = CmaAsk(s, rng);
  for (int i = 0; i < 2; ++i) {
    const Vec row = x.row(i).transpose().array() - x.row(i).mean();
    const double sd = std::sqrt(row.squaredNorm() / (x.cols() - 1));
    EXPECT_NEAR(sd, 0.25, 0.05 * 0.25);
  }
}

TEST(CmaAsk, SeededDeterminism) {
  CmaState a = CmaInit(Vec::Constant(4, 0.5), 0.25), b = a;
  Rng ra(3), rb(3);
  EXPECT_EQ(CmaAsk(a, ra), CmaAsk(b, rb));
}

TEST(CmaTell, EqualFitnessRecombinesByIndex) {
  CmaState s = CmaInit(Vec::Constant(3, 0.5), 0.25);
  Rng rng(4);
  const Mat x = CmaAsk(s, rng);
  Vec expected = Vec::Zero(3);
  for (int k = 0; k < s.mu; ++k) expected += s.weights[k] * x.col(k);
  CmaTell(s, x, Vec::Zero(s.lambda));
  EXPECT_LT((s.mean - expected).norm(), 1e-12);
  EXPECT_TRUE(std::isfinite(s.sigma));
  EXPECT_GT(s.sigma, 0.0);
}

TEST(CmaTell, CandidateOrderDoesNotMatter) {
  CmaState a = CmaInit(Vec::Constant(4, 0.5), 0.25);
  Rng rng(5);
  const Mat x = CmaAsk(a, rng);
  Vec f(a.lambda);
  for (int k = 0; k < a.lambda; ++k) f[k] = -(x.col(k).array() - 0.7).square().sum();
  CmaState b = a;
  Mat xp(x.rows(), x.cols());
  Vec fp(f.size());
  for (int k = 0; k < a.lambda; ++k) {
    xp.col(k) = x.col(a.lambda - 1 - k);
    fp[k] = f[a.lambda - 1 - k];
  }
  CmaTell(a, x, f, false);
  CmaTell(b, xp, fp, false);
  EXPECT_LT((a.mean - b.mean).norm(), 1e-14);
  EXPECT_NEAR(a.sigma, b.sigma, 1e-15);
  EXPECT_LT((a.cov - b.cov).norm(), 1e-14);
}

TEST(CmaTell, MismatchedFitnessIsConfigError) {
  CmaState s = CmaInit(Vec::Constant(2, 0.5), 0.25);
  Rng rng(6);
  const Mat x = CmaAsk(s, rng);
  EXPECT_THROW(CmaTell(s, x, Vec::Zero(s.lambda - 1)), ConfigError);
}

TEST(Clip, UnitBox) {
  const Vec x = (Vec(3) << -0.2, 0.4, 1.7).finished();
  EXPECT_EQ(ClipToUnitBox(x), (Vec(3) << 0.0, 0.4, 1.0).finished());
}

TEST(SoCma, OneGenerationReturnsBestOfFirstPopulation) {
  const int lambda = CmaPopulationSize(3);
  FunctionObjective objective(3, [](const Vec& x) { return -x.squaredNorm(); }, lambda);
  Rng rng(7);
  const SearchResult r = SoCma(objective, {}, rng);
  ASSERT_EQ(static_cast<int>(r.records.size()), lambda);
  double best = -1e18;
  for (const FitnessRecord& rec : r.records) best = std::max(best, rec.mean);
  EXPECT_EQ(r.best_fitness, best);
}

TEST(SoCma, BestTraceIsMonotoneAndMusStayInBox) {
  FunctionObjective objective(
      2, [](const Vec& x) { return std::sin(7.0 * x[0]) * std::cos(5.0 * x[1]); }, 200);
  Rng rng(8);
  const SearchResult r = SoCma(objective, {0.5, 0.8, 0}, rng);
  const std::vector<double> trace = r.BestTrace();
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1]);
  for (const FitnessRecord& rec : r.records) {
    EXPECT_GE(rec.mu.minCoeff(), 0.0);
    EXPECT_LE(rec.mu.maxCoeff(), 1.0);
  }
}

SearchResult Synthetic() {
  SearchResult r;
  r.population = 2;
  auto rec = [](int gen, double mean, std::int64_t samples, bool truncated = false) {
    FitnessRecord f;
    f.generation = gen;
    f.mean = mean;
    f.samples = samples;
    f.truncated = truncated;
    return f;
  };
  r.records = {rec(0, 1.0, 10), rec(0, 3.0, 20), rec(1, 5.0, 30), rec(1, 2.0, 40),
               rec(2, 9.0, 50), rec(2, 8.0, 60, true)};
  return r;
}

TEST(SearchResult, BestAtUsesCompleteRecordsUpToSamples) {
  const SearchResult r = Synthetic();
  EXPECT_EQ(r.BestAt(5), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.BestAt(25), 3.0);
  EXPECT_EQ(r.BestAt(100), 9.0);
}

TEST(SearchResult, LatestAtNeedsWholeGenerations) {
  const SearchResult r = Synthetic();
  EXPECT_EQ(r.LatestAt(15), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.LatestAt(35), 2.0);
  EXPECT_EQ(r.LatestAt(40), 3.5);
  EXPECT_EQ(r.LatestAt(1000), 3.5);
}

TEST(SearchResult, TraceCsvHasOneRowPerRecord) {
  SearchResult r = Synthetic();
  for (FitnessRecord& f : r.records) {
    f.mu = Vec::Constant(2, 0.5);
    f.trials = {f.mean};
  }
  const std::string path =
      (std::filesystem::temp_directory_path() / "sotransfer_trace_test.csv").string();
  WriteTraceCsv(path, r.records);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(header.rfind("generation,candidate", 0), 0u);
  std::remove(path.c_str());
}

envs::EnvConfig QuietPendulum() {
  envs::EnvConfig cfg = envs::EnvConfig::Pendulum();
  cfg.init_noise = 0.0;
  return cfg;
}

std::shared_ptr<const ppo::ActorCritic> RandomUp(int input, int action, std::uint64_t seed) {
  Rng rng(seed);
  auto ac = std::make_shared<ppo::ActorCritic>(ppo::MakeActorCritic(input, action, rng));
  ac->actor = nn::MakeMlp(input, action, rng, 1.0);
  return ac;
}

TEST(EvaluateStrategy, DeterministicTrialsAgree) {
  const envs::EnvConfig cfg = QuietPendulum();
  ppo::FixedEnv env(cfg, envs::NominalDynamics(cfg));
  Rng rng(9);
  const FitnessRecord r = EvaluateStrategy(Vec::Constant(4, 0.3), RandomUp(7, 1, 10), env, 3, rng);
  ASSERT_EQ(r.trials.size(), 3u);
  EXPECT_EQ(r.trials[0], r.trials[1]);
  EXPECT_EQ(r.trials[1], r.trials[2]);
  EXPECT_EQ(r.mean, r.trials[0]);
}

TEST(EvaluateStrategy, DebitsSummedEpisodeLengths) {
  const envs::EnvConfig cfg = envs::EnvConfig::Pendulum();
  ppo::SampleBudget budget(100000);
  ppo::FixedEnv env(cfg, envs::NominalDynamics(cfg), &budget);
  Rng rng(11);
  const FitnessRecord r = EvaluateStrategy(Vec::Constant(4, 0.6), RandomUp(7, 1, 12), env, 3, rng);
  EXPECT_EQ(budget.used(), 3 * cfg.horizon);
  EXPECT_EQ(r.samples, budget.used());
  EXPECT_FALSE(r.truncated);
}

TEST(EvaluateStrategy, BudgetCutMarksTruncated) {
  const envs::EnvConfig cfg = envs::EnvConfig::Pendulum();
  ppo::SampleBudget budget(cfg.horizon + 10);
  ppo::FixedEnv env(cfg, envs::NominalDynamics(cfg), &budget);
  Rng rng(13);
  const FitnessRecord r = EvaluateStrategy(Vec::Constant(4, 0.6), RandomUp(7, 1, 14), env, 3, rng);
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.trials.size(), 2u);
  EXPECT_EQ(budget.used(), budget.limit());
}

TEST(TargetObjective, UnbudgetedTargetIsConfigError) {
  const envs::EnvConfig cfg = QuietPendulum();
  ppo::FixedEnv env(cfg, envs::NominalDynamics(cfg));
  EXPECT_THROW(TargetObjective(RandomUp(7, 1, 15), env), ConfigError);
}

TEST(TargetObjective, DefaultsToThreeTrials) {
  const envs::EnvConfig cfg = QuietPendulum();
  ppo::SampleBudget budget(10000);
  ppo::FixedEnv env(cfg, envs::NominalDynamics(cfg), &budget);
  TargetObjective objective(RandomUp(7, 1, 15), env);
  Rng rng(16);
  EXPECT_EQ(objective.Dim(), 4);
  EXPECT_EQ(objective.Evaluate(Vec::Constant(4, 0.5), rng).trials.size(), 3u);
}

TEST(Gp, InterpolatesTrainingPoints) {
  Rng rng(17);
  const Mat x = Mat::Random(2, 8).array() * 0.5 + 0.5;
  Vec y(8);
  for (int i = 0; i < 8; ++i) y[i] = std::sin(3.0 * x(0, i)) + x(1, i);
  GpFitOptions opt;
  opt.noise_var = 1e-8;
  const GpModel m = GpFit(x, y, opt, rng);
  for (int i = 0; i < 8; ++i) {
    const GpPrediction p = GpPredict(m, x.col(i));
    EXPECT_NEAR(p.mean, y[i], 1e-4);
    EXPECT_LT(p.variance, 1e-4);
  }
}

TEST(Gp, RevertsToPriorFarAway) {
  GpHyper h;
  h.log_length = Vec::Constant(1, std::log(0.1));
  h.log_signal_var = 0.0;
  const Mat x = (Mat(1, 3) << 0.1, 0.2, 0.3).finished();
  const Vec y = (Vec(3) << 1.0, 2.0, 4.0).finished();
  const GpModel m = GpFitFixed(x, y, h);
  const GpPrediction p = GpPredict(m, Vec::Constant(1, 5.0));
  EXPECT_NEAR(p.mean, m.target_mean, 0.01 * m.target_std);
  const double prior_var = m.target_std * m.target_std;
  EXPECT_NEAR(p.variance, prior_var, 0.01 * prior_var);
}

TEST(ExpectedImprovement, ZeroWithoutVarianceAndNonNegative) {
  EXPECT_EQ(ExpectedImprovement({1.0, 0.0}, 1.0), 0.0);
  EXPECT_EQ(ExpectedImprovement({0.5, 0.0}, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(ExpectedImprovement({2.0, 0.0}, 1.0), 1.0);
  Rng rng(18);
  for (int i = 0; i < 1000; ++i) {
    const Vec z = StandardNormal(3, rng);
    EXPECT_GE(ExpectedImprovement({z[0], std::abs(z[1])}, z[2]), 0.0);
  }
}

TEST(Gp, ExpectedImprovementVanishesAtNoiselessPoint) {
  Rng rng(19);
  const Mat x = (Mat(1, 4) << 0.1, 0.4, 0.6, 0.9).finished();
  const Vec y = (Vec(4) << 0.2, 1.0, 0.7, -0.3).finished();
  GpFitOptions opt;
  opt.noise_var = 1e-10;
  const GpModel m = GpFit(x, y, opt, rng);
  EXPECT_NEAR(ExpectedImprovement(GpPredict(m, x.col(1)), 1.0), 0.0, 1e-5);
}

}  // namespace
}  // namespace sotransfer::strategy
