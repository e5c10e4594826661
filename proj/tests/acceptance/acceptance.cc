// One PASS/FAIL line per acceptance criterion. Usage:
//   acceptance [--work DIR] [--only 1,6,...] [--verbose]
// Trained source policies are cached under DIR/sources and reused by later
// runs with the same training settings.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "checks.h"
#include "sotransfer/envs/env.h"
#include "sotransfer/envs/params.h"
#include "sotransfer/harness/run.h"
#include "sotransfer/harness/spec.h"
#include "sotransfer/policies/policy.h"
#include "sotransfer/strategy/cma.h"
#include "sotransfer/strategy/search.h"

namespace {

using namespace sotransfer;
using harness::ExperimentSpec;
using harness::Method;

// Tolerances.
constexpr double kGradientTol = 1e-4;
constexpr int kGradientInstances = 5;
constexpr double kGaeTol = 1e-10;
constexpr int kGaeEpisodes = 100;
constexpr double kCmaTrajectoryTol = 1e-8;
constexpr int kCmaGenerations = 20;
constexpr double kSphereTarget = -1e-10;
constexpr int kSphereEvaluations = 5000;
constexpr double kDivergenceFraction = 0.10;
constexpr double kOracleFraction = 0.6;
constexpr double kUposiFraction = 0.8;
constexpr double kSparseGain = 0.2;
constexpr double kSpecializationRate = 0.7;
constexpr int kPairsPerSeed = 10;
constexpr double kPairDistance = 0.5;
constexpr int kPairEpisodes = 5;
constexpr std::int64_t kBudget = 30000;
constexpr int kSeeds = 3;
// Two-sided 5% critical values of Student's t, indexed by degrees of freedom.
constexpr double kTCritical[] = {0.0,   12.706, 4.303, 3.182, 2.776, 2.571,
                                 2.447, 2.365,  2.306, 2.262, 2.228};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

Outcome Gradients() {
  double worst = 0.0;
  for (int seed = 1; seed <= kGradientInstances; ++seed) {
    worst = std::max({worst, checks::MlpGradientError(seed), checks::RecurrentGradientError(seed)});
  }
  return {worst < kGradientTol, Fmt("worst relative error %.3g over %d MLP and %d recurrent nets",
                                    worst, kGradientInstances, kGradientInstances)};
}

Outcome Gae() {
  const double err = checks::GaeOracleError(1, kGaeEpisodes);
  return {err < kGaeTol, Fmt("max |recursive - mixture| %.3g over %d episodes", err, kGaeEpisodes)};
}

Outcome Cma() {
  double worst = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    worst = std::max(worst, checks::CmaTrajectoryError(seed, 5, kCmaGenerations, checks::Sphere));
    worst = std::max(worst,
                     checks::CmaTrajectoryError(seed, 5, kCmaGenerations, checks::Rosenbrock));
  }
  const double best = checks::CmaBestWithin(checks::Sphere, 5, kSphereEvaluations, 5);
  return {worst < kCmaTrajectoryTol && best > kSphereTarget,
          Fmt("trajectory gap %.3g over %d generations; sphere best %.3g in %d evaluations", worst,
              kCmaGenerations, best, kSphereEvaluations)};
}

Outcome Population() {
  std::string detail;
  bool ok = true;
  for (int n : {1, 2, 5, 8, 11, 25}) {
    const int expected = 4 + static_cast<int>(std::floor(3.0 * std::log(n)));
    const int got = strategy::CmaPopulationSize(n);
    ok = ok && got == expected;
    detail += Fmt("N=%d:%d ", n, got);
  }
  return {ok, detail};
}

Outcome GapMachinery() {
  bool identity = true, latency = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    identity = identity && checks::IdentityGapIsBitIdentical(seed);
    latency = latency && checks::ZeroLatencyIsBitIdentical(seed);
  }
  const checks::Divergence d = checks::SolverDivergence(5);
  const bool diverge = d.touched && d.prefix_gap < 1e-10 && d.gap > kDivergenceFraction * d.traveled;
  return {identity && latency && diverge,
          Fmt("identity %s, zero latency %s, hard/soft gap %.3f m vs traveled %.3f m",
              identity ? "bit-equal" : "DIFFERS", latency ? "bit-equal" : "DIFFERS", d.gap,
              d.traveled)};
}

class Lab {
 public:
  Lab(std::string work, harness::Logger log) : work_(std::move(work)), log_(std::move(log)) {}

  ExperimentSpec Base(const std::string& name) const {
    ExperimentSpec s = harness::ParseConfig("[experiment]\nenv_kind = hopper_lite\nmethod = so-cma\n");
    s.budget = kBudget;
    s.seeds = kSeeds;
    s.output_dir = work_ + "/" + name;
    s.source_dir = work_ + "/sources";
    return s;
  }

  ExperimentSpec GapTarget(const std::string& name, int dim_mu) const {
    ExperimentSpec s = Base(name);
    harness::SetKey(s, "source.dim_mu", std::to_string(dim_mu));
    harness::SetKey(s, "target.contact", "soft");
    harness::SetKey(s, "target.latency", "0.008");
    harness::SetKey(s, "target.actuator", "piecewise");
    return s;
  }

  std::map<Method, std::vector<double>> Finals(const ExperimentSpec& spec) const {
    const harness::ExperimentResult r = harness::RunExperiment(spec, log_);
    std::map<Method, std::vector<double>> out;
    for (const harness::MethodRun& run : r.runs) out[run.method].push_back(run.final_return);
    return out;
  }

  const std::map<Method, std::vector<double>>& Transfer() {
    if (!transfer_) {
      ExperimentSpec s = GapTarget("transfer", 5);
      s.methods = {Method::kSoCma, Method::kFinetuneRobust, Method::kFinetuneHist, Method::kCenter,
                   Method::kOracle};
      transfer_ = Finals(s);
    }
    return *transfer_;
  }

  Outcome Ordering() {
    const auto& f = Transfer();
    const double so = Mean(f.at(Method::kSoCma)), robust = Mean(f.at(Method::kFinetuneRobust)),
                 hist = Mean(f.at(Method::kFinetuneHist)), center = Mean(f.at(Method::kCenter)),
                 oracle = Mean(f.at(Method::kOracle));
    const bool ok = so >= robust && so >= hist && so >= center && so >= kOracleFraction * oracle;
    return {ok, Fmt("3-seed means: so-cma %.1f, finetune-robust %.1f, finetune-hist %.1f, "
                    "center %.1f, oracle %.1f (so-cma/oracle %.2f)",
                    so, robust, hist, center, oracle, so / oracle)};
  }

  Outcome DimensionEffect() {
    const double five = Mean(Transfer().at(Method::kSoCma));
    ExperimentSpec s = GapTarget("dim2", 2);
    s.methods = {Method::kSoCma};
    const double two = Mean(Finals(s).at(Method::kSoCma));
    return {five > two, Fmt("so-cma 3-seed mean: dim 5 %.1f, dim 2 %.1f", five, two)};
  }

  Outcome InDistribution() {
    ExperimentSpec s = Base("in_distribution");
    Rng rng(2024);
    const envs::DynParams mu = envs::SampleDynamics(s.source, rng);
    s.target_dynamics = std::vector<double>(mu.values.data(), mu.values.data() + mu.values.size());
    s.methods = {Method::kSoCma, Method::kFinetuneUposi};
    const auto f = Finals(s);
    const double so = Mean(f.at(Method::kSoCma)), uposi = Mean(f.at(Method::kFinetuneUposi));
    return {uposi >= kUposiFraction * so,
            Fmt("3-seed means: uposi %.1f, so-cma %.1f (ratio %.2f)", uposi, so, uposi / so)};
  }

  Outcome SparseReward() {
    ExperimentSpec s = Base("sparse");
    harness::SetKey(s, "target.reward", "sparse");
    s.methods = {Method::kSoCma, Method::kFinetuneRobust};
    std::vector<double> gen0, best, gains;
    for (int i = 0; i < s.seeds; ++i) {
      const std::uint64_t seed = s.base_seed + i;
      const harness::SourcePolicies sources =
          harness::PrepareSources(s, seed, harness::NeedsFor(s.methods), log_);

      ppo::SampleBudget budget(s.budget);
      ppo::FixedEnv target(s.TargetConfig(), s.TargetDynamics(), &budget);
      strategy::TargetObjective objective(sources.universal, target, s.n_trials);
      Rng rng(seed * 7919);
      const strategy::SearchResult r = strategy::SoCma(objective, s.cma, rng);
      double first = -std::numeric_limits<double>::infinity();
      for (const strategy::FitnessRecord& rec : r.records) {
        if (rec.generation == 0 && !rec.truncated) first = std::max(first, rec.mean);
      }
      gen0.push_back(first);
      best.push_back(r.best_fitness);

      ppo::FixedEnv eval_env(s.TargetConfig(), s.TargetDynamics());
      policies::Policy robust = policies::MakeRobust(sources.robust);
      Rng eval_rng(seed * 104729);
      const double before = harness::EvaluatePolicy(robust, eval_env, s.eval_episodes, true,
                                                    eval_rng).mean;
      const double after = harness::RunMethod(s, Method::kFinetuneRobust, seed, sources, log_)
                               .final_return;
      gains.push_back(after - before);
    }
    const double g0 = Mean(gen0), b = Mean(best);
    const bool so_ok = b - g0 >= kSparseGain * std::abs(g0);
    const double sd = harness::SampleStd(gains);
    const int df = static_cast<int>(gains.size()) - 1;
    const double t = sd > 0.0 ? Mean(gains) / (sd / std::sqrt(gains.size())) : 0.0;
    const bool ft_flat = std::abs(t) < kTCritical[df];
    return {so_ok && ft_flat,
            Fmt("so-cma best-ever %.2f vs generation-0 best %.2f (gain %.0f%%); finetune-robust "
                "gain %.2f, t=%.2f (|t| < %.3f needed, df %d)",
                b, g0, 100.0 * (b - g0) / std::abs(g0), Mean(gains), t, kTCritical[df], df)};
  }

  Outcome Specialization() {
    const ExperimentSpec s = Base("transfer");
    const envs::EnvConfig& cfg = s.source;
    std::vector<envs::ParamRange> ranges;
    for (const std::string& name : cfg.active) ranges.push_back(cfg.RangeOf(name));
    int wins = 0, pairs = 0;
    for (int i = 0; i < s.seeds; ++i) {
      const std::uint64_t seed = s.base_seed + i;
      const auto up = harness::PrepareSources(s, seed, {true, false, false, false}, log_).universal;
      Rng rng(seed * 31337);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      auto draw = [&] {
        Vec u(cfg.active.size());
        for (Eigen::Index d = 0; d < u.size(); ++d) u[d] = unit(rng);
        return u;
      };
      auto ret = [&](const Vec& strategy_mu, const Vec& dynamics_mu) {
        ppo::FixedEnv env(cfg, envs::DenormalizeParams(dynamics_mu, cfg.active, ranges));
        policies::Policy p = policies::MakeStrategy(up, strategy_mu);
        return harness::EvaluatePolicy(p, env, kPairEpisodes, true, rng).mean;
      };
      for (int k = 0; k < kPairsPerSeed; ++k) {
        Vec a = draw(), b = draw();
        while ((a - b).norm() < kPairDistance) b = draw();
        wins += ret(a, a) > ret(b, a) ? 1 : 0;
        ++pairs;
      }
    }
    const double rate = static_cast<double>(wins) / pairs;
    return {rate >= kSpecializationRate,
            Fmt("pi_a beats pi_b on dynamics a in %d of %d pairs (%.0f%%)", wins, pairs,
                100.0 * rate)};
  }

 private:
  std::string work_;
  harness::Logger log_;
  std::optional<std::map<Method, std::vector<double>>> transfer_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  bool verbose = false;
  app.add_option("--work", work, "working directory (source cache and experiment outputs)");
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_flag("-v,--verbose", verbose, "progress on stderr");
  CLI11_PARSE(app, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  harness::Logger log;
  if (verbose) {
    log = [&](const std::string& m) { std::fprintf(stderr, "[%7.1fs] %s\n", elapsed(), m.c_str()); };
  }
  std::filesystem::create_directories(work);
  Lab lab(work, log);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, Gradients},
      {2, Gae},
      {3, Cma},
      {4, Population},
      {5, GapMachinery},
      {6, [&] { return lab.Ordering(); }},
      {7, [&] { return lab.DimensionEffect(); }},
      {8, [&] { return lab.InDistribution(); }},
      {9, [&] { return lab.SparseReward(); }},
      {10, [&] { return lab.Specialization(); }},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const double t0 = elapsed();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2d %s (%.0f s): %s\n", id, o.pass ? "PASS" : "FAIL", elapsed() - t0,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
