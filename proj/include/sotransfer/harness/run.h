#ifndef SOTRANSFER_HARNESS_RUN_H_
#define SOTRANSFER_HARNESS_RUN_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sotransfer/common.h"
#include "sotransfer/harness/spec.h"
#include "sotransfer/policies/osi.h"
#include "sotransfer/policies/policy.h"
#include "sotransfer/ppo/actor_critic.h"
#include "sotransfer/ppo/rollout_env.h"

namespace sotransfer::harness {

struct EvalStats {
  double mean = 0.0;
  double std = 0.0;  // population std over episodes
  std::vector<double> returns;
};

// Undiscounted returns of `n_episodes` episodes. Steps are debited only if
// `env` itself debits a budget.
EvalStats EvaluatePolicy(policies::Policy& policy, ppo::RolloutEnv& env, int n_episodes,
                         bool deterministic, Rng& rng);

// Progress messages; silent when empty.
using Logger = std::function<void(const std::string&)>;

struct SourceNeeds {
  bool universal = false;
  bool robust = false;
  bool hist = false;
  bool osi = false;
};
SourceNeeds NeedsFor(const std::vector<Method>& methods);
SourceNeeds AllSources();

struct SourcePolicies {
  std::string directory;  // cache directory holding checkpoints and curves
  std::shared_ptr<const ppo::ActorCritic> universal;
  std::shared_ptr<const ppo::ActorCritic> robust;
  std::shared_ptr<const ppo::ActorCritic> hist;
  std::shared_ptr<const policies::OsiModel> osi;
};

// Trains the requested families for one seed, or loads them from
// <SourceDir>/<SourceHash>/ when present.
SourcePolicies PrepareSources(const ExperimentSpec& spec, std::uint64_t seed,
                              const SourceNeeds& needs, const Logger& log = {});

// Oracle policy trained in the target at spec.oracle scale, cached next to the
// source policies under a hash that also covers the target.
std::shared_ptr<const ppo::ActorCritic> PrepareOracle(const ExperimentSpec& spec,
                                                      std::uint64_t seed,
                                                      const Logger& log = {});

struct CurveRow {
  std::int64_t samples = 0;  // milestone
  std::int64_t used = 0;     // target steps consumed when the row was taken
  double value = 0.0;        // reported return
  double eval_return = 0.0;  // frozen-policy evaluation return
  double best_ever = 0.0;    // strategy search only, NaN otherwise
  double latest = 0.0;       // strategy search only, NaN otherwise
};

struct MethodRun {
  Method method = Method::kCenter;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<CurveRow> curve;
  double final_return = 0.0;  // evaluation of the final policy
  std::optional<Vec> best_mu;
};

// One method, one seed, under a fresh budget. Exceptions other than
// ConfigError are caught and reported through `failed`.
MethodRun RunMethod(const ExperimentSpec& spec, Method method, std::uint64_t seed,
                    const SourcePolicies& sources, const Logger& log = {});

struct ExperimentResult {
  std::string directory;
  std::vector<MethodRun> runs;
};

// All methods and seeds of `spec`. Writes config.ini, spec_hash.txt,
// <method>/seed_<s>/{curve.csv,trace.csv,...}, sources/seed_<s>/ training
// curves, then the curves.csv and final.csv summaries.
ExperimentResult RunExperiment(const ExperimentSpec& spec, const Logger& log = {});

// Rebuilds curves.csv and final.csv from every <method>/seed_*/ directory
// under `directory`.
void WriteSummaries(const std::string& directory);

struct SweepResult {
  std::vector<std::string> values;
  std::vector<ExperimentResult> cells;
};

// One experiment per value of the target key spec.sweep_parameter, each in
// <output_dir>/<parameter>=<value>, then sweep.csv (value, method, mean, std).
SweepResult RunSweep(const ExperimentSpec& spec, const Logger& log = {});

// Concatenates the final.csv and curves.csv tables of several experiment
// directories, adding an experiment column, into <out_prefix>_final.csv and
// <out_prefix>_curves.csv.
void MergeReports(const std::vector<std::string>& directories, const std::string& out_prefix);

// Milestones every `every` steps up to `budget`, with `budget` itself last.
std::vector<std::int64_t> Milestones(std::int64_t budget, std::int64_t every);

// Sample standard deviation; 0 for fewer than two values.
double SampleStd(const std::vector<double>& v);

}  // namespace sotransfer::harness

#endif  // SOTRANSFER_HARNESS_RUN_H_
