#ifndef SOTRANSFER_HARNESS_SPEC_H_
#define SOTRANSFER_HARNESS_SPEC_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sotransfer/envs/env.h"
#include "sotransfer/policies/osi.h"
#include "sotransfer/ppo/ppo.h"
#include "sotransfer/strategy/gp.h"
#include "sotransfer/strategy/model_based.h"
#include "sotransfer/strategy/search.h"

namespace sotransfer::harness {

enum class Method {
  kSoCma,
  kSoBayes,
  kSoModelBased,
  kFinetuneRobust,
  kFinetuneHist,
  kFinetuneUposi,
  kOracle,
  kCenter,  // the fixed mid-box strategy, no target samples
};

std::string MethodName(Method m);
// Throws ConfigError naming the closest valid method.
Method ParseMethod(const std::string& name);
bool IsStrategySearch(Method m);
bool IsFinetune(Method m);

enum class Preset { kDesk, kFull };

// Desk preset for source families: 300 x 4,000. The oracle keeps the plain
// desk PPO preset.
ppo::PpoConfig DeskSourcePpo();

struct ExperimentSpec {
  envs::EnvConfig source = envs::EnvConfig::Hopper(5);
  int dim_mu = 5;
  envs::GapConfig target;
  // Target dynamics over the source's active dimensions; nominal when unset.
  std::optional<std::vector<double>> target_dynamics;
  // Target reward mode; the source's when unset.
  std::optional<envs::RewardMode> target_reward;
  std::vector<Method> methods;
  std::int64_t budget = 30000;
  int seeds = 3;
  std::uint64_t base_seed = 1;
  std::string output_dir = "out";
  std::string source_dir;  // defaults to <output_dir>/sources
  Preset preset = Preset::kDesk;
  std::int64_t milestone_every = 5000;
  int eval_episodes = 20;
  int n_trials = 3;
  bool debit_evaluations = false;
  int history = policies::kHistoryLength;

  ppo::PpoConfig ppo = DeskSourcePpo();  // source training
  ppo::PpoConfig finetune = ppo::PpoConfig::Finetune();
  ppo::PpoConfig oracle = ppo::PpoConfig::Desk();
  policies::OsiDataOptions osi_data;
  policies::OsiTrainOptions osi_train;
  strategy::CmaOptions cma;
  strategy::BayesOptions bayes;
  strategy::ModelBasedOptions model_based;

  std::string sweep_parameter;
  std::vector<std::string> sweep_values;

  void Validate() const;
  envs::EnvConfig TargetConfig() const;
  envs::DynParams TargetDynamics() const;
  std::string SourceDir() const;
};

// Strict parser for the sectioned key = value format. Unknown keys, bad
// values and malformed lines raise ConfigError with "<origin>:<line>: ...".
ExperimentSpec ParseConfig(const std::string& text, const std::string& origin = "<config>");
ExperimentSpec LoadConfig(const std::string& path);

// Every key with its current value, in a fixed order. ParseConfig of the
// result reproduces the spec.
std::string EmitConfig(const ExperimentSpec& spec);
// Hash of every key except the output and source directories.
std::string SpecHash(const ExperimentSpec& spec);
// Hash of the fields that determine source training for one seed.
std::string SourceHash(const ExperimentSpec& spec, std::uint64_t seed);

// Sets one key ("section.key") from text, as a config line would.
void SetKey(ExperimentSpec& spec, const std::string& dotted_key, const std::string& value);

struct KeyDoc {
  std::string section;
  std::string key;
  std::string help;
};
std::vector<KeyDoc> ConfigKeys();

std::size_t EditDistance(const std::string& a, const std::string& b);

}  // namespace sotransfer::harness

#endif  // SOTRANSFER_HARNESS_SPEC_H_
