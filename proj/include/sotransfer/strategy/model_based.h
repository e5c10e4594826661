#ifndef SOTRANSFER_STRATEGY_MODEL_BASED_H_
#define SOTRANSFER_STRATEGY_MODEL_BASED_H_

#include <functional>
#include <memory>
#include <vector>

#include "sotransfer/common.h"
#include "sotransfer/envs/env.h"
#include "sotransfer/nn/adam.h"
#include "sotransfer/nn/recurrent.h"
#include "sotransfer/ppo/actor_critic.h"
#include "sotransfer/ppo/rollout_env.h"
#include "sotransfer/strategy/search.h"

namespace sotransfer::strategy {

// One recorded trajectory: observations o_0..o_T and actions a_0..a_{T-1}.
struct Trajectory {
  Mat observations;
  Mat actions;
  int length() const { return static_cast<int>(actions.cols()); }
};

// Recurrent next-observation-delta model over (o_t, a_t) sequences. Inputs
// and outputs are standardized with statistics frozen at the first fit.
struct DynamicsModel {
  nn::RecurrentModel rnn;
  Vec in_mean, in_std, out_mean, out_std;
  nn::AdamState adam;

  int obs_dim() const { return static_cast<int>(out_mean.size()); }
};

struct DynamicsTrainOptions {
  int chunk = 16;
  int batch = 16;
  int hidden = 64;
  double learning_rate = 1e-3;
};

DynamicsModel MakeDynamicsModel(const std::vector<Trajectory>& data, int hidden, Rng& rng,
                                double learning_rate);

// `steps` Adam steps on random length-`chunk` windows.
void TrainDynamics(DynamicsModel& model, const std::vector<Trajectory>& data, int steps,
                   const DynamicsTrainOptions& options, Rng& rng);

// Teacher-forced one-step RMSE of the predicted observation delta.
double OneStepError(const DynamicsModel& model, const std::vector<Trajectory>& data);

// Return of pi_mu from `start` under the model, with the true reward formula
// applied to predicted observations.
double SurrogateReturn(const DynamicsModel& model, const ppo::ActorCritic& up,
                       const Vec& mu, const Vec& start, const envs::EnvConfig& config,
                       int horizon);

using SurrogateFn = std::function<double(const Vec& mu, Rng& rng)>;

struct ModelBasedOptions {
  int initial_samples = 5000;
  int refit_steps = 200;
  int initial_fit_steps = 1000;
  int real_episodes = 3;
  int surrogate_episodes = 3;
  int surrogate_horizon = 200;
  int surrogate_generations = 8;
  int divergence_patience = 3;
  DynamicsTrainOptions train;
  // Replaces the learned model when set (used to test the outer loop).
  SurrogateFn surrogate_override;
};

struct ModelBasedResult : SearchResult {
  std::vector<double> validation_error;  // after the initial fit and each refit
  bool frozen = false;
  std::int64_t initial_samples = 0;
};

// Collects `initial_samples` target transitions with uniformly drawn
// strategies, then alternates surrogate CMA search, one real batch with the
// best surrogate mu, and a model refit, until the budget runs out.
ModelBasedResult SoModelBased(std::shared_ptr<const ppo::ActorCritic> up,
                              ppo::FixedEnv& target, const envs::EnvConfig& target_config,
                              const ModelBasedOptions& options, Rng& rng);

}  // namespace sotransfer::strategy

#endif  // SOTRANSFER_STRATEGY_MODEL_BASED_H_
