#ifndef SOTRANSFER_PPO_PPO_H_
#define SOTRANSFER_PPO_PPO_H_

#include <functional>
#include <string>
#include <vector>

#include "sotransfer/common.h"
#include "sotransfer/nn/adam.h"
#include "sotransfer/ppo/actor_critic.h"
#include "sotransfer/ppo/context.h"
#include "sotransfer/ppo/gae.h"
#include "sotransfer/ppo/rollout.h"
#include "sotransfer/ppo/rollout_env.h"

namespace sotransfer::ppo {

struct PpoConfig {
  int steps_per_iteration = 4000;
  int iterations = 100;
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  int epochs = 10;
  int minibatch = 64;
  double learning_rate = 3e-4;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  double init_log_std = 0.0;
  bool scale_rewards = true;

  void Validate() const;
  static PpoConfig Desk();      // 100 x 4,000
  static PpoConfig Full();      // 500 x 40,000
  static PpoConfig Finetune();  // 2,000 steps per iteration
};

// Per-sample quantities the update consumes.
struct UpdateBatch {
  Mat contexts;  // raw
  Mat actions;
  Vec log_probs;
  Vec advantages;  // normalized
  Vec returns;
};

// Rewards are multiplied by `reward_scale` before advantage estimation.
UpdateBatch PrepareUpdate(const RolloutBatch& batch, const PpoConfig& config,
                          double reward_scale = 1.0);

// Per-step discounted return accumulated from each episode start, the
// statistic behind reward scaling.
Mat DiscountedRunningReturns(const RolloutBatch& batch, double gamma);

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;  // before capping, mean over minibatches
};

// Clipped surrogate objective and its gradient for one minibatch, as the
// flat [actor, log_std, critic] vector. Exposed for testing.
struct LossAndGrad {
  double loss = 0.0;
  UpdateStats stats;
  Vec grad;
};
LossAndGrad PpoLoss(const ActorCritic& ac, const UpdateBatch& batch,
                    const std::vector<int>& indices, const PpoConfig& config);

// Epochs of shuffled minibatch steps. Throws RuntimeFailure on a non-finite
// loss.
UpdateStats PpoUpdate(ActorCritic& ac, nn::AdamState& adam,
                      const UpdateBatch& batch, const PpoConfig& config, Rng& rng);

struct IterationLog {
  int iteration = 0;
  std::int64_t total_steps = 0;
  int episodes = 0;
  double mean_return = 0.0;
  UpdateStats stats;
};

using IterationCallback = std::function<void(const IterationLog&, const ActorCritic&)>;

struct TrainOptions {
  bool update_normalizer = true;
  // kExactSteps for target-environment runs so the budget is never overrun.
  CollectMode collect_mode = CollectMode::kCompleteEpisodes;
  IterationCallback on_iteration;
};

// Plain PPO loop on `env` with inputs assembled by `context`.
std::vector<IterationLog> Train(ActorCritic& ac, const ContextBuilder& context,
                                RolloutEnv& env, const PpoConfig& config, Rng& rng,
                                const TrainOptions& options = {});

// Fresh actor-critic for `context` trained in `env`.
ActorCritic TrainPolicy(const ContextBuilder& context, RolloutEnv& env,
                        const PpoConfig& config, Rng& rng,
                        std::vector<IterationLog>* log = nullptr,
                        const TrainOptions& options = {});

// Universal policy: input (o, normalized mu) with mu resampled per episode.
// With `condition_on_mu` false the input is o alone (the robust policy).
ActorCritic TrainUniversal(const envs::EnvConfig& env_config, bool condition_on_mu,
                           const PpoConfig& config, Rng& rng,
                           std::vector<IterationLog>* log = nullptr);

// floor(budget_steps / steps_per_iteration) iterations in `target`, with the
// input normalizer frozen. `target` is expected to debit a shared budget.
std::vector<IterationLog> Finetune(ActorCritic& ac, const ContextBuilder& context,
                                   RolloutEnv& target, std::int64_t budget_steps,
                                   const PpoConfig& config, Rng& rng,
                                   const IterationCallback& on_iteration = {});

}  // namespace sotransfer::ppo

#endif  // SOTRANSFER_PPO_PPO_H_
