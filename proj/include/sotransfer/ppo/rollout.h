#ifndef SOTRANSFER_PPO_ROLLOUT_H_
#define SOTRANSFER_PPO_ROLLOUT_H_

#include <vector>

#include "sotransfer/common.h"
#include "sotransfer/ppo/actor_critic.h"
#include "sotransfer/ppo/context.h"
#include "sotransfer/ppo/rollout_env.h"

namespace sotransfer::ppo {

// Time-indexed transitions of consecutive episodes. Columns of the matrices
// are steps. Episode e spans [episode_starts[e], episode_ends[e]).
struct RolloutBatch {
  Mat observations;
  Mat contexts;  // raw (unnormalized) network inputs
  Mat actions;
  Vec rewards;
  Vec values;
  Vec log_probs;
  std::vector<char> terminals;  // true failure at this step, no bootstrap
  std::vector<int> episode_starts;
  std::vector<int> episode_ends;
  std::vector<double> bootstrap;  // V(s_T) of each episode, 0 if terminal
  std::vector<char> complete;     // ended by termination or horizon
  std::vector<Vec> episode_mu;
  std::vector<double> episode_returns;  // undiscounted

  int size() const { return static_cast<int>(rewards.size()); }
  int NumEpisodes() const { return static_cast<int>(episode_ends.size()); }
  // Throws ConfigError if the arrays disagree in length or boundaries are
  // inconsistent with the termination flags.
  void Validate() const;
};

enum class CollectMode {
  kCompleteEpisodes,  // keep going until the current episode ends
  kExactSteps,        // stop at exactly n steps, truncating the last episode
};

struct CollectOptions {
  int n_steps = 4000;
  CollectMode mode = CollectMode::kCompleteEpisodes;
  bool deterministic = false;
};

RolloutBatch CollectRollouts(const ActorCritic& ac, const ContextBuilder& context,
                             RolloutEnv& env, const CollectOptions& options,
                             Rng& rng);

}  // namespace sotransfer::ppo

#endif  // SOTRANSFER_PPO_ROLLOUT_H_
