#ifndef SOTRANSFER_PPO_ACTOR_CRITIC_H_
#define SOTRANSFER_PPO_ACTOR_CRITIC_H_

#include "sotransfer/common.h"
#include "sotransfer/nn/gaussian.h"
#include "sotransfer/nn/mlp.h"
#include "sotransfer/nn/normalizer.h"

namespace sotransfer::ppo {

// Gaussian policy and separate value network over the same normalized input.
struct ActorCritic {
  nn::Mlp actor;
  nn::GaussianHead head;
  nn::Mlp critic;
  nn::RunningNormalizer normalizer;
  // Running statistics of the discounted return; rewards are divided by its
  // standard deviation before advantage estimation.
  nn::RunningNormalizer return_stats;

  double RewardScale() const;

  int InputSize() const { return actor.InputSize(); }
  int ActionSize() const { return actor.OutputSize(); }
  int NumParams() const;
  void Validate() const;
};

ActorCritic MakeActorCritic(int input, int action, Rng& rng,
                            double init_log_std = 0.0);

Vec ActionMean(const ActorCritic& ac, const Vec& context);
double StateValue(const ActorCritic& ac, const Vec& context);
// Mean action when `deterministic`, otherwise a draw from the head.
Vec Act(const ActorCritic& ac, const Vec& context, bool deterministic, Rng& rng);

// [actor, log_std, critic]; the normalizer is not part of the trained vector.
Vec FlattenParams(const ActorCritic& ac);
void AssignParams(ActorCritic& ac, const Vec& flat);

}  // namespace sotransfer::ppo

#endif  // SOTRANSFER_PPO_ACTOR_CRITIC_H_
