#include "sotransfer/ppo/actor_critic.h"

#include <cmath>

namespace sotransfer::ppo {

int ActorCritic::NumParams() const {
  return actor.NumParams() + static_cast<int>(head.log_std.size()) +
         critic.NumParams();
}

void ActorCritic::Validate() const {
  actor.Validate();
  critic.Validate();
  Require(head.log_std.size() == actor.OutputSize(),
          "actor-critic: log_std width differs from action width");
  Require(head.log_std.allFinite(), "actor-critic: non-finite log_std");
  Require(critic.InputSize() == actor.InputSize() && critic.OutputSize() == 1,
          "actor-critic: critic shape mismatch");
  Require(normalizer.mean.size() == actor.InputSize(),
          "actor-critic: normalizer width mismatch");
}

double ActorCritic::RewardScale() const {
  return 1.0 / std::sqrt(return_stats.var[0] + 1e-8);
}

ActorCritic MakeActorCritic(int input, int action, Rng& rng,
                            double init_log_std) {
  Require(input >= 1 && action >= 1, "actor-critic: empty input or action");
  ActorCritic ac;
  ac.actor = nn::MakeMlp(input, action, rng, 0.01);
  ac.head.log_std = Vec::Constant(action, init_log_std);
  ac.critic = nn::MakeMlp(input, 1, rng, 1.0);
  ac.normalizer = nn::RunningNormalizer::ForSize(input);
  ac.return_stats = nn::RunningNormalizer::ForSize(1);
  return ac;
}

Vec ActionMean(const ActorCritic& ac, const Vec& context) {
  return nn::Forward(ac.actor, ac.normalizer.Apply(context));
}

double StateValue(const ActorCritic& ac, const Vec& context) {
  return nn::Forward(ac.critic, ac.normalizer.Apply(context))[0];
}

Vec Act(const ActorCritic& ac, const Vec& context, bool deterministic, Rng& rng) {
  Vec mean = ActionMean(ac, context);
  if (deterministic) return mean;
  return nn::GaussianSample(mean, ac.head.log_std, rng);
}

Vec FlattenParams(const ActorCritic& ac) {
  const Vec a = nn::Flatten(ac.actor);
  const Vec c = nn::Flatten(ac.critic);
  Vec flat(a.size() + ac.head.log_std.size() + c.size());
  flat << a, ac.head.log_std, c;
  return flat;
}

void AssignParams(ActorCritic& ac, const Vec& flat) {
  Require(flat.size() == ac.NumParams(), "actor-critic: flat size mismatch");
  const int na = ac.actor.NumParams();
  const int nl = static_cast<int>(ac.head.log_std.size());
  nn::Assign(ac.actor, flat, 0);
  ac.head.log_std = flat.segment(na, nl);
  nn::Assign(ac.critic, flat, na + nl);
}

}  // namespace sotransfer::ppo
