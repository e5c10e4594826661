#ifndef SOTRANSFER_POLICIES_POLICY_H_
#define SOTRANSFER_POLICIES_POLICY_H_

#include <memory>
#include <string>

#include "sotransfer/common.h"
#include "sotransfer/envs/env.h"
#include "sotransfer/policies/osi.h"
#include "sotransfer/ppo/actor_critic.h"
#include "sotransfer/ppo/context.h"
#include "sotransfer/ppo/ppo.h"
#include "sotransfer/ppo/rollout_env.h"

namespace sotransfer::policies {

// A network plus the context assembly it expects. Every policy family is
// driven through Reset/Act; only the context builder differs.
class Policy {
 public:
  Policy(std::string kind, std::shared_ptr<const ppo::ActorCritic> net,
         std::unique_ptr<ppo::ContextBuilder> context);
  Policy(const Policy& other);
  Policy& operator=(const Policy& other);
  Policy(Policy&&) = default;
  Policy& operator=(Policy&&) = default;

  const std::string& kind() const { return kind_; }
  const ppo::ActorCritic& network() const { return *net_; }
  const ppo::ContextBuilder& context() const { return *context_; }
  ppo::ContextBuilder& mutable_context() { return *context_; }

  // `episode_mu` reaches only builders that condition on true dynamics.
  void Reset(const Vec& episode_mu = Vec());
  Vec Act(const Vec& observation, bool deterministic, Rng& rng);

 private:
  std::string kind_;
  std::shared_ptr<const ppo::ActorCritic> net_;
  std::unique_ptr<ppo::ContextBuilder> context_;
};

// pi_mu: the universal policy with mu fixed. mu must lie in [0, 1]^N.
Policy MakeStrategy(std::shared_ptr<const ppo::ActorCritic> up, const Vec& mu);
Policy MakeRobust(std::shared_ptr<const ppo::ActorCritic> net);
Policy MakeHist(std::shared_ptr<const ppo::ActorCritic> net, int history = kHistoryLength);
Policy MakeUposi(std::shared_ptr<const ppo::ActorCritic> up,
                 std::shared_ptr<const OsiModel> osi);

// Single action of pi_mu.
Vec ActStrategy(const ppo::ActorCritic& up, const Vec& mu, const Vec& observation,
                bool deterministic, Rng& rng);

struct EpisodeResult {
  double total_return = 0.0;  // undiscounted
  int length = 0;
  bool budget_cut = false;  // stopped early because the sample budget ran out
};

// Runs one episode. A BudgetExhausted from the environment ends the episode
// with budget_cut set instead of propagating.
EpisodeResult RunEpisode(Policy& policy, ppo::RolloutEnv& env, bool deterministic,
                         Rng& rng);

// Policy-family training on the randomized source.
ppo::ActorCritic TrainRobust(const envs::EnvConfig& source, const ppo::PpoConfig& config,
                             Rng& rng, std::vector<ppo::IterationLog>* log = nullptr);
ppo::ActorCritic TrainHist(const envs::EnvConfig& source, int history,
                           const ppo::PpoConfig& config, Rng& rng,
                           std::vector<ppo::IterationLog>* log = nullptr);

}  // namespace sotransfer::policies

#endif  // SOTRANSFER_POLICIES_POLICY_H_
