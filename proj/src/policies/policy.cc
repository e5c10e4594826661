#include "sotransfer/policies/policy.h"

#include <string>

#include "sotransfer/ppo/budget.h"

namespace sotransfer::policies {

Policy::Policy(std::string kind, std::shared_ptr<const ppo::ActorCritic> net,
               std::unique_ptr<ppo::ContextBuilder> context)
    : kind_(std::move(kind)), net_(std::move(net)), context_(std::move(context)) {
  Require(net_ != nullptr && context_ != nullptr, "policy: missing network or context");
  Require(context_->Width() == net_->InputSize(),
          kind_ + " policy: context width " + std::to_string(context_->Width()) +
              " does not match network input " + std::to_string(net_->InputSize()));
}

Policy::Policy(const Policy& other)
    : kind_(other.kind_), net_(other.net_), context_(other.context_->Clone()) {}

Policy& Policy::operator=(const Policy& other) {
  if (this != &other) {
    kind_ = other.kind_;
    net_ = other.net_;
    context_ = other.context_->Clone();
  }
  return *this;
}

void Policy::Reset(const Vec& episode_mu) { context_->BeginEpisode(episode_mu); }

Vec Policy::Act(const Vec& observation, bool deterministic, Rng& rng) {
  const Vec action = ppo::Act(*net_, context_->Build(observation), deterministic, rng);
  context_->RecordAction(action);
  return action;
}

Policy MakeStrategy(std::shared_ptr<const ppo::ActorCritic> up, const Vec& mu) {
  Require(mu.size() > 0, "strategy: empty mu");
  Require((mu.array() >= 0.0).all() && (mu.array() <= 1.0).all(),
          "strategy: mu must lie in [0, 1]");
  const int obs = up->InputSize() - static_cast<int>(mu.size());
  Require(obs > 0, "strategy: mu wider than the policy input");
  auto ctx = std::make_unique<ppo::ParamsContext>(obs, static_cast<int>(mu.size()), mu);
  return Policy("strategy", std::move(up), std::move(ctx));
}

Policy MakeRobust(std::shared_ptr<const ppo::ActorCritic> net) {
  const int obs = net->InputSize();
  return Policy("robust", std::move(net), std::make_unique<ppo::ObservationContext>(obs));
}

Policy MakeHist(std::shared_ptr<const ppo::ActorCritic> net, int history) {
  Require(history >= 1 && net->InputSize() % history == 0,
          "hist: network input is not a multiple of the history length");
  const int obs = net->InputSize() / history;
  return Policy("hist", std::move(net),
                std::make_unique<ppo::HistoryContext>(obs, history));
}

Policy MakeUposi(std::shared_ptr<const ppo::ActorCritic> up,
                 std::shared_ptr<const OsiModel> osi) {
  return Policy("uposi", std::move(up), std::make_unique<OsiContext>(std::move(osi)));
}

Vec ActStrategy(const ppo::ActorCritic& up, const Vec& mu, const Vec& observation,
                bool deterministic, Rng& rng) {
  Require((mu.array() >= 0.0).all() && (mu.array() <= 1.0).all(),
          "strategy: mu must lie in [0, 1]");
  Require(observation.size() + mu.size() == up.InputSize(),
          "strategy: observation and mu widths do not match the policy input");
  Vec x(up.InputSize());
  x << observation, mu;
  return ppo::Act(up, x, deterministic, rng);
}

EpisodeResult RunEpisode(Policy& policy, ppo::RolloutEnv& env, bool deterministic,
                         Rng& rng) {
  EpisodeResult r;
  Vec o = env.Reset(rng);
  policy.Reset(env.EpisodeMu());
  while (true) {
    const Vec a = policy.Act(o, deterministic, rng);
    envs::StepResult s;
    try {
      s = env.Step(a);
    } catch (const ppo::BudgetExhausted&) {
      r.budget_cut = true;
      return r;
    }
    r.total_return += s.reward;
    ++r.length;
    if (s.Done()) return r;
    o = s.observation;
  }
}

ppo::ActorCritic TrainRobust(const envs::EnvConfig& source, const ppo::PpoConfig& config,
                             Rng& rng, std::vector<ppo::IterationLog>* log) {
  return ppo::TrainUniversal(source, false, config, rng, log);
}

ppo::ActorCritic TrainHist(const envs::EnvConfig& source, int history,
                           const ppo::PpoConfig& config, Rng& rng,
                           std::vector<ppo::IterationLog>* log) {
  ppo::RandomizedEnv env(source);
  ppo::HistoryContext context(env.ObservationSize(), history);
  return ppo::TrainPolicy(context, env, config, rng, log);
}

}  // namespace sotransfer::policies
