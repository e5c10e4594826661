#include "sotransfer/ppo/context.h"

#include <string>

namespace sotransfer::ppo {

Vec ObservationContext::Build(const Vec& observation) {
  Require(observation.size() == obs_dim_, "context: observation width mismatch");
  return observation;
}

std::unique_ptr<ContextBuilder> ObservationContext::Clone() const {
  return std::make_unique<ObservationContext>(*this);
}

ParamsContext::ParamsContext(int obs_dim, int mu_dim, std::optional<Vec> fixed_mu)
    : obs_dim_(obs_dim), mu_dim_(mu_dim), fixed_mu_(std::move(fixed_mu)) {
  if (fixed_mu_) {
    Require(fixed_mu_->size() == mu_dim_, "strategy: mu has " +
                                              std::to_string(fixed_mu_->size()) +
                                              " entries, policy expects " +
                                              std::to_string(mu_dim_));
    current_mu_ = *fixed_mu_;
  } else {
    current_mu_ = Vec::Constant(mu_dim_, 0.5);
  }
}

void ParamsContext::BeginEpisode(const Vec& episode_mu) {
  if (fixed_mu_) return;
  Require(episode_mu.size() == mu_dim_, "context: episode mu width mismatch");
  current_mu_ = episode_mu;
}

void ParamsContext::set_mu(const Vec& mu) {
  Require(mu.size() == mu_dim_, "context: mu width mismatch");
  current_mu_ = mu;
}

Vec ParamsContext::Build(const Vec& observation) {
  Require(observation.size() == obs_dim_, "context: observation width mismatch");
  Vec x(Width());
  x << observation, current_mu_;
  return x;
}

std::unique_ptr<ContextBuilder> ParamsContext::Clone() const {
  return std::make_unique<ParamsContext>(*this);
}

HistoryWindow::HistoryWindow(int obs_dim, int action_dim, int length,
                             bool with_actions)
    : obs_dim_(obs_dim),
      action_dim_(action_dim),
      length_(length),
      with_actions_(with_actions) {
  Require(length >= 1, "history: length must be >= 1");
  Clear();
}

void HistoryWindow::Clear() {
  slots_.assign(length_, Vec::Zero(SlotWidth()));
  last_action_ = Vec::Zero(action_dim_);
}

void HistoryWindow::Push(const Vec& observation) {
  Require(observation.size() == obs_dim_, "history: observation width mismatch");
  Vec slot(SlotWidth());
  if (with_actions_) {
    slot << observation, last_action_;
  } else {
    slot = observation;
  }
  slots_.pop_front();
  slots_.push_back(std::move(slot));
}

Vec HistoryWindow::Flatten() const {
  Vec x(Width());
  for (int i = 0; i < length_; ++i) x.segment(i * SlotWidth(), SlotWidth()) = slots_[i];
  return x;
}

HistoryContext::HistoryContext(int obs_dim, int length)
    : window_(obs_dim, 0, length, false) {}

Vec HistoryContext::Build(const Vec& observation) {
  window_.Push(observation);
  return window_.Flatten();
}

std::unique_ptr<ContextBuilder> HistoryContext::Clone() const {
  return std::make_unique<HistoryContext>(*this);
}

}  // namespace sotransfer::ppo
