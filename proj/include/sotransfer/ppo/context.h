#ifndef SOTRANSFER_PPO_CONTEXT_H_
#define SOTRANSFER_PPO_CONTEXT_H_

#include <deque>
#include <memory>
#include <optional>

#include "sotransfer/common.h"

namespace sotransfer::ppo {

// Assembles the network input for one policy kind from the observation
// stream. Holds per-episode state (histories, the conditioning vector).
class ContextBuilder {
 public:
  virtual ~ContextBuilder() = default;
  virtual int Width() const = 0;
  // `episode_mu` is the normalized dynamics of the episode, known only in
  // simulation; builders that must not see it ignore it.
  virtual void BeginEpisode(const Vec& episode_mu) = 0;
  virtual Vec Build(const Vec& observation) = 0;
  // The action chosen from the last built context.
  virtual void RecordAction(const Vec& /*action*/) {}
  virtual std::unique_ptr<ContextBuilder> Clone() const = 0;
};

// o -> o
class ObservationContext : public ContextBuilder {
 public:
  explicit ObservationContext(int obs_dim) : obs_dim_(obs_dim) {}
  int Width() const override { return obs_dim_; }
  void BeginEpisode(const Vec&) override {}
  Vec Build(const Vec& observation) override;
  std::unique_ptr<ContextBuilder> Clone() const override;

 private:
  int obs_dim_;
};

// (o, mu). With a fixed mu the builder is a strategy and ignores the
// episode's dynamics; otherwise it conditions on the true episode mu.
class ParamsContext : public ContextBuilder {
 public:
  ParamsContext(int obs_dim, int mu_dim, std::optional<Vec> fixed_mu = std::nullopt);
  int Width() const override { return obs_dim_ + mu_dim_; }
  void BeginEpisode(const Vec& episode_mu) override;
  Vec Build(const Vec& observation) override;
  std::unique_ptr<ContextBuilder> Clone() const override;
  void set_mu(const Vec& mu);

 private:
  int obs_dim_;
  int mu_dim_;
  std::optional<Vec> fixed_mu_;
  Vec current_mu_;
};

// Sliding window of the last h observations (and optionally the action
// that led into each one), zero-padded at the start of an episode. Ordered
// oldest to newest.
class HistoryWindow {
 public:
  HistoryWindow(int obs_dim, int action_dim, int length, bool with_actions);
  int SlotWidth() const { return obs_dim_ + (with_actions_ ? action_dim_ : 0); }
  int Width() const { return length_ * SlotWidth(); }
  int length() const { return length_; }
  void Clear();
  void Push(const Vec& observation);
  void RecordAction(const Vec& action) { last_action_ = action; }
  Vec Flatten() const;

 private:
  int obs_dim_;
  int action_dim_;
  int length_;
  bool with_actions_;
  std::deque<Vec> slots_;
  Vec last_action_;
};

// (o_{t-h+1}, ..., o_t)
class HistoryContext : public ContextBuilder {
 public:
  HistoryContext(int obs_dim, int length);
  int Width() const override { return window_.Width(); }
  void BeginEpisode(const Vec&) override { window_.Clear(); }
  Vec Build(const Vec& observation) override;
  std::unique_ptr<ContextBuilder> Clone() const override;

 private:
  HistoryWindow window_;
};

}  // namespace sotransfer::ppo

#endif  // SOTRANSFER_PPO_CONTEXT_H_
