#ifndef SOTRANSFER_POLICIES_OSI_H_
#define SOTRANSFER_POLICIES_OSI_H_

#include <functional>
#include <memory>
#include <vector>

#include "json.hpp"
#include "sotransfer/common.h"
#include "sotransfer/nn/mlp.h"
#include "sotransfer/nn/normalizer.h"
#include "sotransfer/ppo/actor_critic.h"
#include "sotransfer/ppo/context.h"
#include "sotransfer/ppo/rollout.h"

namespace sotransfer::policies {

inline constexpr int kHistoryLength = 10;

// Regressor from a flattened history window to normalized mu.
struct OsiModel {
  nn::Mlp net;
  nn::RunningNormalizer input_norm;  // fitted once on the training inputs
  int obs_dim = 0;
  int action_dim = 0;
  int history = kHistoryLength;
  bool with_actions = true;

  int InputWidth() const;
  int OutputWidth() const { return net.OutputSize(); }
  // Raw regression output.
  Vec PredictRaw(const Vec& history_input) const;
  // Clipped into [0, 1]^N.
  Vec Predict(const Vec& history_input) const;
};

struct OsiDataset {
  Mat inputs;   // columns are flattened history windows
  Mat targets;  // columns are normalized mu
  std::vector<int> episode;  // source episode of each column
  int size() const { return static_cast<int>(inputs.cols()); }
};

struct OsiDataOptions {
  int episodes = 200;
  int samples_per_episode = 50;  // windows drawn uniformly from each episode
  bool with_actions = true;
  int history = kHistoryLength;
  bool deterministic = false;
};

// History windows from recorded episodes, labeled with each episode's mu.
// Window at step t holds o_{t-h+1..t}, each paired with the preceding action.
OsiDataset BuildOsiDataset(const ppo::RolloutBatch& batch, int history,
                           bool with_actions, int samples_per_episode, Rng& rng);

// Runs the universal policy with per-episode mu draws and builds the dataset.
OsiDataset CollectOsiDataset(const ppo::ActorCritic& up, ppo::RolloutEnv& source,
                             const OsiDataOptions& options, Rng& rng);

struct OsiTrainOptions {
  int epochs = 60;
  int minibatch = 128;
  double learning_rate = 1e-3;
  double holdout_fraction = 0.2;
};

struct OsiReport {
  double train_rmse = 0.0;
  double holdout_rmse = 0.0;
  double midpoint_rmse = 0.0;  // constant 0.5 predictor on the held-out split
  Vec holdout_rmse_per_dim;
  Vec midpoint_rmse_per_dim;
};

// Minimizes mean squared error. Throws ConfigError on an empty dataset.
OsiModel TrainOsi(const OsiDataset& data, int obs_dim, int action_dim, int history,
                  bool with_actions, const OsiTrainOptions& options, Rng& rng,
                  OsiReport* report = nullptr);

// Per-dimension RMSE of `model` (clipped output) and of the midpoint predictor.
OsiReport EvaluateOsi(const OsiModel& model, const OsiDataset& data);

// Maps a flattened history window to a mu estimate.
using MuEstimator = std::function<Vec(const Vec& history_input)>;

// (o, clip(estimate(history))) with the estimate refreshed at every step.
class OsiContext : public ppo::ContextBuilder {
 public:
  explicit OsiContext(std::shared_ptr<const OsiModel> osi);
  OsiContext(int obs_dim, int action_dim, int mu_dim, int history,
             bool with_actions, MuEstimator estimator);
  int Width() const override { return obs_dim_ + mu_dim_; }
  void BeginEpisode(const Vec&) override { window_.Clear(); }
  Vec Build(const Vec& observation) override;
  void RecordAction(const Vec& action) override { window_.RecordAction(action); }
  std::unique_ptr<ppo::ContextBuilder> Clone() const override;
  const Vec& last_estimate() const { return estimate_; }

 private:
  int obs_dim_;
  int mu_dim_;
  MuEstimator estimator_;
  ppo::HistoryWindow window_;
  Vec estimate_;
};

nlohmann::json OsiToJson(const OsiModel& model);
OsiModel OsiFromJson(const nlohmann::json& j);

}  // namespace sotransfer::policies

#endif  // SOTRANSFER_POLICIES_OSI_H_
