#include "sotransfer/policies/osi.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "sotransfer/nn/adam.h"
#include "sotransfer/ppo/checkpoint.h"
#include "sotransfer/ppo/rollout.h"

namespace sotransfer::policies {

int OsiModel::InputWidth() const {
  return history * (obs_dim + (with_actions ? action_dim : 0));
}

Vec OsiModel::PredictRaw(const Vec& history_input) const {
  Require(history_input.size() == InputWidth(), "osi: history width mismatch");
  return nn::Forward(net, input_norm.Apply(history_input));
}

Vec OsiModel::Predict(const Vec& history_input) const {
  return PredictRaw(history_input).cwiseMax(0.0).cwiseMin(1.0);
}

OsiDataset BuildOsiDataset(const ppo::RolloutBatch& batch, int history,
                           bool with_actions, int samples_per_episode, Rng& rng) {
  Require(batch.NumEpisodes() > 0, "osi: no episodes to build a dataset from");
  Require(samples_per_episode >= 1, "osi: samples_per_episode must be >= 1");
  const int obs_dim = static_cast<int>(batch.observations.rows());
  const int act_dim = static_cast<int>(batch.actions.rows());
  const int mu_dim = static_cast<int>(batch.episode_mu.front().size());
  Require(mu_dim > 0, "osi: episodes carry no mu labels");
  ppo::HistoryWindow window(obs_dim, act_dim, history, with_actions);

  std::vector<Vec> xs, ys;
  std::vector<int> episode;
  for (int e = 0; e < batch.NumEpisodes(); ++e) {
    const int start = batch.episode_starts[e];
    const int len = batch.episode_ends[e] - start;
    std::vector<int> picks(len);
    std::iota(picks.begin(), picks.end(), 0);
    if (len > samples_per_episode) {
      std::shuffle(picks.begin(), picks.end(), rng);
      picks.resize(samples_per_episode);
      std::sort(picks.begin(), picks.end());
    }
    window.Clear();
    std::size_t next = 0;
    for (int t = 0; t < len && next < picks.size(); ++t) {
      if (t > 0) window.RecordAction(batch.actions.col(start + t - 1));
      window.Push(batch.observations.col(start + t));
      if (picks[next] == t) {
        xs.push_back(window.Flatten());
        ys.push_back(batch.episode_mu[e]);
        episode.push_back(e);
        ++next;
      }
    }
  }
  OsiDataset d{Mat(window.Width(), xs.size()), Mat(mu_dim, ys.size()), episode};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d.inputs.col(i) = xs[i];
    d.targets.col(i) = ys[i];
  }
  return d;
}

OsiDataset CollectOsiDataset(const ppo::ActorCritic& up, ppo::RolloutEnv& source,
                             const OsiDataOptions& options, Rng& rng) {
  Require(options.episodes >= 1, "osi: episodes must be >= 1");
  const int mu_dim = up.InputSize() - source.ObservationSize();
  Require(mu_dim > 0, "osi: policy is not conditioned on mu");
  ppo::ParamsContext context(source.ObservationSize(), mu_dim);
  // One episode per call keeps the episode count exact.
  ppo::CollectOptions collect{1, ppo::CollectMode::kCompleteEpisodes,
                              options.deterministic};
  OsiDataset out;
  std::vector<OsiDataset> chunks;
  for (int e = 0; e < options.episodes; ++e) {
    ppo::RolloutBatch b = ppo::CollectRollouts(up, context, source, collect, rng);
    chunks.push_back(BuildOsiDataset(b, options.history, options.with_actions,
                                     options.samples_per_episode, rng));
  }
  int total = 0;
  for (const OsiDataset& c : chunks) total += c.size();
  out.inputs.resize(chunks.front().inputs.rows(), total);
  out.targets.resize(chunks.front().targets.rows(), total);
  int at = 0;
  for (std::size_t e = 0; e < chunks.size(); ++e) {
    const OsiDataset& c = chunks[e];
    out.inputs.middleCols(at, c.size()) = c.inputs;
    out.targets.middleCols(at, c.size()) = c.targets;
    out.episode.insert(out.episode.end(), c.size(), static_cast<int>(e));
    at += c.size();
  }
  return out;
}

namespace {

OsiDataset Columns(const OsiDataset& d, const std::vector<int>& idx) {
  OsiDataset out{Mat(d.inputs.rows(), idx.size()), Mat(d.targets.rows(), idx.size()), {}};
  const bool tagged = static_cast<int>(d.episode.size()) == d.size();
  for (std::size_t j = 0; j < idx.size(); ++j) {
    out.inputs.col(j) = d.inputs.col(idx[j]);
    out.targets.col(j) = d.targets.col(idx[j]);
    if (tagged) out.episode.push_back(d.episode[idx[j]]);
  }
  return out;
}

// Held-out columns first. Whole episodes are held out when columns are
// tagged, single columns otherwise.
std::pair<std::vector<int>, int> HoldoutOrder(const OsiDataset& d, double fraction, Rng& rng) {
  std::vector<int> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  if (static_cast<int>(d.episode.size()) != d.size()) {
    std::shuffle(order.begin(), order.end(), rng);
    int n_hold = static_cast<int>(std::floor(fraction * d.size()));
    if (n_hold >= d.size()) n_hold = 0;
    return {order, n_hold};
  }
  std::vector<int> ids = d.episode;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::shuffle(ids.begin(), ids.end(), rng);
  int n_ep = static_cast<int>(std::floor(fraction * ids.size()));
  if (n_ep >= static_cast<int>(ids.size())) n_ep = 0;
  const std::set<int> held(ids.begin(), ids.begin() + n_ep);
  std::stable_partition(order.begin(), order.end(),
                        [&](int i) { return held.count(d.episode[i]) > 0; });
  const int n_hold = static_cast<int>(
      std::count_if(order.begin(), order.end(), [&](int i) { return held.count(d.episode[i]) > 0; }));
  std::shuffle(order.begin() + n_hold, order.end(), rng);
  return {order, n_hold};
}

Vec RmsePerDim(const Mat& pred, const Mat& target) {
  return ((pred - target).array().square().rowwise().mean()).sqrt();
}

double Rmse(const Mat& pred, const Mat& target) {
  return std::sqrt((pred - target).array().square().mean());
}

}  // namespace

OsiReport EvaluateOsi(const OsiModel& model, const OsiDataset& data) {
  Require(data.size() > 0, "osi: empty evaluation set");
  Mat pred = nn::ForwardBatch(model.net, model.input_norm.Apply(data.inputs)).Output();
  pred = pred.cwiseMax(0.0).cwiseMin(1.0);
  const Mat mid = Mat::Constant(data.targets.rows(), data.size(), 0.5);
  OsiReport r;
  r.holdout_rmse = Rmse(pred, data.targets);
  r.midpoint_rmse = Rmse(mid, data.targets);
  r.holdout_rmse_per_dim = RmsePerDim(pred, data.targets);
  r.midpoint_rmse_per_dim = RmsePerDim(mid, data.targets);
  return r;
}

OsiModel TrainOsi(const OsiDataset& data, int obs_dim, int action_dim, int history,
                  bool with_actions, const OsiTrainOptions& options, Rng& rng,
                  OsiReport* report) {
  if (data.size() == 0) throw ConfigError("osi: empty dataset");
  Require(options.holdout_fraction >= 0.0 && options.holdout_fraction < 1.0,
          "osi: holdout_fraction must lie in [0, 1)");
  OsiModel model;
  model.obs_dim = obs_dim;
  model.action_dim = action_dim;
  model.history = history;
  model.with_actions = with_actions;
  Require(data.inputs.rows() == model.InputWidth(),
          "osi: dataset width " + std::to_string(data.inputs.rows()) +
              " does not match history layout " + std::to_string(model.InputWidth()));

  const auto [order, n_hold] = HoldoutOrder(data, options.holdout_fraction, rng);
  const OsiDataset hold = Columns(data, {order.begin(), order.begin() + n_hold});
  const OsiDataset train = Columns(data, {order.begin() + n_hold, order.end()});

  model.input_norm = nn::RunningNormalizer::ForSize(model.InputWidth());
  model.input_norm.Update(train.inputs);
  const Mat x = model.input_norm.Apply(train.inputs);
  model.net = nn::MakeMlp(model.InputWidth(), static_cast<int>(data.targets.rows()),
                          rng, 1.0);
  Vec params = nn::Flatten(model.net);
  nn::AdamState adam = nn::AdamState::ForSize(params.size(), options.learning_rate);

  const int n = train.size();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int s = 0; s < n; s += options.minibatch) {
      const int e = std::min(n, s + options.minibatch);
      Mat xb(x.rows(), e - s), yb(train.targets.rows(), e - s);
      for (int j = s; j < e; ++j) {
        xb.col(j - s) = x.col(idx[j]);
        yb.col(j - s) = train.targets.col(idx[j]);
      }
      const nn::MlpTape tape = nn::ForwardBatch(model.net, xb);
      const Mat g = 2.0 * (tape.Output() - yb) / static_cast<double>(yb.size());
      const Vec grad = nn::Flatten(nn::Backward(model.net, tape, g));
      if (!grad.allFinite()) {
        throw RuntimeFailure("osi: non-finite gradient at epoch " + std::to_string(epoch));
      }
      nn::AdamStep(adam, params, grad);
      nn::Assign(model.net, params);
    }
  }

  if (report) {
    const Mat pred = nn::ForwardBatch(model.net, x).Output().cwiseMax(0.0).cwiseMin(1.0);
    if (hold.size() > 0) {
      *report = EvaluateOsi(model, hold);
    } else {
      *report = EvaluateOsi(model, train);
    }
    report->train_rmse = Rmse(pred, train.targets);
  }
  return model;
}

OsiContext::OsiContext(std::shared_ptr<const OsiModel> osi)
    : obs_dim_(osi->obs_dim),
      mu_dim_(osi->OutputWidth()),
      window_(osi->obs_dim, osi->action_dim, osi->history, osi->with_actions) {
  estimator_ = [osi](const Vec& h) { return osi->Predict(h); };
  estimate_ = Vec::Constant(mu_dim_, 0.5);
}

OsiContext::OsiContext(int obs_dim, int action_dim, int mu_dim, int history,
                       bool with_actions, MuEstimator estimator)
    : obs_dim_(obs_dim),
      mu_dim_(mu_dim),
      estimator_(std::move(estimator)),
      window_(obs_dim, action_dim, history, with_actions) {
  estimate_ = Vec::Constant(mu_dim_, 0.5);
}

Vec OsiContext::Build(const Vec& observation) {
  window_.Push(observation);
  estimate_ = estimator_(window_.Flatten());
  Require(estimate_.size() == mu_dim_, "osi: estimate width mismatch");
  estimate_ = estimate_.cwiseMax(0.0).cwiseMin(1.0);
  Vec x(Width());
  x << observation, estimate_;
  return x;
}

std::unique_ptr<ppo::ContextBuilder> OsiContext::Clone() const {
  return std::make_unique<OsiContext>(*this);
}

nlohmann::json OsiToJson(const OsiModel& model) {
  return {{"net", ppo::ToJson(model.net)},
          {"input_norm", ppo::ToJson(model.input_norm)},
          {"obs_dim", model.obs_dim},
          {"action_dim", model.action_dim},
          {"history", model.history},
          {"with_actions", model.with_actions}};
}

OsiModel OsiFromJson(const nlohmann::json& j) {
  try {
    OsiModel m;
    m.net = ppo::MlpFromJson(j.at("net"));
    m.input_norm = ppo::NormalizerFromJson(j.at("input_norm"));
    m.obs_dim = j.at("obs_dim").get<int>();
    m.action_dim = j.at("action_dim").get<int>();
    m.history = j.at("history").get<int>();
    m.with_actions = j.at("with_actions").get<bool>();
    Require(m.net.InputSize() == m.InputWidth(), "osi checkpoint: input width mismatch");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("osi checkpoint: ") + e.what());
  }
}

}  // namespace sotransfer::policies
