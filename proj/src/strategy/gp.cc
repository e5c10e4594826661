#include "sotransfer/strategy/gp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace sotransfer::strategy {

namespace {

constexpr double kLogLengthMin = -4.6;  // 0.01
constexpr double kLogLengthMax = 2.3;   // 10
constexpr double kLogSignalMin = -4.6;
constexpr double kLogSignalMax = 2.3;
constexpr double kLogNoiseMin = -13.8;  // 1e-6
constexpr double kLogNoiseMax = 0.0;
constexpr double kMaxJitter = 1e-4;

int Dim(const GpHyper& h) { return static_cast<int>(h.log_length.size()); }

double& Coord(GpHyper& h, int i) {
  const int n = Dim(h);
  if (i < n) return h.log_length[i];
  if (i == n) return h.log_signal_var;
  return h.log_noise_var;
}

std::pair<double, double> Bounds(int i, int n) {
  if (i < n) return {kLogLengthMin, kLogLengthMax};
  if (i == n) return {kLogSignalMin, kLogSignalMax};
  return {kLogNoiseMin, kLogNoiseMax};
}

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double NormalPdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double SeKernel(const Vec& a, const Vec& b, const GpHyper& h) {
  const Vec scaled = (a - b).cwiseQuotient(h.log_length.array().exp().matrix());
  return std::exp(h.log_signal_var) * std::exp(-0.5 * scaled.squaredNorm());
}

double GpFactor(GpModel& model) {
  const int n = static_cast<int>(model.inputs.cols());
  Mat k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = SeKernel(model.inputs.col(i), model.inputs.col(j), model.hyper);
    }
  }
  k.diagonal().array() += std::exp(model.hyper.log_noise_var);
  const Vec y = (model.targets.array() - model.target_mean) / model.target_std;
  double jitter = 0.0;
  while (true) {
    model.chol.compute(k + jitter * Mat::Identity(n, n));
    if (model.chol.info() == Eigen::Success) break;
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > kMaxJitter) {
      throw RuntimeFailure("gp: kernel matrix not positive definite at jitter 1e-4");
    }
  }
  model.jitter = jitter;
  model.alpha = model.chol.solve(y);
  const Mat& l = model.chol.matrixLLT();
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += std::log(l(i, i));
  model.log_marginal = -0.5 * y.dot(model.alpha) - log_det -
                       0.5 * n * std::log(2.0 * std::numbers::pi);
  return model.log_marginal;
}

namespace {

GpModel Prepare(const Mat& inputs, const Vec& targets) {
  Require(inputs.cols() >= 2, "gp: need at least 2 points");
  Require(targets.size() == inputs.cols(), "gp: inputs and targets differ in count");
  Require(inputs.allFinite() && targets.allFinite(), "gp: non-finite data");
  GpModel m;
  m.inputs = inputs;
  m.targets = targets;
  m.target_mean = targets.mean();
  const double var = (targets.array() - m.target_mean).square().mean();
  m.target_std = var > 1e-24 ? std::sqrt(var) : 1.0;
  return m;
}

}  // namespace

GpModel GpFitFixed(const Mat& inputs, const Vec& targets, const GpHyper& hyper) {
  GpModel m = Prepare(inputs, targets);
  Require(hyper.log_length.size() == inputs.rows(), "gp: length-scale count mismatch");
  m.hyper = hyper;
  GpFactor(m);
  return m;
}

GpModel GpFit(const Mat& inputs, const Vec& targets, const GpFitOptions& options,
              Rng& rng) {
  GpModel m = Prepare(inputs, targets);
  const int d = static_cast<int>(inputs.rows());
  const bool fit_noise = !options.noise_var.has_value();
  const int n_coords = d + 1 + (fit_noise ? 1 : 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GpModel best;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (int start = 0; start < std::max(1, options.restarts); ++start) {
    GpHyper h;
    h.log_length = Vec::Constant(d, std::log(0.3));
    h.log_signal_var = 0.0;
    h.log_noise_var = fit_noise ? std::log(1e-2) : std::log(*options.noise_var);
    if (start > 0) {
      for (int i = 0; i < n_coords; ++i) {
        auto [lo, hi] = Bounds(i, d);
        Coord(h, i) = lo + (hi - lo) * unit(rng);
      }
    }
    GpModel cur = m;
    cur.hyper = h;
    double lml;
    try {
      lml = GpFactor(cur);
    } catch (const RuntimeFailure&) {
      continue;
    }
    double step = 1.0;
    for (int sweep = 0; sweep < options.sweeps && step > 1e-3; ++sweep) {
      bool improved = false;
      for (int i = 0; i < n_coords; ++i) {
        auto [lo, hi] = Bounds(i, d);
        for (double dir : {1.0, -1.0}) {
          GpModel trial = cur;
          double& c = Coord(trial.hyper, i);
          c = std::clamp(c + dir * step, lo, hi);
          try {
            const double v = GpFactor(trial);
            if (v > lml + 1e-9) {
              cur = std::move(trial);
              lml = v;
              improved = true;
              break;
            }
          } catch (const RuntimeFailure&) {
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (lml > best_lml) {
      best_lml = lml;
      best = std::move(cur);
    }
  }
  if (!std::isfinite(best_lml)) {
    throw RuntimeFailure("gp: no hyperparameter setting gave a usable factorization");
  }
  return best;
}

GpPrediction GpPredict(const GpModel& model, const Vec& x) {
  Require(x.size() == model.inputs.rows(), "gp: query width mismatch");
  const int n = static_cast<int>(model.inputs.cols());
  Vec k(n);
  for (int i = 0; i < n; ++i) k[i] = SeKernel(x, model.inputs.col(i), model.hyper);
  const Vec v = model.chol.matrixL().solve(k);
  const double prior = std::exp(model.hyper.log_signal_var);
  GpPrediction p;
  p.mean = model.target_mean + model.target_std * k.dot(model.alpha);
  p.variance = std::max(0.0, prior - v.squaredNorm()) * model.target_std * model.target_std;
  return p;
}

double ExpectedImprovement(const GpPrediction& p, double best) {
  const double sd = std::sqrt(std::max(0.0, p.variance));
  const double gain = p.mean - best;
  if (sd < 1e-12) return std::max(0.0, gain);
  const double z = gain / sd;
  return std::max(0.0, gain * NormalCdf(z) + sd * NormalPdf(z));
}

SearchResult SoBayes(Objective& objective, const BayesOptions& options, Rng& rng) {
  const int d = objective.Dim();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_point = [&]() {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = unit(rng);
    return x;
  };
  SearchResult result;
  result.best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<Vec> xs;
  std::vector<double> ys;
  auto evaluate = [&](const Vec& x, int iteration) {
    FitnessRecord rec = objective.Evaluate(x, rng);
    rec.generation = iteration;
    if (!rec.truncated) {
      xs.push_back(rec.mu);
      ys.push_back(rec.mean);
      if (rec.mean > result.best_fitness) {
        result.best_fitness = rec.mean;
        result.best_mu = rec.mu;
      }
    }
    const bool truncated = rec.truncated;
    result.records.push_back(std::move(rec));
    return !truncated;
  };

  int iteration = 0;
  for (; iteration < options.initial_points && !objective.Exhausted(); ++iteration) {
    if (!evaluate(uniform_point(), iteration)) break;
  }
  while (!objective.Exhausted()) {
    Vec next;
    if (xs.size() >= 2) {
      Mat x(d, xs.size());
      Vec y(ys.size());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        x.col(i) = xs[i];
        y[i] = ys[i];
      }
      try {
        const GpModel gp = GpFit(x, y, options.gp, rng);
        const double best = y.maxCoeff();
        auto ei = [&](const Vec& p) { return ExpectedImprovement(GpPredict(gp, p), best); };
        std::vector<std::pair<double, Vec>> probes;
        probes.reserve(options.probes);
        for (int i = 0; i < options.probes; ++i) {
          Vec p = uniform_point();
          probes.emplace_back(ei(p), p);
        }
        std::partial_sort(probes.begin(),
                          probes.begin() + std::min<int>(options.local_starts, probes.size()),
                          probes.end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });
        double top = -1.0;
        for (int s = 0; s < std::min<int>(options.local_starts, probes.size()); ++s) {
          Vec p = probes[s].second;
          double v = probes[s].first;
          double step = 0.05;
          for (int it = 0; it < options.local_iterations && step > 1e-4; ++it) {
            bool moved = false;
            for (int i = 0; i < d && !moved; ++i) {
              for (double dir : {1.0, -1.0}) {
                Vec q = p;
                q[i] = std::clamp(q[i] + dir * step, 0.0, 1.0);
                const double w = ei(q);
                if (w > v) {
                  p = q;
                  v = w;
                  moved = true;
                  break;
                }
              }
            }
            if (!moved) step *= 0.5;
          }
          if (v > top) {
            top = v;
            next = p;
          }
        }
      } catch (const RuntimeFailure& e) {
        result.log.push_back("iteration " + std::to_string(iteration) +
                             ": gp failed (" + e.what() + "), uniform candidate used");
        next = Vec();
      }
    }
    if (next.size() == 0) next = uniform_point();
    if (!evaluate(next, iteration)) break;
    ++iteration;
  }
  if (result.best_mu.size() == 0) {
    result.best_mu = Vec::Constant(d, 0.5);
    result.log.push_back("no complete evaluation; returning the box center");
  }
  return result;
}

}  // namespace sotransfer::strategy
