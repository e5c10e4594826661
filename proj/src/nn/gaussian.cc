#include "sotransfer/nn/gaussian.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sotransfer::nn {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void CheckLengths(const Vec& mean, const Vec& log_std, const Vec& action) {
  Require(mean.size() == log_std.size() && mean.size() == action.size(),
          "gaussian: mean, log_std and action lengths differ");
}
}  // namespace

Vec GaussianHead::ClampedLogStd() const {
  return log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

double GaussianLogProb(const Vec& mean, const Vec& log_std, const Vec& action) {
  CheckLengths(mean, log_std, action);
  double lp = 0.0;
  for (int i = 0; i < mean.size(); ++i) {
    const double ls = std::clamp(log_std[i], kLogStdMin, kLogStdMax);
    const double u = (action[i] - mean[i]) * std::exp(-ls);
    lp += -0.5 * u * u - ls - kHalfLog2Pi;
  }
  return lp;
}

Vec GaussianSample(const Vec& mean, const Vec& log_std, Rng& rng) {
  Require(mean.size() == log_std.size(), "gaussian: mean/log_std mismatch");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec a(mean.size());
  for (int i = 0; i < mean.size(); ++i) {
    const double ls = std::clamp(log_std[i], kLogStdMin, kLogStdMax);
    a[i] = mean[i] + std::exp(ls) * normal(rng);
  }
  return a;
}

double GaussianEntropy(const Vec& log_std) {
  double h = 0.0;
  for (int i = 0; i < log_std.size(); ++i) {
    h += std::clamp(log_std[i], kLogStdMin, kLogStdMax) + 0.5 + kHalfLog2Pi;
  }
  return h;
}

LogProbGrad GaussianLogProbGrad(const Vec& mean, const Vec& log_std,
                                const Vec& action) {
  CheckLengths(mean, log_std, action);
  LogProbGrad g{Vec(mean.size()), Vec(mean.size())};
  for (int i = 0; i < mean.size(); ++i) {
    const double ls = log_std[i];
    const bool clamped = ls < kLogStdMin || ls > kLogStdMax;
    const double lsc = std::clamp(ls, kLogStdMin, kLogStdMax);
    const double inv_var = std::exp(-2.0 * lsc);
    const double diff = action[i] - mean[i];
    g.d_mean[i] = diff * inv_var;
    g.d_log_std[i] = clamped ? 0.0 : diff * diff * inv_var - 1.0;
  }
  return g;
}

}  // namespace sotransfer::nn
