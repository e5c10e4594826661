#ifndef SOTRANSFER_NN_GAUSSIAN_H_
#define SOTRANSFER_NN_GAUSSIAN_H_

#include "sotransfer/common.h"

namespace sotransfer::nn {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// State-independent diagonal Gaussian action head.
struct GaussianHead {
  Vec log_std;

  // Clamped into [kLogStdMin, kLogStdMax].
  Vec ClampedLogStd() const;
};

double GaussianLogProb(const Vec& mean, const Vec& log_std, const Vec& action);

// mean + exp(log_std) * z with z drawn from `rng`. log_std is clamped first.
Vec GaussianSample(const Vec& mean, const Vec& log_std, Rng& rng);

double GaussianEntropy(const Vec& log_std);

// Gradients of log N(action; mean, exp(log_std)) for one sample.
struct LogProbGrad {
  Vec d_mean;
  Vec d_log_std;
};
LogProbGrad GaussianLogProbGrad(const Vec& mean, const Vec& log_std,
                                const Vec& action);

}  // namespace sotransfer::nn

#endif  // SOTRANSFER_NN_GAUSSIAN_H_
