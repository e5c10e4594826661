#ifndef SOTRANSFER_STRATEGY_GP_H_
#define SOTRANSFER_STRATEGY_GP_H_

#include <optional>

#include "sotransfer/common.h"
#include "sotransfer/strategy/search.h"

namespace sotransfer::strategy {

// Squared-exponential kernel with one length scale per input dimension.
struct GpHyper {
  Vec log_length;
  double log_signal_var = 0.0;
  double log_noise_var = std::log(1e-4);
};

struct GpModel {
  Mat inputs;  // columns are points
  Vec targets;
  double target_mean = 0.0;
  double target_std = 1.0;
  GpHyper hyper;
  double jitter = 0.0;
  Eigen::LLT<Mat> chol;
  Vec alpha;  // K^-1 y (standardized)
  double log_marginal = 0.0;
};

struct GpPrediction {
  double mean = 0.0;      // original target units
  double variance = 0.0;  // latent function variance, original units
};

struct GpFitOptions {
  // Fixed noise variance in standardized units; fitted when unset.
  std::optional<double> noise_var;
  int restarts = 4;
  int sweeps = 30;
};

double SeKernel(const Vec& a, const Vec& b, const GpHyper& h);

// Log marginal likelihood of standardized targets; sets the factorization.
// Throws RuntimeFailure if the kernel stays indefinite at jitter 1e-4.
double GpFactor(GpModel& model);

// Standardizes targets and maximizes the marginal likelihood by multi-start
// coordinate search over log hyperparameters.
GpModel GpFit(const Mat& inputs, const Vec& targets, const GpFitOptions& options,
              Rng& rng);
GpModel GpFitFixed(const Mat& inputs, const Vec& targets, const GpHyper& hyper);

GpPrediction GpPredict(const GpModel& model, const Vec& x);

// Expected improvement over `best` for maximization; zero when variance is.
double ExpectedImprovement(const GpPrediction& p, double best);

struct BayesOptions {
  int initial_points = 5;
  int probes = 2000;
  int local_starts = 5;
  int local_iterations = 40;
  GpFitOptions gp;
};

// Uniform initial design, then one EI-maximizing point per iteration.
SearchResult SoBayes(Objective& objective, const BayesOptions& options, Rng& rng);

}  // namespace sotransfer::strategy

#endif  // SOTRANSFER_STRATEGY_GP_H_
