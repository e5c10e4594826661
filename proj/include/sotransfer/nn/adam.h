#ifndef SOTRANSFER_NN_ADAM_H_
#define SOTRANSFER_NN_ADAM_H_

#include <cstdint>

#include "sotransfer/common.h"

namespace sotransfer::nn {

// Adam over a flat parameter vector. Moments mirror the parameter length.
struct AdamState {
  Vec first_moment;
  Vec second_moment;
  std::int64_t step = 0;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState ForSize(int n, double learning_rate = 3e-4);
};

// One bias-corrected descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
// Throws RuntimeFailure on a non-finite gradient and leaves everything
// untouched.
void AdamStep(AdamState& state, Vec& params, const Vec& grads);

}  // namespace sotransfer::nn

#endif  // SOTRANSFER_NN_ADAM_H_
