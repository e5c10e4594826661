#include "sotransfer/nn/adam.h"

#include <cmath>
#include <string>

namespace sotransfer::nn {

AdamState AdamState::ForSize(int n, double learning_rate) {
  AdamState s;
  s.first_moment = Vec::Zero(n);
  s.second_moment = Vec::Zero(n);
  s.learning_rate = learning_rate;
  return s;
}

void AdamStep(AdamState& state, Vec& params, const Vec& grads) {
  Require(params.size() == grads.size() &&
              state.first_moment.size() == params.size() &&
              state.second_moment.size() == params.size(),
          "adam: shape mismatch (" + std::to_string(params.size()) + " params, " +
              std::to_string(grads.size()) + " grads)");
  if (!grads.allFinite()) {
    throw RuntimeFailure("adam: non-finite gradient at step " +
                         std::to_string(state.step + 1));
  }
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment = state.beta2 * state.second_moment +
                        (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  params.array() -= state.learning_rate * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

}  // namespace sotransfer::nn
