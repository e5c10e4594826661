#ifndef SOTRANSFER_ENVS_ENV_H_
#define SOTRANSFER_ENVS_ENV_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sotransfer/common.h"
#include "sotransfer/envs/gap.h"
#include "sotransfer/envs/params.h"
#include "sotransfer/envs/primitives.h"

namespace sotransfer::envs {

enum class RewardMode {
  kDense,   // per-step task reward
  kSparse,  // zero per step; distance traveled paid at episode end
};

struct EnvConfig {
  EnvKind kind = EnvKind::kHopper;
  double dt_sim = 0.002;
  int substeps = 4;
  GapConfig gap;
  // Randomized dynamics dimensions, in this order.
  std::vector<std::string> active;
  // Overrides of catalog randomization ranges, keyed by parameter name.
  std::map<std::string, ParamRange> range_overrides;
  int horizon = 1000;
  double gamma = 0.99;
  double init_noise = 0.005;  // half-width of the uniform p0 perturbation
  RewardMode reward = RewardMode::kDense;
  bool early_termination = true;

  double ControlPeriod() const { return dt_sim * substeps; }
  std::vector<ParamRange> ActiveRanges() const;
  ParamRange RangeOf(const std::string& name) const;
  void Validate() const;

  static EnvConfig Pendulum();
  // Hopper with the dim(mu) presets 2, 5 or 6; 0 gives no randomization.
  static EnvConfig Hopper(int dim_mu = 5);
};

std::vector<std::string> HopperPreset(int dim_mu);

// Draw of the config's active dimensions.
DynParams SampleDynamics(const EnvConfig& config, Rng& rng);
// Nominal values of the active dimensions, clipped into their ranges.
DynParams NominalDynamics(const EnvConfig& config);
DynParams MakeDynamics(const EnvConfig& config, const Vec& values);

using Observation = Vec;

// Dense per-step reward recomputed from the observation after the step, for
// rollouts through a learned model. Hopper uses the observed forward velocity
// in place of the displacement over the step.
double ObservationReward(const EnvConfig& config, const Observation& next,
                         const Vec& action);
// Failure condition evaluated on an observation.
bool ObservationTerminal(const EnvConfig& config, const Observation& next);
// Forward velocity carried by an observation (zero for the pendulum).
double ObservationVelocity(const EnvConfig& config, const Observation& next);

// Generalized coordinates:
//   pendulum: q = (theta), v = (omega)
//   hopper:   q = (x, z, leg angle, leg length), v = time derivatives
struct EnvState {
  Vec q;
  Vec v;
  double time = 0.0;
  int steps = 0;
  LatencyQueue latency;
  bool in_contact = false;
  double penetration = 0.0;     // m
  double normal_force = 0.0;    // N, mean over the last control step
  double start_x = 0.0;
  bool terminated = false;
};

struct StepInfo {
  double forward_velocity = 0.0;
  bool in_contact = false;
  double peak_actuation = 0.0;  // max |torque or thrust| applied this step
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;  // true failure, no bootstrap
  bool truncated = false;   // horizon reached
  StepInfo info;
  bool Done() const { return terminated || truncated; }
};

class Env {
 public:
  explicit Env(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  int ObservationSize() const;
  int ActionSize() const;

  // Draws s0 from p0 for dynamics mu. mu must cover exactly the active
  // dimensions and lie within their ranges.
  Observation Reset(const DynParams& mu, Rng& rng);
  // Throws ProtocolError if the episode has ended or Reset was not called.
  StepResult Step(const Vec& action);

  Observation Observe() const;
  const EnvState& state() const { return state_; }
  EnvState& mutable_state() { return state_; }
  const DynParams& params() const { return mu_; }

  // Kinetic + gravitational + leg-spring energy of the current state.
  double MechanicalEnergy() const;
  // Unforced acceleration (zero command, no contact) at the current state.
  Vec FreeAcceleration() const;

  struct Physics;

 private:
  EnvConfig config_;
  DynParams mu_;
  EnvState state_;
  bool ready_ = false;
  std::shared_ptr<const Physics> phys_;
};

}  // namespace sotransfer::envs

#endif  // SOTRANSFER_ENVS_ENV_H_
