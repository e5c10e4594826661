#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "checks.h"
#include "sotransfer/envs/env.h"
#include "sotransfer/envs/params.h"
#include "sotransfer/envs/primitives.h"

namespace sotransfer::envs {
namespace {

using checks::RandomActions;
using checks::Rollout;

TEST(Reset, ZeroNoiseGivesNominalPose) {
  EnvConfig c = EnvConfig::Hopper(5);
  c.init_noise = 0.0;
  Env env(c);
  Rng rng(1);
  env.Reset(NominalDynamics(c), rng);
  Vec q(4);
  q << 0.0, 1.0, 0.0, 0.98;
  EXPECT_EQ(env.state().q, q);
  EXPECT_EQ(env.state().v, Vec::Zero(4));
}

TEST(Reset, SameSeedSameState) {
  EnvConfig c = EnvConfig::Hopper(5);
  Env a(c), b(c);
  Rng ra(7), rb(7);
  EXPECT_EQ(a.Reset(NominalDynamics(c), ra), b.Reset(NominalDynamics(c), rb));
}

TEST(Reset, OutOfRangeDynamicsRejected) {
  EnvConfig c = EnvConfig::Hopper(2);
  Env env(c);
  Rng rng(1);
  Vec bad(2);
  bad << 5.0, 0.1;
  EXPECT_THROW(env.Reset(MakeDynamics(c, bad), rng), ConfigError);
}

TEST(Reset, LatencyQueueStartsWithZeroActions) {
  EnvConfig c = EnvConfig::Hopper(5);
  c.gap.latency = 0.05;
  Env env(c);
  Rng rng(1);
  env.Reset(NominalDynamics(c), rng);
  EXPECT_EQ(env.state().latency.length(), 6);
  for (const Vec& a : env.state().latency.pending()) EXPECT_EQ(a, Vec::Zero(2));
}

TEST(Step, UprightPendulumStaysPut) {
  EnvConfig c = EnvConfig::Pendulum();
  c.range_overrides["damping"] = {0.0, 0.0};
  Env env(c);
  Rng rng(1);
  env.Reset(NominalDynamics(c), rng);
  env.mutable_state().q[0] = std::numbers::pi;
  env.mutable_state().v[0] = 0.0;
  env.Step(Vec::Zero(1));
  EXPECT_NEAR(env.state().q[0], std::numbers::pi, 1e-12);
}

TEST(Step, BallisticVerticalVelocity) {
  EnvConfig c = EnvConfig::Hopper(5);
  Env env(c);
  Rng rng(1);
  env.Reset(NominalDynamics(c), rng);
  env.mutable_state().q << 0.0, 3.0, 0.0, 1.0;
  env.mutable_state().v << 0.0, 1.0, 0.0, 0.0;
  env.Step(Vec::Zero(2));
  EXPECT_NEAR(env.state().v[1], 1.0 - kGravity * c.ControlPeriod(), 1e-9);
}

TEST(Step, AfterEpisodeEndIsProtocolError) {
  EnvConfig c = EnvConfig::Hopper(5);
  c.horizon = 3;
  Env env(c);
  Rng rng(1);
  env.Reset(NominalDynamics(c), rng);
  StepResult r;
  for (int i = 0; i < 3; ++i) r = env.Step(Vec::Zero(2));
  ASSERT_TRUE(r.truncated);
  EXPECT_THROW(env.Step(Vec::Zero(2)), ProtocolError);
}

TEST(Step, BeforeResetIsProtocolError) {
  Env env(EnvConfig::Pendulum());
  EXPECT_THROW(env.Step(Vec::Zero(1)), ProtocolError);
}

TEST(Step, HardHipLimitProjects) {
  EnvConfig c = EnvConfig::Hopper(5);
  Env env(c);
  Rng rng(1);
  env.Reset(NominalDynamics(c), rng);
  env.mutable_state().q << 0.0, 3.0, 0.79, 1.0;
  env.mutable_state().v << 0.0, 0.0, 10.0, 0.0;
  env.Step(Vec::Zero(2));
  EXPECT_EQ(env.state().q[2], c.gap.hip_limit);
}

TEST(Step, TimeAdvancesAndQueueLengthHolds) {
  EnvConfig c = EnvConfig::Hopper(5);
  c.gap.latency = 0.008;
  Env env(c);
  Rng rng(3);
  env.Reset(NominalDynamics(c), rng);
  double t = env.state().time;
  for (const Vec& a : RandomActions(50, 2, 4)) {
    if (env.Step(a).Done()) break;
    EXPECT_GT(env.state().time, t);
    EXPECT_EQ(env.state().latency.length(), 1);
    EXPECT_TRUE(env.state().q.allFinite());
    t = env.state().time;
  }
}

TEST(Gaps, IdentityGapIsBitIdentical) {
  for (std::uint64_t seed : {5, 9, 13}) EXPECT_TRUE(checks::IdentityGapIsBitIdentical(seed));
}

TEST(Gaps, SubStepLatencyIsBitIdentical) {
  for (std::uint64_t seed : {5, 9, 13}) EXPECT_TRUE(checks::ZeroLatencyIsBitIdentical(seed));
}

TEST(Gaps, OneStepLatencyShiftsActions) {
  const EnvConfig plain = EnvConfig::Hopper(5);
  EnvConfig delayed = plain;
  delayed.gap.latency = 0.008;
  const std::vector<Vec> actions = RandomActions(200, 2, 7);
  std::vector<Vec> shifted = {Vec::Zero(2)};
  shifted.insert(shifted.end(), actions.begin(), actions.end() - 1);
  const auto a = Rollout(delayed, actions, 8), b = Rollout(plain, shifted, 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].q, b[i].q);
}

TEST(Gaps, EachFeatureChangesTheTrajectory) {
  const EnvConfig source = EnvConfig::Hopper(5);
  const std::vector<Vec> actions = RandomActions(150, 2, 9);
  const auto base = Rollout(source, actions, 10);
  std::vector<std::function<void(GapConfig&)>> features = {
      [](GapConfig& g) { g.contact = ContactBackend::kSoft; },
      [](GapConfig& g) { g.latency = 0.008; },
      [](GapConfig& g) { g.actuator = ActuatorModel::kPiecewise; },
      [](GapConfig& g) { g.armature = 0.05; },
      [](GapConfig& g) { g.slope = -0.18; },
      [](GapConfig& g) { g.mass_scales = {1.5, 1.0}; },
      [](GapConfig& g) { g.soft_foot = true; },
  };
  for (std::size_t f = 0; f < features.size(); ++f) {
    EnvConfig target = source;
    features[f](target.gap);
    const auto other = Rollout(target, actions, 10);
    bool differs = other.size() != base.size();
    for (std::size_t i = 0; !differs && i < base.size(); ++i) differs = base[i].q != other[i].q;
    EXPECT_TRUE(differs) << "feature " << f;
  }
}

TEST(Gaps, NormalForceNeverNegative) {
  for (ContactBackend backend : {ContactBackend::kHard, ContactBackend::kSoft}) {
    EnvConfig c = EnvConfig::Hopper(5);
    c.gap.contact = backend;
    c.early_termination = false;
    for (const EnvState& s : Rollout(c, RandomActions(400, 2, 11), 12)) {
      EXPECT_GE(s.normal_force, 0.0);
    }
  }
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Vec r = StandardNormal(5, rng);
    const ContactImpulse j =
        ContactForceHard(std::abs(r[0]), r[1], r[2], 0.5, 0.2, Eigen::Matrix2d::Identity());
    EXPECT_GE(j.normal, 0.0);
    EXPECT_GE(ContactForceSoft(r[3], r[4], r[2], 5000.0, 150.0, 0.5).normal, 0.0);
  }
}

TEST(Gaps, StrengthNeverLowersPeakActuation) {
  EnvConfig c = EnvConfig::Hopper(5);
  c.early_termination = false;
  const std::vector<Vec> actions = RandomActions(100, 2, 14);
  double previous = 0.0;
  for (double strength : {0.5, 0.75, 1.0, 1.25, 1.5}) {
    Vec values = NominalDynamics(c).values;
    values[4] = strength;
    Env env(c);
    Rng rng(15);
    env.Reset(MakeDynamics(c, values), rng);
    double peak = 0.0;
    for (const Vec& a : actions) peak = std::max(peak, env.Step(a).info.peak_actuation);
    EXPECT_GE(peak, previous);
    previous = peak;
  }
}

TEST(Params, CollapsedRangeAlwaysSamplesThePoint) {
  EnvConfig c = EnvConfig::Hopper(2);
  c.range_overrides["restitution"] = {0.1, 0.1};
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(SampleDynamics(c, rng).values[1], 0.1);
}

TEST(Params, SeededSamplingRepeats) {
  const EnvConfig c = EnvConfig::Hopper(5);
  Rng a(3), b(3);
  EXPECT_EQ(SampleDynamics(c, a).values, SampleDynamics(c, b).values);
}

TEST(Params, NormalizeMidpointAndBounds) {
  const EnvConfig c = EnvConfig::Hopper(5);
  Vec mid(5);
  for (int i = 0; i < 5; ++i) {
    const ParamRange r = c.ActiveRanges()[i];
    mid[i] = 0.5 * (r.lo + r.hi);
  }
  EXPECT_LT((NormalizeParams(MakeDynamics(c, mid)).array() - 0.5).abs().maxCoeff(), 1e-12);
  Vec low = mid;
  low[2] = 0.2;
  EXPECT_EQ(NormalizeParams(MakeDynamics(c, low))[2], 0.0);
}

TEST(Params, RoundTrip) {
  const EnvConfig c = EnvConfig::Hopper(6);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const DynParams mu = SampleDynamics(c, rng);
    const DynParams back = DenormalizeParams(NormalizeParams(mu), mu.names, mu.ranges);
    EXPECT_LT((back.values - mu.values).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Params, DenormalizeClipsIntoBox) {
  const EnvConfig c = EnvConfig::Hopper(2);
  const DynParams mu = DenormalizeParams(Vec::Constant(2, 1.7), c.active, c.ActiveRanges());
  EXPECT_EQ(mu.values[0], c.ActiveRanges()[0].hi);
}

TEST(Params, PresetsMatchDimension) {
  EXPECT_EQ(HopperPreset(2), (std::vector<std::string>{"foot_mass", "restitution"}));
  EXPECT_EQ(HopperPreset(5).size(), 5u);
  EXPECT_EQ(HopperPreset(6).back(), "joint_damping");
  EXPECT_THROW(HopperPreset(10), ConfigError);
}

TEST(Primitives, InelasticDropStops) {
  const ContactImpulse r = ContactForceHard(0.01, -2.0, 0.0, 0.8, 0.0, Eigen::Matrix2d::Identity());
  EXPECT_NEAR(r.post_normal_velocity, 0.0, 1e-12);
  EXPECT_EQ(r.position_correction, 0.01);
}

TEST(Primitives, RestitutionRebound) {
  const ContactImpulse r = ContactForceHard(0.0, -1.0, 0.0, 0.8, 0.3, Eigen::Matrix2d::Identity());
  EXPECT_NEAR(r.post_normal_velocity, 0.3, 1e-12);
}

TEST(Primitives, SoftContactBoundaryAndSeparation) {
  EXPECT_EQ(ContactForceSoft(0.0, 0.0, 0.3, 1e4, 10.0, 0.8).normal, 0.0);
  EXPECT_EQ(ContactForceSoft(0.001, -100.0, 0.0, 1e4, 10.0, 0.8).normal, 0.0);
}

TEST(Primitives, JointLimitInsideIsZero) {
  EXPECT_EQ(JointLimitTorque(0.3, -0.8, 0.8, JointLimitMode::kSoft), 0.0);
  EXPECT_EQ(JointLimitTorque(0.3, -0.8, 0.8, JointLimitMode::kHard), 0.0);
}

TEST(Primitives, ActuatorModels) {
  EXPECT_EQ(ActuatorApply(0.0, ActuatorModel::kLinear, 10.0), 0.0);
  EXPECT_EQ(ActuatorApply(0.0, ActuatorModel::kPiecewise, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(ActuatorApply(0.8, ActuatorModel::kLinear, 10.0), 8.0);
}

TEST(Primitives, LatencyQueue) {
  EXPECT_EQ(LatencySteps(0.0, 0.008), 0);
  EXPECT_EQ(LatencySteps(0.008, 0.008), 1);
  LatencyQueue pass(0, 1);
  EXPECT_EQ(pass.Push(Vec::Ones(1)), Vec::Ones(1));
  LatencyQueue one(1, 1);
  EXPECT_EQ(one.Push(Vec::Ones(1)), Vec::Zero(1));
  EXPECT_EQ(one.Push(Vec::Constant(1, 2.0)), Vec::Ones(1));
}

TEST(Primitives, GravityVector) {
  EXPECT_EQ(GravityVector(0.0), Eigen::Vector2d(0.0, -9.81));
  EXPECT_NEAR(GravityVector(0.25).norm(), 9.81, 1e-12);
  EXPECT_THROW(GravityVector(0.4), ConfigError);
}

TEST(Primitives, LocomotionReward) {
  EXPECT_NEAR(RewardLocomotion(1.0, Vec::Constant(2, 0.1)), 1.99998, 1e-12);
  EXPECT_EQ(RewardLocomotion(0.0, Vec::Zero(2)), 1.0);
}

TEST(Gap, ValidateRejectsBadValues) {
  GapConfig g;
  g.latency = -0.1;
  EXPECT_THROW(g.Validate(), ConfigError);
  g = GapConfig{};
  g.slope = 0.5;
  EXPECT_THROW(g.Validate(), ConfigError);
  g = GapConfig{};
  g.soft_foot = true;
  g.soft_foot_stiffness = 0.0;
  EXPECT_THROW(g.Validate(), ConfigError);
}

}  // namespace
}  // namespace sotransfer::envs
