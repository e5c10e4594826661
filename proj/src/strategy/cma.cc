#include "sotransfer/strategy/cma.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sotransfer::strategy {

namespace {
constexpr double kEigenFloor = 1e-14;
}  // namespace

int CmaPopulationSize(int n) {
  Require(n >= 1, "cma: dimension must be >= 1");
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
}

Mat CmaState::SqrtCov() const {
  return basis * scales.asDiagonal() * basis.transpose();
}

Mat CmaState::InvSqrtCov() const {
  return basis * scales.cwiseInverse().asDiagonal() * basis.transpose();
}

void CmaState::Validate() const {
  Require(mean.size() == n && cov.rows() == n && cov.cols() == n,
          "cma: state shapes inconsistent");
  Require(sigma > 0.0 && std::isfinite(sigma), "cma: sigma must be positive");
  Require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          "cma: covariance not symmetric");
  Require((scales.array() > 0.0).all(), "cma: covariance not positive definite");
}

CmaState CmaInit(const Vec& mean0, double sigma0, int lambda) {
  const int n = static_cast<int>(mean0.size());
  Require(n >= 1, "cma: empty mean");
  Require(sigma0 > 0.0, "cma: sigma0 must be > 0");
  CmaState s;
  s.n = n;
  s.lambda = lambda > 0 ? lambda : CmaPopulationSize(n);
  Require(s.lambda >= 2, "cma: population must be >= 2");
  s.mu = s.lambda / 2;
  s.weights.resize(s.mu);
  for (int i = 0; i < s.mu; ++i) {
    s.weights[i] = std::log((s.lambda + 1) / 2.0) - std::log(i + 1.0);
  }
  s.weights /= s.weights.sum();
  s.mu_eff = 1.0 / s.weights.squaredNorm();

  const double nd = n;
  s.c_sigma = (s.mu_eff + 2.0) / (nd + s.mu_eff + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (nd + 1.0)) - 1.0) +
              s.c_sigma;
  s.c_c = (4.0 + s.mu_eff / nd) / (nd + 4.0 + 2.0 * s.mu_eff / nd);
  s.c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c_1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                                     ((nd + 2.0) * (nd + 2.0) + s.mu_eff));
  s.chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));

  s.mean = mean0;
  s.sigma = sigma0;
  s.cov = Mat::Identity(n, n);
  s.p_sigma = Vec::Zero(n);
  s.p_c = Vec::Zero(n);
  s.basis = Mat::Identity(n, n);
  s.scales = Vec::Ones(n);
  return s;
}

void CmaDecompose(CmaState& state) {
  state.cov = 0.5 * (state.cov + state.cov.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(state.cov);
  if (eig.info() != Eigen::Success) {
    ++state.eigen_repairs;
    state.cov += kEigenFloor * Mat::Identity(state.n, state.n);
    eig.compute(state.cov);
    if (eig.info() != Eigen::Success) {
      throw RuntimeFailure("cma: covariance eigendecomposition failed");
    }
  }
  Vec values = eig.eigenvalues();
  if ((values.array() < kEigenFloor).any()) {
    ++state.eigen_repairs;
    values = values.cwiseMax(kEigenFloor);
    state.cov = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    state.cov = 0.5 * (state.cov + state.cov.transpose());
  }
  state.basis = eig.eigenvectors();
  state.scales = values.cwiseSqrt();
}

Mat CmaAsk(CmaState& state, Rng& rng) {
  const Mat root = state.SqrtCov();
  Mat x(state.n, state.lambda);
  for (int k = 0; k < state.lambda; ++k) {
    x.col(k) = state.mean + state.sigma * (root * StandardNormal(state.n, rng));
  }
  return x;
}

void CmaTell(CmaState& state, const Mat& candidates, const Vec& fitness,
             bool index_tiebreak) {
  Require(candidates.rows() == state.n && candidates.cols() == state.lambda &&
              fitness.size() == state.lambda,
          "cma: tell expects " + std::to_string(state.lambda) + " candidates");
  Require(fitness.allFinite(), "cma: non-finite fitness");
  std::vector<int> order(state.lambda);
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](int a, int b) { return fitness[a] > fitness[b]; };
  if (index_tiebreak) {
    std::stable_sort(order.begin(), order.end(), better);
  } else {
    std::sort(order.begin(), order.end(), better);
  }

  const Vec old_mean = state.mean;
  Mat y(state.n, state.mu);
  for (int i = 0; i < state.mu; ++i) {
    y.col(i) = (candidates.col(order[i]) - old_mean) / state.sigma;
  }
  const Vec y_w = y * state.weights;
  state.mean = old_mean + state.sigma * y_w;

  const double cs = state.c_sigma;
  state.p_sigma = (1.0 - cs) * state.p_sigma +
                  std::sqrt(cs * (2.0 - cs) * state.mu_eff) * (state.InvSqrtCov() * y_w);
  const double ps_norm = state.p_sigma.norm();
  const double denom =
      std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * (state.generation + 1)));
  const bool h_sigma =
      ps_norm / denom < (1.4 + 2.0 / (state.n + 1.0)) * state.chi_n;

  const double cc = state.c_c;
  state.p_c = (1.0 - cc) * state.p_c +
              (h_sigma ? std::sqrt(cc * (2.0 - cc) * state.mu_eff) : 0.0) * y_w;
  const double delta = (h_sigma ? 0.0 : 1.0) * cc * (2.0 - cc);

  Mat rank_mu = Mat::Zero(state.n, state.n);
  for (int i = 0; i < state.mu; ++i) {
    rank_mu += state.weights[i] * y.col(i) * y.col(i).transpose();
  }
  state.cov = (1.0 + state.c_1 * delta - state.c_1 - state.c_mu) * state.cov +
              state.c_1 * state.p_c * state.p_c.transpose() + state.c_mu * rank_mu;
  state.sigma *= std::exp((cs / state.d_sigma) * (ps_norm / state.chi_n - 1.0));
  ++state.generation;
  CmaDecompose(state);
}

Vec ClipToUnitBox(const Vec& x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

}  // namespace sotransfer::strategy
