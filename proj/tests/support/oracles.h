// Independent reference implementations used as test oracles. Nothing here
// calls into the library's numerical code paths.
#ifndef SOTRANSFER_TESTS_SUPPORT_ORACLES_H_
#define SOTRANSFER_TESTS_SUPPORT_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;  // row-major

// Dense tanh network, weights[l][row][col], linear last layer.
inline Vector MlpForward(const std::vector<Matrix>& weights, const std::vector<Vector>& biases,
                         Vector x) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Vector y(weights[l].size(), 0.0);
    for (std::size_t r = 0; r < y.size(); ++r) {
      double acc = biases[l][r];
      for (std::size_t c = 0; c < x.size(); ++c) acc += weights[l][r][c] * x[c];
      y[r] = l + 1 < weights.size() ? std::tanh(acc) : acc;
    }
    x = y;
  }
  return x;
}

// Central differences of a scalar function at x.
inline Vector FiniteDifference(const std::function<double(const Vector&)>& f, Vector x,
                               double h = 1e-5) {
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// GAE of one segment as the lambda-weighted mixture of n-step advantages:
// A_t = (1 - lam) sum_{n>=1} lam^{n-1} A_t^(n), with all remaining weight on
// the longest available n-step estimate. `bootstrap` is the value after the
// last step (ignored when the segment ends in a terminal state).
inline Vector LambdaMixtureAdvantages(const Vector& r, const Vector& v, bool terminal,
                                      double bootstrap, double gamma, double lam) {
  const std::size_t T = r.size();
  auto value_at = [&](std::size_t k) {
    if (k < T) return v[k];
    return terminal ? 0.0 : bootstrap;
  };
  Vector adv(T);
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t longest = T - t;
    double total = 0.0;
    double weight_left = 1.0;
    for (std::size_t n = 1; n <= longest; ++n) {
      double nstep = 0.0;
      for (std::size_t l = 0; l < n; ++l) nstep += std::pow(gamma, l) * r[t + l];
      nstep += std::pow(gamma, n) * value_at(t + n) - v[t];
      const double w = n < longest ? (1.0 - lam) * std::pow(lam, n - 1) : weight_left;
      total += w * nstep;
      weight_left -= w;
    }
    adv[t] = total;
  }
  return adv;
}

// Cyclic Jacobi eigendecomposition of a symmetric matrix: a = V diag(d) V^T.
inline void JacobiEigen(Matrix a, Vector& d, Matrix& v) {
  const std::size_t n = a.size();
  v.assign(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  d.resize(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i][i];
}

// V diag(f(d)) V^T
inline Matrix SpectralFunction(const Matrix& a, const std::function<double(double)>& f) {
  Vector d;
  Matrix v;
  JacobiEigen(a, d, v);
  const std::size_t n = a.size();
  Matrix out(n, Vector(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out[i][j] += v[i][k] * f(d[k]) * v[j][k];
  return out;
}

inline Vector MatVec(const Matrix& a, const Vector& x) {
  Vector y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

// Textbook (mu/mu_w, lambda)-CMA-ES for maximization, following the
// standard tutorial formulas, with its own storage and eigensolver.
struct ReferenceCma {
  int n, lambda, mu;
  Vector weights;
  double mu_eff, cs, ds, cc, c1, cmu, chi_n;
  Vector mean;
  double sigma;
  Matrix cov;
  Vector ps, pc;
  int generation = 0;

  ReferenceCma(const Vector& m0, double s0, int lam)
      : n(static_cast<int>(m0.size())), lambda(lam), mu(lam / 2), mean(m0), sigma(s0) {
    weights.resize(mu);
    double sum = 0.0;
    for (int i = 0; i < mu; ++i) {
      weights[i] = std::log((lambda + 1.0) / 2.0) - std::log(i + 1.0);
      sum += weights[i];
    }
    double sq = 0.0;
    for (double& w : weights) {
      w /= sum;
      sq += w * w;
    }
    mu_eff = 1.0 / sq;
    cs = (mu_eff + 2.0) / (n + mu_eff + 5.0);
    ds = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + cs;
    cc = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
    c1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
    cmu = std::min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                                 ((n + 2.0) * (n + 2.0) + mu_eff));
    chi_n = std::sqrt(static_cast<double>(n)) *
            (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    cov.assign(n, Vector(n, 0.0));
    for (int i = 0; i < n; ++i) cov[i][i] = 1.0;
    ps.assign(n, 0.0);
    pc.assign(n, 0.0);
  }

  std::vector<Vector> Ask(std::mt19937_64& rng) const {
    const Matrix root = SpectralFunction(cov, [](double x) { return std::sqrt(std::max(x, 1e-14)); });
    std::vector<Vector> xs;
    for (int k = 0; k < lambda; ++k) {
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector z(n);
      for (double& zi : z) zi = normal(rng);
      const Vector y = MatVec(root, z);
      Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = mean[i] + sigma * y[i];
      xs.push_back(x);
    }
    return xs;
  }

  void Tell(const std::vector<Vector>& xs, const Vector& fitness) {
    std::vector<int> idx(lambda);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return fitness[a] > fitness[b]; });
    const Vector old = mean;
    std::vector<Vector> ys;
    Vector yw(n, 0.0);
    for (int i = 0; i < mu; ++i) {
      Vector y(n);
      for (int j = 0; j < n; ++j) y[j] = (xs[idx[i]][j] - old[j]) / sigma;
      for (int j = 0; j < n; ++j) yw[j] += weights[i] * y[j];
      ys.push_back(y);
    }
    for (int j = 0; j < n; ++j) mean[j] = old[j] + sigma * yw[j];
    const Matrix inv_root =
        SpectralFunction(cov, [](double x) { return 1.0 / std::sqrt(std::max(x, 1e-14)); });
    const Vector white = MatVec(inv_root, yw);
    double ps_norm2 = 0.0;
    for (int j = 0; j < n; ++j) {
      ps[j] = (1.0 - cs) * ps[j] + std::sqrt(cs * (2.0 - cs) * mu_eff) * white[j];
      ps_norm2 += ps[j] * ps[j];
    }
    const double ps_norm = std::sqrt(ps_norm2);
    const bool hs = ps_norm / std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * (generation + 1))) <
                    (1.4 + 2.0 / (n + 1.0)) * chi_n;
    for (int j = 0; j < n; ++j) {
      pc[j] = (1.0 - cc) * pc[j] + (hs ? std::sqrt(cc * (2.0 - cc) * mu_eff) : 0.0) * yw[j];
    }
    const double delta = hs ? 0.0 : cc * (2.0 - cc);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        double rank_mu = 0.0;
        for (int i = 0; i < mu; ++i) rank_mu += weights[i] * ys[i][a] * ys[i][b];
        cov[a][b] = (1.0 + c1 * delta - c1 - cmu) * cov[a][b] + c1 * pc[a] * pc[b] +
                    cmu * rank_mu;
      }
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) cov[a][b] = cov[b][a] = 0.5 * (cov[a][b] + cov[b][a]);
    sigma *= std::exp((cs / ds) * (ps_norm / chi_n - 1.0));
    ++generation;
  }
};

}  // namespace oracle

#endif  // SOTRANSFER_TESTS_SUPPORT_ORACLES_H_
