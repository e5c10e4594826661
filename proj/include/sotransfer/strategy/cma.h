#ifndef SOTRANSFER_STRATEGY_CMA_H_
#define SOTRANSFER_STRATEGY_CMA_H_

#include <vector>

#include "sotransfer/common.h"

namespace sotransfer::strategy {

// 4 + floor(3 ln N).
int CmaPopulationSize(int n);

// (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates.
// Fitness is maximized.
struct CmaState {
  int n = 0;
  int lambda = 0;
  int mu = 0;  // parents
  Vec weights;
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;

  Vec mean;
  double sigma = 0.0;
  Mat cov;
  Vec p_sigma;
  Vec p_c;
  int generation = 0;

  // Eigendecomposition of cov = B diag(D^2) B^T.
  Mat basis;
  Vec scales;  // D
  int eigen_repairs = 0;

  Mat SqrtCov() const;     // B D B^T
  Mat InvSqrtCov() const;  // B D^-1 B^T
  void Validate() const;
};

// Identity covariance, zero paths. `lambda` <= 0 selects the default rule.
CmaState CmaInit(const Vec& mean0, double sigma0, int lambda = 0);

// Unclipped candidates as columns: m + sigma * C^{1/2} z, one N-vector of
// standard normals drawn per candidate in order.
Mat CmaAsk(CmaState& state, Rng& rng);

// Ranks by fitness (descending; ties by column index unless
// `index_tiebreak` is false, in which case the sort is unstable).
void CmaTell(CmaState& state, const Mat& candidates, const Vec& fitness,
             bool index_tiebreak = true);

// Recomputes the eigendecomposition after symmetrizing cov and flooring
// eigenvalues at 1e-14.
void CmaDecompose(CmaState& state);

Vec ClipToUnitBox(const Vec& x);

}  // namespace sotransfer::strategy

#endif  // SOTRANSFER_STRATEGY_CMA_H_
