#ifndef SOTRANSFER_NN_NORMALIZER_H_
#define SOTRANSFER_NN_NORMALIZER_H_

#include "sotransfer/common.h"

namespace sotransfer::nn {

// Running mean/variance of network inputs (parallel-variance merge). Frozen
// copies are used at inference time.
struct RunningNormalizer {
  Vec mean;
  Vec var;
  double count = 1e-4;
  double clip = 10.0;

  static RunningNormalizer ForSize(int n);
  void Update(const Mat& batch);  // columns are samples
  Vec Apply(const Vec& x) const;
  Mat Apply(const Mat& batch) const;
};

}  // namespace sotransfer::nn

#endif  // SOTRANSFER_NN_NORMALIZER_H_
