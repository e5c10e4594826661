#include "sotransfer/nn/normalizer.h"

namespace sotransfer::nn {

RunningNormalizer RunningNormalizer::ForSize(int n) {
  RunningNormalizer r;
  r.mean = Vec::Zero(n);
  r.var = Vec::Ones(n);
  return r;
}

void RunningNormalizer::Update(const Mat& batch) {
  if (batch.cols() == 0) return;
  Require(batch.rows() == mean.size(), "normalizer: width mismatch");
  const double n = static_cast<double>(batch.cols());
  Vec batch_mean = batch.rowwise().mean();
  Vec batch_var =
      (batch.colwise() - batch_mean).array().square().rowwise().sum() / n;
  const double total = count + n;
  Vec delta = batch_mean - mean;
  mean += delta * (n / total);
  Vec m2 = var * count + batch_var * n + delta.cwiseProduct(delta) * (count * n / total);
  var = m2 / total;
  count = total;
}

Vec RunningNormalizer::Apply(const Vec& x) const {
  Vec out = (x - mean).array() / (var.array() + 1e-8).sqrt();
  return out.cwiseMax(-clip).cwiseMin(clip);
}

Mat RunningNormalizer::Apply(const Mat& batch) const {
  Mat out = batch.colwise() - mean;
  out = out.array().colwise() / (var.array() + 1e-8).sqrt();
  return out.cwiseMax(-clip).cwiseMin(clip);
}

}  // namespace sotransfer::nn
