#include "sotransfer/nn/mlp.h"

#include <cmath>
#include <string>

namespace sotransfer::nn {

int Mlp::NumParams() const {
  int n = 0;
  for (int i = 0; i < NumLayers(); ++i) {
    n += static_cast<int>(weights[i].size() + biases[i].size());
  }
  return n;
}

void Mlp::Validate() const {
  Require(layer_sizes.size() >= 2, "mlp: need at least input and output sizes");
  Require(weights.size() + 1 == layer_sizes.size() &&
              biases.size() == weights.size(),
          "mlp: layer count mismatch");
  for (int i = 0; i < NumLayers(); ++i) {
    Require(weights[i].rows() == layer_sizes[i + 1] &&
                weights[i].cols() == layer_sizes[i],
            "mlp: weight " + std::to_string(i) + " has wrong shape");
    Require(biases[i].size() == layer_sizes[i + 1],
            "mlp: bias " + std::to_string(i) + " has wrong shape");
    Require(weights[i].allFinite() && biases[i].allFinite(),
            "mlp: non-finite parameters in layer " + std::to_string(i));
  }
}

Mlp ZeroMlp(const std::vector<int>& layer_sizes) {
  Mlp net;
  net.layer_sizes = layer_sizes;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    net.weights.push_back(Mat::Zero(layer_sizes[i + 1], layer_sizes[i]));
    net.biases.push_back(Vec::Zero(layer_sizes[i + 1]));
  }
  return net;
}

Mat OrthogonalInit(int rows, int cols, double gain, Rng& rng) {
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Mat a(big, small);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < small; ++j) {
    for (int i = 0; i < big; ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(big, small);
  // Sign fix so the distribution is uniform over orthogonal matrices.
  Mat r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  Mat w = rows >= cols ? q : Mat(q.transpose());
  return gain * w;
}

Mlp MakeMlp(int input, int output, Rng& rng, double output_gain, int hidden,
            int depth) {
  Require(input >= 1 && output >= 1, "mlp: sizes must be positive");
  std::vector<int> sizes{input};
  for (int i = 0; i < depth; ++i) sizes.push_back(hidden);
  sizes.push_back(output);
  Mlp net = ZeroMlp(sizes);
  for (int i = 0; i < net.NumLayers(); ++i) {
    const bool last = i + 1 == net.NumLayers();
    net.weights[i] = OrthogonalInit(sizes[i + 1], sizes[i],
                                    last ? output_gain : std::sqrt(2.0), rng);
  }
  return net;
}

Vec Forward(const Mlp& net, const Vec& input) {
  Require(input.size() == net.InputSize(),
          "mlp_forward: input length " + std::to_string(input.size()) +
              " != " + std::to_string(net.InputSize()));
  Vec h = input;
  for (int i = 0; i < net.NumLayers(); ++i) {
    Vec z = net.weights[i] * h + net.biases[i];
    h = i + 1 < net.NumLayers() ? Vec(z.array().tanh()) : z;
  }
  return h;
}

MlpTape ForwardBatch(const Mlp& net, const Mat& inputs) {
  Require(inputs.rows() == net.InputSize(), "mlp_forward: input rows mismatch");
  MlpTape tape;
  tape.activations.reserve(net.NumLayers() + 1);
  tape.activations.push_back(inputs);
  for (int i = 0; i < net.NumLayers(); ++i) {
    Mat z = net.weights[i] * tape.activations.back();
    z.colwise() += net.biases[i];
    if (i + 1 < net.NumLayers()) z = z.array().tanh();
    tape.activations.push_back(std::move(z));
  }
  return tape;
}

Mlp Backward(const Mlp& net, const MlpTape& tape, const Mat& output_grad) {
  Require(output_grad.rows() == net.OutputSize() &&
              output_grad.cols() == tape.Output().cols(),
          "mlp_backward: output gradient shape mismatch");
  Mlp grad = ZeroMlp(net.layer_sizes);
  Mat delta = output_grad;
  for (int i = net.NumLayers() - 1; i >= 0; --i) {
    grad.weights[i].noalias() = delta * tape.activations[i].transpose();
    grad.biases[i] = delta.rowwise().sum();
    if (i == 0) break;
    Mat back = net.weights[i].transpose() * delta;
    const Mat& h = tape.activations[i];
    delta = back.array() * (1.0 - h.array().square());
  }
  return grad;
}

Mlp Backward(const Mlp& net, const Vec& input, const Vec& output_grad) {
  Require(input.size() == net.InputSize(), "mlp_backward: input mismatch");
  MlpTape tape = ForwardBatch(net, input);
  return Backward(net, tape, output_grad);
}

Vec Flatten(const Mlp& net) {
  Vec flat(net.NumParams());
  int k = 0;
  for (int i = 0; i < net.NumLayers(); ++i) {
    const auto n = net.weights[i].size();
    flat.segment(k, n) = Eigen::Map<const Vec>(net.weights[i].data(), n);
    k += static_cast<int>(n);
    flat.segment(k, net.biases[i].size()) = net.biases[i];
    k += static_cast<int>(net.biases[i].size());
  }
  return flat;
}

void Assign(Mlp& net, const Vec& flat, int offset) {
  Require(flat.size() - offset >= net.NumParams(), "mlp: flat vector too short");
  int k = offset;
  for (int i = 0; i < net.NumLayers(); ++i) {
    const auto n = net.weights[i].size();
    Eigen::Map<Vec>(net.weights[i].data(), n) = flat.segment(k, n);
    k += static_cast<int>(n);
    net.biases[i] = flat.segment(k, net.biases[i].size());
    k += static_cast<int>(net.biases[i].size());
  }
}

}  // namespace sotransfer::nn
