#ifndef SOTRANSFER_NN_MLP_H_
#define SOTRANSFER_NN_MLP_H_

#include <vector>

#include "sotransfer/common.h"

namespace sotransfer::nn {

// Feed-forward network with tanh hidden layers and an identity output layer.
// weights[i] maps layer i (size layer_sizes[i]) to layer i + 1.
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  int InputSize() const { return layer_sizes.front(); }
  int OutputSize() const { return layer_sizes.back(); }
  int NumLayers() const { return static_cast<int>(weights.size()); }
  int NumParams() const;

  // Throws ConfigError if shapes do not chain or entries are non-finite.
  void Validate() const;
};

// Zero-initialized network with the given layer sizes.
Mlp ZeroMlp(const std::vector<int>& layer_sizes);

// Orthogonal initialization: hidden layers use gain sqrt(2), the output layer
// uses `output_gain` (0.01 for policy means, 1.0 for value heads). Biases are
// zero.
Mlp MakeMlp(int input, int output, Rng& rng, double output_gain = 1.0,
            int hidden = 64, int depth = 3);

// Orthogonal matrix of the given shape scaled by `gain`.
Mat OrthogonalInit(int rows, int cols, double gain, Rng& rng);

Vec Forward(const Mlp& net, const Vec& input);

// Activations for every layer of a batch (columns are samples). Keeps what
// the backward pass needs.
struct MlpTape {
  std::vector<Mat> activations;  // activations[0] is the input batch
  const Mat& Output() const { return activations.back(); }
};

MlpTape ForwardBatch(const Mlp& net, const Mat& inputs);

// Reverse-mode gradient of sum_j output_j . output_grad_j with respect to all
// weights and biases, summed over the batch columns. Returned in Mlp shape.
Mlp Backward(const Mlp& net, const MlpTape& tape, const Mat& output_grad);
Mlp Backward(const Mlp& net, const Vec& input, const Vec& output_grad);

// Flat parameter view, layer by layer: weights (column-major) then biases.
Vec Flatten(const Mlp& net);
void Assign(Mlp& net, const Vec& flat, int offset = 0);

}  // namespace sotransfer::nn

#endif  // SOTRANSFER_NN_MLP_H_
