#ifndef SOTRANSFER_NN_RECURRENT_H_
#define SOTRANSFER_NN_RECURRENT_H_

#include <vector>

#include "sotransfer/common.h"

namespace sotransfer::nn {

// Gated recurrent unit with a linear read-out:
//   z  = sigmoid(Wz x + Uz h + bz)
//   r  = sigmoid(Wr x + Ur h + br)
//   n  = tanh(Wn x + Un (r * h) + bn)
//   h' = (1 - z) * h + z * n
//   y  = Wo h' + bo
// Gate blocks are stacked [z; r; n] in w_in, w_rec and bias.
struct RecurrentModel {
  int input = 0;
  int hidden = 0;
  int output = 0;
  Mat w_in;   // 3H x I
  Mat w_rec;  // 3H x H
  Vec bias;   // 3H
  Mat w_out;  // O x H
  Vec b_out;  // O

  int NumParams() const;
  void Validate() const;
};

RecurrentModel ZeroRecurrent(int input, int hidden, int output);
// Uniform(-1/sqrt(H), 1/sqrt(H)) gates, orthogonal recurrent blocks.
RecurrentModel MakeRecurrent(int input, int hidden, int output, Rng& rng);

// One step for a batch (columns are sequences). Returns the new hidden state.
Mat RecurrentCell(const RecurrentModel& model, const Mat& hidden,
                  const Mat& input);

struct RecurrentResult {
  std::vector<Mat> outputs;  // one O x B matrix per time step
  Mat final_hidden;          // H x B
};

// Runs a batch of equal-length sequences from `initial_hidden` (zeros when
// empty).
RecurrentResult RecurrentForward(const RecurrentModel& model,
                                 const std::vector<Mat>& inputs,
                                 const Mat& initial_hidden = Mat());

// Backpropagation through time for the loss sum_t sum_b outputs[t] . grads[t].
RecurrentModel RecurrentBackward(const RecurrentModel& model,
                                 const std::vector<Mat>& inputs,
                                 const std::vector<Mat>& output_grads,
                                 const Mat& initial_hidden = Mat());

Vec Flatten(const RecurrentModel& model);
void Assign(RecurrentModel& model, const Vec& flat);

}  // namespace sotransfer::nn

#endif  // SOTRANSFER_NN_RECURRENT_H_
