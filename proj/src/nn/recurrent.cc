#include "sotransfer/nn/recurrent.h"

#include <cmath>
#include <string>

#include "sotransfer/nn/mlp.h"

namespace sotransfer::nn {

namespace {

Mat Sigmoid(const Mat& a) { return (1.0 + (-a.array()).exp()).inverse().matrix(); }

struct StepCache {
  Mat h_prev, z, r, n, h;
};

StepCache CellWithCache(const RecurrentModel& m, const Mat& h_prev,
                        const Mat& x) {
  const int H = m.hidden;
  StepCache c;
  c.h_prev = h_prev;
  Mat gx = m.w_in * x;
  gx.colwise() += m.bias;
  Mat zr = gx.topRows(2 * H) + m.w_rec.topRows(2 * H) * h_prev;
  c.z = Sigmoid(zr.topRows(H));
  c.r = Sigmoid(zr.bottomRows(H));
  Mat rh = c.r.cwiseProduct(h_prev);
  c.n = (gx.bottomRows(H) + m.w_rec.bottomRows(H) * rh).array().tanh();
  c.h = h_prev + c.z.cwiseProduct(c.n - h_prev);
  return c;
}

Mat InitialHidden(const RecurrentModel& m, const Mat& given, Eigen::Index batch) {
  if (given.size() == 0) return Mat::Zero(m.hidden, batch);
  Require(given.rows() == m.hidden && given.cols() == batch,
          "recurrent: initial hidden state shape mismatch");
  return given;
}

void CheckInputs(const RecurrentModel& m, const std::vector<Mat>& inputs) {
  Require(!inputs.empty(), "recurrent: empty input sequence");
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    Require(inputs[t].rows() == m.input && inputs[t].cols() == inputs[0].cols(),
            "recurrent: element " + std::to_string(t) + " has wrong shape");
  }
}

}  // namespace

int RecurrentModel::NumParams() const {
  return static_cast<int>(w_in.size() + w_rec.size() + bias.size() +
                          w_out.size() + b_out.size());
}

void RecurrentModel::Validate() const {
  Require(input > 0 && hidden > 0 && output > 0, "recurrent: sizes must be positive");
  Require(w_in.rows() == 3 * hidden && w_in.cols() == input, "recurrent: w_in shape");
  Require(w_rec.rows() == 3 * hidden && w_rec.cols() == hidden, "recurrent: w_rec shape");
  Require(bias.size() == 3 * hidden, "recurrent: bias shape");
  Require(w_out.rows() == output && w_out.cols() == hidden, "recurrent: w_out shape");
  Require(b_out.size() == output, "recurrent: b_out shape");
  Require(w_in.allFinite() && w_rec.allFinite() && bias.allFinite() &&
              w_out.allFinite() && b_out.allFinite(),
          "recurrent: non-finite parameters");
}

RecurrentModel ZeroRecurrent(int input, int hidden, int output) {
  RecurrentModel m;
  m.input = input;
  m.hidden = hidden;
  m.output = output;
  m.w_in = Mat::Zero(3 * hidden, input);
  m.w_rec = Mat::Zero(3 * hidden, hidden);
  m.bias = Vec::Zero(3 * hidden);
  m.w_out = Mat::Zero(output, hidden);
  m.b_out = Vec::Zero(output);
  return m;
}

RecurrentModel MakeRecurrent(int input, int hidden, int output, Rng& rng) {
  RecurrentModel m = ZeroRecurrent(input, hidden, output);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (Eigen::Index i = 0; i < m.w_in.size(); ++i) m.w_in.data()[i] = u(rng);
  for (int g = 0; g < 3; ++g) {
    m.w_rec.middleRows(g * hidden, hidden) = OrthogonalInit(hidden, hidden, 1.0, rng);
  }
  m.w_out = OrthogonalInit(output, hidden, 1.0, rng);
  return m;
}

Mat RecurrentCell(const RecurrentModel& model, const Mat& hidden, const Mat& input) {
  Require(input.rows() == model.input && hidden.rows() == model.hidden &&
              hidden.cols() == input.cols(),
          "recurrent: cell input shape mismatch");
  return CellWithCache(model, hidden, input).h;
}

RecurrentResult RecurrentForward(const RecurrentModel& model,
                                 const std::vector<Mat>& inputs,
                                 const Mat& initial_hidden) {
  CheckInputs(model, inputs);
  RecurrentResult res;
  Mat h = InitialHidden(model, initial_hidden, inputs[0].cols());
  res.outputs.reserve(inputs.size());
  for (const Mat& x : inputs) {
    h = CellWithCache(model, h, x).h;
    Mat y = model.w_out * h;
    y.colwise() += model.b_out;
    res.outputs.push_back(std::move(y));
  }
  res.final_hidden = std::move(h);
  return res;
}

RecurrentModel RecurrentBackward(const RecurrentModel& model,
                                 const std::vector<Mat>& inputs,
                                 const std::vector<Mat>& output_grads,
                                 const Mat& initial_hidden) {
  CheckInputs(model, inputs);
  Require(output_grads.size() == inputs.size(),
          "recurrent: output gradient count mismatch");
  const int H = model.hidden;
  const Eigen::Index batch = inputs[0].cols();
  std::vector<StepCache> caches;
  caches.reserve(inputs.size());
  Mat h = InitialHidden(model, initial_hidden, batch);
  for (const Mat& x : inputs) {
    caches.push_back(CellWithCache(model, h, x));
    h = caches.back().h;
  }

  RecurrentModel g = ZeroRecurrent(model.input, H, model.output);
  Mat dh_next = Mat::Zero(H, batch);
  for (int t = static_cast<int>(inputs.size()) - 1; t >= 0; --t) {
    const StepCache& c = caches[t];
    const Mat& gy = output_grads[t];
    Require(gy.rows() == model.output && gy.cols() == batch,
            "recurrent: output gradient shape mismatch");
    g.w_out.noalias() += gy * c.h.transpose();
    g.b_out += gy.rowwise().sum();
    Mat dh = model.w_out.transpose() * gy + dh_next;

    Mat dz = dh.cwiseProduct(c.n - c.h_prev);
    Mat dn = dh.cwiseProduct(c.z);
    Mat dh_prev = dh.cwiseProduct((1.0 - c.z.array()).matrix());

    Mat da(3 * H, batch);
    da.middleRows(2 * H, H) = dn.array() * (1.0 - c.n.array().square());
    Mat rh = c.r.cwiseProduct(c.h_prev);
    Mat drh = model.w_rec.bottomRows(H).transpose() * da.middleRows(2 * H, H);
    Mat dr = drh.cwiseProduct(c.h_prev);
    dh_prev += drh.cwiseProduct(c.r);
    da.topRows(H) = dz.array() * c.z.array() * (1.0 - c.z.array());
    da.middleRows(H, H) = dr.array() * c.r.array() * (1.0 - c.r.array());

    g.w_in.noalias() += da * inputs[t].transpose();
    g.bias += da.rowwise().sum();
    g.w_rec.topRows(2 * H).noalias() += da.topRows(2 * H) * c.h_prev.transpose();
    g.w_rec.bottomRows(H).noalias() += da.bottomRows(H) * rh.transpose();
    dh_prev.noalias() += model.w_rec.topRows(2 * H).transpose() * da.topRows(2 * H);
    dh_next = std::move(dh_prev);
  }
  return g;
}

Vec Flatten(const RecurrentModel& model) {
  Vec flat(model.NumParams());
  Eigen::Index k = 0;
  auto put = [&](const auto& m) {
    flat.segment(k, m.size()) = Eigen::Map<const Vec>(m.data(), m.size());
    k += m.size();
  };
  put(model.w_in);
  put(model.w_rec);
  put(model.bias);
  put(model.w_out);
  put(model.b_out);
  return flat;
}

void Assign(RecurrentModel& model, const Vec& flat) {
  Require(flat.size() == model.NumParams(), "recurrent: flat size mismatch");
  Eigen::Index k = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Vec>(m.data(), m.size()) = flat.segment(k, m.size());
    k += m.size();
  };
  take(model.w_in);
  take(model.w_rec);
  take(model.bias);
  take(model.w_out);
  take(model.b_out);
}

}  // namespace sotransfer::nn
