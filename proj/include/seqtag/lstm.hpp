#ifndef SEQTAG_LSTM_HPP_
#define SEQTAG_LSTM_HPP_

#include <Eigen/Dense>

#include "seqtag/random.hpp"

namespace seqtag {

// LSTM cell with a coupled input/forget gate and diagonal peepholes:
//
//   i_t = sigmoid(Wxi x_t + Whi h_{t-1} + wci .* c_{t-1} + b_i)
//   c_t = (1 - i_t) .* c_{t-1} + i_t .* tanh(Wxc x_t + Whc h_{t-1} + b_c)
//   o_t = sigmoid(Wxo x_t + Who h_{t-1} + wco .* c_t + b_o)
//   h_t = o_t .* tanh(c_t)
//
// Gate weights are stacked row-wise in the order [input; candidate; output].
struct LstmCell {
  Eigen::MatrixXd w_x;          // 3H x D
  Eigen::MatrixXd w_h;          // 3H x H
  Eigen::VectorXd peep_input;   // H, reads c_{t-1}
  Eigen::VectorXd peep_output;  // H, reads c_t
  Eigen::VectorXd bias;         // 3H

  int hidden() const { return static_cast<int>(w_h.cols()); }
  int input_dim() const { return static_cast<int>(w_x.cols()); }

  static LstmCell Zero(int input_dim, int hidden);
  // Every coefficient uniform in [-scale, scale].
  static LstmCell Random(int input_dim, int hidden, Rng& rng, double scale);

  // Gate blocks of the stacked matrices.
  enum Gate { kInput = 0, kCandidate = 1, kOutput = 2 };
  auto x_block(Gate g) { return w_x.middleRows(g * hidden(), hidden()); }
  auto h_block(Gate g) { return w_h.middleRows(g * hidden(), hidden()); }
  auto bias_block(Gate g) { return bias.segment(g * hidden(), hidden()); }

  void SetZero();
  // this += scale * other
  void AddScaled(const LstmCell& other, double scale);
  double SquaredNorm() const;
};

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

LstmState LstmStep(const LstmCell& cell, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev);

// Activations of one pass over a sequence, columns indexed by input
// position. A reversed pass reads positions T-1 down to 0.
struct LstmTrace {
  bool reverse = false;
  Eigen::MatrixXd inputs;      // D x T
  Eigen::MatrixXd input_gate;  // H x T
  Eigen::MatrixXd candidate;   // tanh of the candidate pre-activation
  Eigen::MatrixXd output_gate;
  Eigen::MatrixXd cell;
  Eigen::MatrixXd tanh_cell;
  Eigen::MatrixXd hidden;      // H x T, the pass outputs

  int length() const { return static_cast<int>(inputs.cols()); }
};

// Zero initial state.
LstmTrace RunLstm(const LstmCell& cell, const Eigen::MatrixXd& inputs, bool reverse);

// Backpropagates d_hidden (H x T, gradient of the loss w.r.t. each output)
// through the pass. Parameter gradients are added into `grad`; the result
// is the gradient w.r.t. the inputs (D x T).
Eigen::MatrixXd BackpropLstm(const LstmCell& cell, const LstmTrace& trace,
                             const Eigen::MatrixXd& d_hidden, LstmCell& grad);

}  // namespace seqtag

#endif  // SEQTAG_LSTM_HPP_
