#include "seqtag/lstm.hpp"

#include "seqtag/error.hpp"

namespace seqtag {

namespace {

Eigen::VectorXd Sigmoid(const Eigen::VectorXd& a) {
  return (1.0 + (-a.array()).exp()).inverse().matrix();
}

Eigen::MatrixXd RandomMatrix(int rows, int cols, Rng& rng, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.Uniform(-scale, scale);
  }
  return m;
}

}  // namespace

LstmCell LstmCell::Zero(int input_dim, int hidden) {
  return {Eigen::MatrixXd::Zero(3 * hidden, input_dim), Eigen::MatrixXd::Zero(3 * hidden, hidden),
          Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden),
          Eigen::VectorXd::Zero(3 * hidden)};
}

LstmCell LstmCell::Random(int input_dim, int hidden, Rng& rng, double scale) {
  LstmCell c;
  c.w_x = RandomMatrix(3 * hidden, input_dim, rng, scale);
  c.w_h = RandomMatrix(3 * hidden, hidden, rng, scale);
  c.peep_input = RandomMatrix(hidden, 1, rng, scale);
  c.peep_output = RandomMatrix(hidden, 1, rng, scale);
  c.bias = RandomMatrix(3 * hidden, 1, rng, scale);
  return c;
}

void LstmCell::SetZero() {
  w_x.setZero();
  w_h.setZero();
  peep_input.setZero();
  peep_output.setZero();
  bias.setZero();
}

void LstmCell::AddScaled(const LstmCell& o, double scale) {
  w_x += scale * o.w_x;
  w_h += scale * o.w_h;
  peep_input += scale * o.peep_input;
  peep_output += scale * o.peep_output;
  bias += scale * o.bias;
}

double LstmCell::SquaredNorm() const {
  return w_x.squaredNorm() + w_h.squaredNorm() + peep_input.squaredNorm() +
         peep_output.squaredNorm() + bias.squaredNorm();
}

LstmState LstmStep(const LstmCell& cell, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                   const Eigen::VectorXd& c_prev) {
  const int h = cell.hidden();
  if (x.size() != cell.input_dim() || h_prev.size() != h || c_prev.size() != h) {
    Fail(ErrorKind::kArgument, "LSTM step dimension mismatch");
  }
  Eigen::VectorXd a = cell.w_x * x + cell.w_h * h_prev + cell.bias;
  Eigen::VectorXd i = Sigmoid(a.segment(0, h) + cell.peep_input.cwiseProduct(c_prev));
  Eigen::VectorXd g = a.segment(h, h).array().tanh();
  LstmState next;
  next.c = (1.0 - i.array()) * c_prev.array() + i.array() * g.array();
  Eigen::VectorXd o = Sigmoid(a.segment(2 * h, h) + cell.peep_output.cwiseProduct(next.c));
  next.h = o.array() * next.c.array().tanh();
  return next;
}

LstmTrace RunLstm(const LstmCell& cell, const Eigen::MatrixXd& inputs, bool reverse) {
  const int h = cell.hidden();
  const int t_len = static_cast<int>(inputs.cols());
  if (inputs.rows() != cell.input_dim()) Fail(ErrorKind::kArgument, "LSTM input dimension mismatch");
  LstmTrace tr;
  tr.reverse = reverse;
  tr.inputs = inputs;
  tr.input_gate.resize(h, t_len);
  tr.candidate.resize(h, t_len);
  tr.output_gate.resize(h, t_len);
  tr.cell.resize(h, t_len);
  tr.tanh_cell.resize(h, t_len);
  tr.hidden.resize(h, t_len);

  Eigen::MatrixXd pre = cell.w_x * inputs;
  pre.colwise() += cell.bias;
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd a(3 * h);
  for (int s = 0; s < t_len; ++s) {
    const int p = reverse ? t_len - 1 - s : s;
    a.noalias() = pre.col(p) + cell.w_h * h_prev;
    Eigen::VectorXd i = Sigmoid(a.segment(0, h) + cell.peep_input.cwiseProduct(c_prev));
    Eigen::VectorXd g = a.segment(h, h).array().tanh();
    Eigen::VectorXd c = (1.0 - i.array()) * c_prev.array() + i.array() * g.array();
    Eigen::VectorXd o = Sigmoid(a.segment(2 * h, h) + cell.peep_output.cwiseProduct(c));
    Eigen::VectorXd tc = c.array().tanh();
    tr.input_gate.col(p) = i;
    tr.candidate.col(p) = g;
    tr.output_gate.col(p) = o;
    tr.cell.col(p) = c;
    tr.tanh_cell.col(p) = tc;
    tr.hidden.col(p) = o.cwiseProduct(tc);
    h_prev = tr.hidden.col(p);
    c_prev = c;
  }
  return tr;
}

Eigen::MatrixXd BackpropLstm(const LstmCell& cell, const LstmTrace& tr,
                             const Eigen::MatrixXd& d_hidden, LstmCell& grad) {
  const int h = cell.hidden();
  const int t_len = tr.length();
  auto pos = [&](int s) { return tr.reverse ? t_len - 1 - s : s; };

  Eigen::MatrixXd d_pre(3 * h, t_len);
  Eigen::MatrixXd h_prevs(h, t_len);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(h);

  for (int s = t_len - 1; s >= 0; --s) {
    const int p = pos(s);
    Eigen::VectorXd h_prev = s > 0 ? Eigen::VectorXd(tr.hidden.col(pos(s - 1))) : zero;
    Eigen::VectorXd c_prev = s > 0 ? Eigen::VectorXd(tr.cell.col(pos(s - 1))) : zero;
    h_prevs.col(p) = h_prev;

    const auto i = tr.input_gate.col(p).array();
    const auto g = tr.candidate.col(p).array();
    const auto o = tr.output_gate.col(p).array();
    const auto c = tr.cell.col(p).array();
    const auto tc = tr.tanh_cell.col(p).array();

    Eigen::ArrayXd dh = d_hidden.col(p).array() + dh_next.array();
    Eigen::ArrayXd d_o = dh * tc;
    Eigen::ArrayXd dc = dc_next.array() + dh * o * (1.0 - tc.square());
    Eigen::ArrayXd da_o = d_o * o * (1.0 - o);
    dc += da_o * cell.peep_output.array();
    grad.peep_output.array() += da_o * c;

    Eigen::ArrayXd di = dc * (g - c_prev.array());
    Eigen::ArrayXd dg = dc * i;
    Eigen::ArrayXd dc_prev = dc * (1.0 - i);
    Eigen::ArrayXd da_c = dg * (1.0 - g.square());
    Eigen::ArrayXd da_i = di * i * (1.0 - i);
    dc_prev += da_i * cell.peep_input.array();
    grad.peep_input.array() += da_i * c_prev.array();

    d_pre.col(p).segment(0, h) = da_i.matrix();
    d_pre.col(p).segment(h, h) = da_c.matrix();
    d_pre.col(p).segment(2 * h, h) = da_o.matrix();

    dh_next.noalias() = cell.w_h.transpose() * d_pre.col(p);
    dc_next = dc_prev.matrix();
  }
  grad.w_x.noalias() += d_pre * tr.inputs.transpose();
  grad.w_h.noalias() += d_pre * h_prevs.transpose();
  grad.bias += d_pre.rowwise().sum();
  return cell.w_x.transpose() * d_pre;
}

}  // namespace seqtag
