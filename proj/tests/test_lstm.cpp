#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "seqtag/error.hpp"
#include "seqtag/lstm.hpp"

using namespace seqtag;

namespace {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::VectorXd Scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("zero cell from zero state stays at zero") {
  LstmCell cell = LstmCell::Zero(3, 4);
  Rng rng(1);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(4), c = h;
  for (int t = 0; t < 10; ++t) {
    LstmState s = LstmStep(cell, oracle::RandomMatrix(3, 1, rng).col(0), h, c);
    h = s.h;
    c = s.c;
    CHECK(h.norm() == 0.0);
    CHECK(c.norm() == 0.0);
  }
}

TEST_CASE("scalar probe with unit previous cell") {
  LstmCell cell = LstmCell::Zero(1, 1);
  LstmState s = LstmStep(cell, Scalar(0.0), Scalar(0.0), Scalar(1.0));
  // i = 0.5, c = 0.5 * 1 + 0.5 * tanh(0), o = 0.5, h = 0.5 tanh(0.5)
  CHECK(s.c(0) == 0.5);
  CHECK(std::abs(s.h(0) - 0.5 * std::tanh(0.5)) < 1e-12);
  CHECK(std::abs(s.h(0) - 0.231059) < 1e-6);
}

TEST_CASE("input peephole reads the previous cell") {
  LstmCell cell = LstmCell::Zero(1, 1);
  cell.peep_input(0) = 0.7;
  const double c_prev = 1.3;
  LstmState s = LstmStep(cell, Scalar(0.0), Scalar(0.0), Scalar(c_prev));
  const double i = Sigmoid(0.7 * c_prev);
  const double c = (1.0 - i) * c_prev;
  CHECK(std::abs(s.c(0) - c) < 1e-12);
  CHECK(std::abs(s.h(0) - 0.5 * std::tanh(c)) < 1e-12);
}

TEST_CASE("output peephole reads the new cell") {
  LstmCell cell = LstmCell::Zero(1, 1);
  cell.peep_output(0) = -0.9;
  cell.x_block(LstmCell::kCandidate)(0, 0) = 2.0;
  const double x = 0.4, c_prev = -0.6;
  LstmState s = LstmStep(cell, Scalar(x), Scalar(0.0), Scalar(c_prev));
  const double c = 0.5 * c_prev + 0.5 * std::tanh(2.0 * x);
  const double o = Sigmoid(-0.9 * c);
  CHECK(std::abs(s.c(0) - c) < 1e-12);
  CHECK(std::abs(s.h(0) - o * std::tanh(c)) < 1e-12);
  // Reading c_prev instead would give a different value.
  CHECK(std::abs(s.h(0) - Sigmoid(-0.9 * c_prev) * std::tanh(c)) > 1e-3);
}

TEST_CASE("every gate term matches a scalar hand evaluation") {
  LstmCell cell = LstmCell::Zero(1, 1);
  cell.x_block(LstmCell::kInput)(0, 0) = 0.3;
  cell.h_block(LstmCell::kInput)(0, 0) = -0.2;
  cell.bias_block(LstmCell::kInput)(0) = 0.1;
  cell.x_block(LstmCell::kCandidate)(0, 0) = -0.5;
  cell.h_block(LstmCell::kCandidate)(0, 0) = 0.8;
  cell.bias_block(LstmCell::kCandidate)(0) = 0.05;
  cell.x_block(LstmCell::kOutput)(0, 0) = 0.6;
  cell.h_block(LstmCell::kOutput)(0, 0) = 0.4;
  cell.bias_block(LstmCell::kOutput)(0) = -0.3;
  cell.peep_input(0) = 0.25;
  cell.peep_output(0) = -0.35;
  const double x = 0.9, h0 = -0.4, c0 = 0.7;
  const double i = Sigmoid(0.3 * x - 0.2 * h0 + 0.25 * c0 + 0.1);
  const double c = (1 - i) * c0 + i * std::tanh(-0.5 * x + 0.8 * h0 + 0.05);
  const double o = Sigmoid(0.6 * x + 0.4 * h0 - 0.35 * c - 0.3);
  LstmState s = LstmStep(cell, Scalar(x), Scalar(h0), Scalar(c0));
  CHECK(std::abs(s.c(0) - c) < 1e-12);
  CHECK(std::abs(s.h(0) - o * std::tanh(c)) < 1e-12);
}

TEST_CASE("coupled gate keeps the cell bounded") {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    LstmCell cell = LstmCell::Random(3, 4, rng, 2.0);
    const Eigen::VectorXd x = oracle::RandomMatrix(3, 1, rng, 3.0).col(0);
    const Eigen::VectorXd h = oracle::RandomMatrix(4, 1, rng, 1.0).col(0);
    const Eigen::VectorXd c = oracle::RandomMatrix(4, 1, rng, 3.0).col(0);
    LstmState s = LstmStep(cell, x, h, c);
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(s.c(k)) <= std::max(std::abs(c(k)), 1.0));
      CHECK(std::abs(s.h(k)) < 1.0);
    }
  }
}

TEST_CASE("dimension mismatch is an argument error") {
  LstmCell cell = LstmCell::Zero(3, 2);
  CHECK_THROWS_AS(LstmStep(cell, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
                  Error);
  CHECK_THROWS_AS(LstmStep(cell, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)),
                  Error);
}

TEST_CASE("sequence pass equals repeated steps in both directions") {
  Rng rng(3);
  LstmCell cell = LstmCell::Random(3, 2, rng, 1.0);
  const Eigen::MatrixXd x = oracle::RandomMatrix(3, 5, rng);
  for (bool reverse : {false, true}) {
    LstmTrace tr = RunLstm(cell, x, reverse);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(2), c = h;
    for (int k = 0; k < 5; ++k) {
      const int t = reverse ? 4 - k : k;
      LstmState s = LstmStep(cell, x.col(t), h, c);
      h = s.h;
      c = s.c;
      CHECK((tr.hidden.col(t) - h).norm() < 1e-14);
      CHECK((tr.cell.col(t) - c).norm() < 1e-14);
    }
  }
}

TEST_CASE("backprop through time matches finite differences") {
  Rng rng(4);
  LstmCell cell = LstmCell::Random(3, 2, rng, 1.0);
  Eigen::MatrixXd x = oracle::RandomMatrix(3, 4, rng);
  const Eigen::MatrixXd w = oracle::RandomMatrix(2, 4, rng);  // loss = sum(w .* h)
  for (bool reverse : {false, true}) {
    auto loss = [&] { return (RunLstm(cell, x, reverse).hidden.array() * w.array()).sum(); };
    LstmCell grad = LstmCell::Zero(3, 2);
    const Eigen::MatrixXd dx = BackpropLstm(cell, RunLstm(cell, x, reverse), w, grad);
    auto check = [&](Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& analytic) {
      for (long i = 0; i < param.size(); ++i) {
        CHECK(oracle::RelativeError(analytic(i), oracle::CentralDifference(param.data() + i, 1e-5, loss)) <
              1e-6);
      }
    };
    check(cell.w_x, grad.w_x);
    check(cell.w_h, grad.w_h);
    check(cell.peep_input, grad.peep_input);
    check(cell.peep_output, grad.peep_output);
    check(cell.bias, grad.bias);
    check(x, dx);
  }
}

TEST_CASE("cell helpers") {
  Rng rng(5);
  LstmCell a = LstmCell::Random(2, 3, rng, 0.5);
  CHECK(a.w_x.cwiseAbs().maxCoeff() <= 0.5);
  LstmCell b = a;
  b.AddScaled(a, -1.0);
  CHECK(b.SquaredNorm() == 0.0);
  a.SetZero();
  CHECK(a.SquaredNorm() == 0.0);
  CHECK(a.hidden() == 3);
  CHECK(a.input_dim() == 2);
}
