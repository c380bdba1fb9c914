#include "seqtag/crf.hpp"

#include <cmath>
#include <limits>

#include "seqtag/error.hpp"

namespace seqtag::crf {

namespace {

void CheckShapes(const Eigen::MatrixXd& transitions, const Lattice& emissions) {
  if (transitions.rows() != transitions.cols() || transitions.rows() < 2) {
    Fail(ErrorKind::kArgument, "transition matrix must be (K+1) x (K+1)");
  }
  if (emissions.cols() != transitions.rows() - 1) {
    Fail(ErrorKind::kArgument, "emission width does not match transition size");
  }
  if (emissions.rows() < 1) Fail(ErrorKind::kArgument, "empty lattice");
}

double LogSumExp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// alpha(t, y): log-sum of prefix scores ending in y at t, emission included.
Eigen::MatrixXd Forward(const Eigen::MatrixXd& trans, const Lattice& em) {
  const int t_len = static_cast<int>(em.rows());
  const int k = static_cast<int>(em.cols());
  Eigen::MatrixXd alpha(t_len, k);
  const auto inner = trans.topLeftCorner(k, k);
  alpha.row(0) = trans.row(StartState(k)).head(k) + em.row(0);
  Eigen::VectorXd scratch(k);
  for (int t = 1; t < t_len; ++t) {
    for (int y = 0; y < k; ++y) {
      scratch = alpha.row(t - 1).transpose() + inner.col(y);
      alpha(t, y) = LogSumExp(scratch) + em(t, y);
    }
  }
  return alpha;
}

// beta(t, y): log-sum of suffix scores after position t given y at t,
// stop transition included, emission at t excluded.
Eigen::MatrixXd Backward(const Eigen::MatrixXd& trans, const Lattice& em) {
  const int t_len = static_cast<int>(em.rows());
  const int k = static_cast<int>(em.cols());
  Eigen::MatrixXd beta(t_len, k);
  const auto inner = trans.topLeftCorner(k, k);
  beta.row(t_len - 1) = trans.col(StopState(k)).head(k).transpose();
  Eigen::VectorXd scratch(k);
  for (int t = t_len - 2; t >= 0; --t) {
    for (int y = 0; y < k; ++y) {
      scratch = inner.row(y).transpose() + em.row(t + 1).transpose() + beta.row(t + 1).transpose();
      beta(t, y) = LogSumExp(scratch);
    }
  }
  return beta;
}

double LogZFromAlpha(const Eigen::MatrixXd& trans, const Eigen::MatrixXd& alpha) {
  const int k = static_cast<int>(alpha.cols());
  Eigen::VectorXd last = alpha.row(alpha.rows() - 1).transpose() + trans.col(StopState(k)).head(k);
  return LogSumExp(last);
}

}  // namespace

Parameters ZeroParameters(int num_tags, int input_dim) {
  return {Eigen::MatrixXd::Zero(num_tags, input_dim),
          Eigen::MatrixXd::Zero(num_tags + 1, num_tags + 1)};
}

Lattice Emissions(const Parameters& params, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != params.emission_weights.cols()) {
    Fail(ErrorKind::kArgument, "input dimension does not match emission weights");
  }
  return (params.emission_weights * inputs).transpose();
}

double SequenceScore(const Eigen::MatrixXd& trans, const Lattice& em,
                     std::span<const TagId> tags) {
  CheckShapes(trans, em);
  const int k = static_cast<int>(em.cols());
  if (static_cast<long>(tags.size()) != em.rows()) {
    Fail(ErrorKind::kArgument, "tag sequence length " + std::to_string(tags.size()) +
                                   " does not match lattice length " +
                                   std::to_string(em.rows()));
  }
  int prev = StartState(k);
  double score = 0.0;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const int y = tags[t];
    if (y < 0 || y >= k) Fail(ErrorKind::kArgument, "tag index out of range");
    score += trans(prev, y) + em(static_cast<long>(t), y);
    prev = y;
  }
  return score + trans(prev, StopState(k));
}

double LogPartition(const Eigen::MatrixXd& trans, const Lattice& em) {
  CheckShapes(trans, em);
  return LogZFromAlpha(trans, Forward(trans, em));
}

Lattice Marginals(const Eigen::MatrixXd& trans, const Lattice& em) {
  CheckShapes(trans, em);
  Eigen::MatrixXd alpha = Forward(trans, em);
  Eigen::MatrixXd beta = Backward(trans, em);
  const double log_z = LogZFromAlpha(trans, alpha);
  return (alpha + beta).array().unaryExpr([log_z](double v) { return std::exp(v - log_z); });
}

NllGradient NllAndGradient(const Eigen::MatrixXd& trans, const Lattice& em,
                           std::span<const TagId> gold) {
  CheckShapes(trans, em);
  const int t_len = static_cast<int>(em.rows());
  const int k = static_cast<int>(em.cols());
  const double gold_score = SequenceScore(trans, em, gold);

  Eigen::MatrixXd alpha = Forward(trans, em);
  Eigen::MatrixXd beta = Backward(trans, em);
  const double log_z = LogZFromAlpha(trans, alpha);

  NllGradient out;
  out.nll = log_z - gold_score;
  out.d_emissions = (alpha + beta).array().unaryExpr([log_z](double v) { return std::exp(v - log_z); });
  out.d_transitions = Eigen::MatrixXd::Zero(k + 1, k + 1);

  // Start and stop transitions.
  out.d_transitions.row(StartState(k)).head(k) += out.d_emissions.row(0);
  out.d_transitions.col(StopState(k)).head(k) += out.d_emissions.row(t_len - 1).transpose();
  // Pairwise marginals.
  for (int t = 1; t < t_len; ++t) {
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        out.d_transitions(a, b) +=
            std::exp(alpha(t - 1, a) + trans(a, b) + em(t, b) + beta(t, b) - log_z);
      }
    }
  }
  // Observed counts.
  int prev = StartState(k);
  for (int t = 0; t < t_len; ++t) {
    const int y = gold[static_cast<std::size_t>(t)];
    out.d_emissions(t, y) -= 1.0;
    out.d_transitions(prev, y) -= 1.0;
    prev = y;
  }
  out.d_transitions(prev, StopState(k)) -= 1.0;
  return out;
}

std::vector<TagId> Viterbi(const Eigen::MatrixXd& trans, const Lattice& em) {
  CheckShapes(trans, em);
  const int t_len = static_cast<int>(em.rows());
  const int k = static_cast<int>(em.cols());
  // Best suffix scores are computed right to left so that a single left to
  // right greedy pass, taking the smallest index among equal candidates,
  // yields the lexicographically smallest optimum.
  Eigen::MatrixXd best(t_len, k);
  Eigen::MatrixXi next(t_len, k);
  for (int y = 0; y < k; ++y) best(t_len - 1, y) = trans(y, StopState(k));
  for (int t = t_len - 2; t >= 0; --t) {
    for (int y = 0; y < k; ++y) {
      double top = -std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int z = 0; z < k; ++z) {
        const double v = trans(y, z) + em(t + 1, z) + best(t + 1, z);
        if (v > top) {
          top = v;
          arg = z;
        }
      }
      best(t, y) = top;
      next(t, y) = arg;
    }
  }
  std::vector<TagId> path(static_cast<std::size_t>(t_len));
  double top = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < k; ++y) {
    const double v = trans(StartState(k), y) + em(0, y) + best(0, y);
    if (v > top) {
      top = v;
      path[0] = y;
    }
  }
  for (int t = 1; t < t_len; ++t) {
    path[static_cast<std::size_t>(t)] = next(t - 1, path[static_cast<std::size_t>(t - 1)]);
  }
  return path;
}

}  // namespace seqtag::crf
