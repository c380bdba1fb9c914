// Independent reference computations for tests.
#ifndef SEQTAG_TESTS_ORACLES_HPP_
#define SEQTAG_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqtag/random.hpp"

namespace oracle {

// Every length-T sequence over K tags, in lexicographic order.
inline std::vector<std::vector<int>> AllSequences(int T, int K) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(T), 0);
  while (true) {
    out.push_back(cur);
    int i = T - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == K - 1) cur[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
  }
  return out;
}

// Score written directly from the definition: start transition, emissions,
// pairwise transitions, stop transition.
inline double Score(const Eigen::MatrixXd& trans, const Eigen::MatrixXd& em, const std::vector<int>& y) {
  const int K = static_cast<int>(em.cols());
  double s = trans(K, y.front()) + trans(y.back(), K);
  for (std::size_t t = 0; t < y.size(); ++t) {
    s += em(static_cast<long>(t), y[t]);
    if (t > 0) s += trans(y[t - 1], y[t]);
  }
  return s;
}

struct BruteForce {
  double best_score;
  std::vector<int> best;  // first maximiser in lexicographic order
  double log_z;
};

inline BruteForce Enumerate(const Eigen::MatrixXd& trans, const Eigen::MatrixXd& em) {
  const auto seqs = AllSequences(static_cast<int>(em.rows()), static_cast<int>(em.cols()));
  std::vector<double> scores;
  BruteForce r{-std::numeric_limits<double>::infinity(), {}, 0.0};
  for (const auto& y : seqs) {
    const double s = Score(trans, em, y);
    scores.push_back(s);
    if (s > r.best_score) {
      r.best_score = s;
      r.best = y;
    }
  }
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - r.best_score);
  r.log_z = r.best_score + std::log(acc);
  return r;
}

inline Eigen::MatrixXd RandomMatrix(long rows, long cols, seqtag::Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) m(i, j) = rng.Uniform(-scale, scale);
  return m;
}

// |a - n| / max(|a|, |n|, floor). A central difference with step 1e-5 on a
// loss of order 1-10 carries rounding noise near 1e-10, so coordinates
// below the floor are compared on an absolute scale of floor * tolerance.
inline constexpr double kGradientFloor = 1e-5;

inline double RelativeError(double analytic, double numeric, double floor = kGradientFloor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// Central difference of f at coordinate *x.
inline double CentralDifference(double* x, double step, const std::function<double()>& f) {
  const double saved = *x;
  *x = saved + step;
  const double plus = f();
  *x = saved - step;
  const double minus = f();
  *x = saved;
  return (plus - minus) / (2.0 * step);
}

struct GradCheck {
  double worst = 0.0;
  std::string where;
  long coordinates = 0;
};

}  // namespace oracle

#endif  // SEQTAG_TESTS_ORACLES_HPP_
