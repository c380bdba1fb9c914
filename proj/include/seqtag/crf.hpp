#ifndef SEQTAG_CRF_HPP_
#define SEQTAG_CRF_HPP_

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "seqtag/corpus.hpp"

namespace seqtag::crf {

// T x K unary scores; row t holds the scores of every tag at position t.
using Lattice = Eigen::MatrixXd;

// Transition matrix layout for K tags: (K+1) x (K+1), entry (a, b) scores
// tag a followed by tag b. Row K is the virtual start state and column K
// the virtual stop state; entry (K, K) is unused.
inline int StartState(int num_tags) { return num_tags; }
inline int StopState(int num_tags) { return num_tags; }

struct Parameters {
  Eigen::MatrixXd emission_weights;  // K x D, acts on per-token input vectors
  Eigen::MatrixXd transitions;       // (K+1) x (K+1)

  int num_tags() const { return static_cast<int>(transitions.rows()) - 1; }
};

Parameters ZeroParameters(int num_tags, int input_dim);

// Emissions for inputs stored column-wise (D x T).
Lattice Emissions(const Parameters& params, const Eigen::MatrixXd& inputs);

// Unnormalized log score of a tag sequence.
double SequenceScore(const Eigen::MatrixXd& transitions, const Lattice& emissions,
                     std::span<const TagId> tags);

// log of the sum of exp(SequenceScore) over every tag sequence.
double LogPartition(const Eigen::MatrixXd& transitions, const Lattice& emissions);

struct NllGradient {
  double nll = 0.0;
  Eigen::MatrixXd d_transitions;  // (K+1) x (K+1)
  Lattice d_emissions;            // T x K
};

// Conditional negative log-likelihood of the gold sequence and its
// gradient, as expected minus observed sufficient statistics.
NllGradient NllAndGradient(const Eigen::MatrixXd& transitions, const Lattice& emissions,
                           std::span<const TagId> gold);

// Highest-scoring sequence; among exact ties the lexicographically smallest
// tag-index sequence.
std::vector<TagId> Viterbi(const Eigen::MatrixXd& transitions, const Lattice& emissions);

// Per-position tag marginals (T x K).
Lattice Marginals(const Eigen::MatrixXd& transitions, const Lattice& emissions);

}  // namespace seqtag::crf

#endif  // SEQTAG_CRF_HPP_
