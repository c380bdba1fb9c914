#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "seqtag/crf.hpp"
#include "seqtag/error.hpp"

using namespace seqtag;

namespace {

struct Instance {
  Eigen::MatrixXd trans;
  crf::Lattice em;
};

Instance RandomInstance(Rng& rng, int T, int K, double scale = 2.0) {
  return {oracle::RandomMatrix(K + 1, K + 1, rng, scale), oracle::RandomMatrix(T, K, rng, scale)};
}

}  // namespace

TEST_CASE("zero parameters score every sequence 0") {
  const Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(4, 4);
  const crf::Lattice em = crf::Lattice::Zero(3, 3);
  for (const auto& y : oracle::AllSequences(3, 3)) CHECK(crf::SequenceScore(trans, em, y) == 0.0);
}

TEST_CASE("T=1 with zero transitions scores the emission") {
  Rng rng(2);
  const crf::Lattice em = oracle::RandomMatrix(1, 3, rng);
  const Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(4, 4);
  for (int k = 0; k < 3; ++k) CHECK(crf::SequenceScore(trans, em, std::vector<TagId>{k}) == em(0, k));
}

TEST_CASE("sequence score equals hand-summed factors") {
  Rng rng(3);
  Instance in = RandomInstance(rng, 3, 3);
  const std::vector<TagId> y{2, 0, 1};
  const double hand = in.trans(3, 2) + in.em(0, 2) + in.trans(2, 0) + in.em(1, 0) + in.trans(0, 1) +
                      in.em(2, 1) + in.trans(1, 3);
  CHECK(crf::SequenceScore(in.trans, in.em, y) == doctest::Approx(hand).epsilon(1e-15));
}

TEST_CASE("sequence score rejects length mismatch") {
  const Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(3, 3);
  const crf::Lattice em = crf::Lattice::Zero(3, 2);
  CHECK_THROWS_AS(crf::SequenceScore(trans, em, std::vector<TagId>{0, 1}), Error);
  CHECK_THROWS_AS(crf::NllAndGradient(trans, em, std::vector<TagId>{0}), Error);
}

TEST_CASE("zero parameters: log partition log 9 and NLL 2 log 3") {
  const Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(4, 4);
  const crf::Lattice em = crf::Lattice::Zero(2, 3);
  CHECK(crf::LogPartition(trans, em) == doctest::Approx(std::log(9.0)).epsilon(1e-15));
  CHECK(crf::NllAndGradient(trans, em, std::vector<TagId>{1, 2}).nll ==
        doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-15));
}

TEST_CASE("T=1 log partition reduces to a single logsumexp") {
  Rng rng(4);
  Instance in = RandomInstance(rng, 1, 3);
  double acc = 0.0;
  for (int k = 0; k < 3; ++k) acc += std::exp(in.trans(3, k) + in.em(0, k) + in.trans(k, 3));
  CHECK(crf::LogPartition(in.trans, in.em) == doctest::Approx(std::log(acc)).epsilon(1e-14));
}

TEST_CASE("log partition and viterbi match enumeration on random small instances") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = 1 + static_cast<int>(rng.Below(5));
    const int K = 1 + static_cast<int>(rng.Below(4));
    Instance in = RandomInstance(rng, T, K);
    const oracle::BruteForce bf = oracle::Enumerate(in.trans, in.em);
    CHECK(std::abs(crf::LogPartition(in.trans, in.em) - bf.log_z) < 1e-8);
    const std::vector<TagId> v = crf::Viterbi(in.trans, in.em);
    CHECK(std::abs(crf::SequenceScore(in.trans, in.em, v) - bf.best_score) < 1e-9);
  }
}

TEST_CASE("viterbi breaks exact ties towards the smallest tag sequence") {
  const Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(5, 5);
  const crf::Lattice em = crf::Lattice::Zero(4, 4);
  for (TagId t : crf::Viterbi(trans, em)) CHECK(t == 0);
  // Integer-valued instances create many exact ties.
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd tr(4, 4);
    crf::Lattice e(4, 3);
    for (long i = 0; i < tr.size(); ++i) tr(i) = static_cast<double>(rng.Below(3));
    for (long i = 0; i < e.size(); ++i) e(i) = static_cast<double>(rng.Below(3));
    const oracle::BruteForce bf = oracle::Enumerate(tr, e);
    const std::vector<TagId> v = crf::Viterbi(tr, e);
    CHECK(v == std::vector<TagId>(bf.best.begin(), bf.best.end()));
  }
}

TEST_CASE("viterbi with zero transitions is the per-token argmax") {
  Rng rng(7);
  const crf::Lattice em = oracle::RandomMatrix(6, 4, rng);
  const std::vector<TagId> v = crf::Viterbi(Eigen::MatrixXd::Zero(5, 5), em);
  for (int t = 0; t < 6; ++t) {
    Eigen::Index best;
    em.row(t).maxCoeff(&best);
    CHECK(v[static_cast<std::size_t>(t)] == best);
  }
}

TEST_CASE("sequence probabilities sum to one and never exceed the partition") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 1 + static_cast<int>(rng.Below(4));
    const int K = 1 + static_cast<int>(rng.Below(3));
    Instance in = RandomInstance(rng, T, K);
    const double log_z = crf::LogPartition(in.trans, in.em);
    double total = 0.0;
    for (const auto& y : oracle::AllSequences(T, K)) {
      const double s = crf::SequenceScore(in.trans, in.em, y);
      if (K > 1) CHECK(s < log_z);
      else CHECK(std::abs(s - log_z) < 1e-12);
      total += std::exp(s - log_z);
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("viterbi beats 1000 random sequences") {
  Rng rng(9);
  Instance in = RandomInstance(rng, 12, 5);
  const double best = crf::SequenceScore(in.trans, in.em, crf::Viterbi(in.trans, in.em));
  for (int i = 0; i < 1000; ++i) {
    std::vector<TagId> y(12);
    for (auto& t : y) t = static_cast<TagId>(rng.Below(5));
    CHECK(crf::SequenceScore(in.trans, in.em, y) <= best);
  }
}

TEST_CASE("shifting one emission row shifts every score and keeps the argmax") {
  Rng rng(10);
  Instance in = RandomInstance(rng, 5, 3);
  crf::Lattice shifted = in.em;
  shifted.row(2).array() += 3.25;
  CHECK(crf::LogPartition(in.trans, shifted) ==
        doctest::Approx(crf::LogPartition(in.trans, in.em) + 3.25).epsilon(1e-14));
  const std::vector<TagId> y{0, 2, 1, 1, 0};
  CHECK(crf::SequenceScore(in.trans, shifted, y) ==
        doctest::Approx(crf::SequenceScore(in.trans, in.em, y) + 3.25).epsilon(1e-14));
  CHECK(crf::Viterbi(in.trans, shifted) == crf::Viterbi(in.trans, in.em));
}

TEST_CASE("log-space recursions survive long sequences") {
  Rng rng(11);
  Instance in = RandomInstance(rng, 400, 5, 30.0);
  const double z = crf::LogPartition(in.trans, in.em);
  CHECK(std::isfinite(z));
  const crf::Lattice m = crf::Marginals(in.trans, in.em);
  CHECK(m.allFinite());
  CHECK(std::abs(m.row(200).sum() - 1.0) < 1e-9);
}

TEST_CASE("NLL gradient matches finite differences") {
  Rng rng(12);
  Instance in = RandomInstance(rng, 4, 3, 1.0);
  const std::vector<TagId> gold{0, 2, 2, 1};
  const crf::NllGradient g = crf::NllAndGradient(in.trans, in.em, gold);
  auto nll = [&] { return crf::NllAndGradient(in.trans, in.em, gold).nll; };
  for (long i = 0; i < in.trans.size(); ++i) {
    if (i == in.trans.size() - 1) continue;  // unused (start, stop) entry
    CHECK(oracle::RelativeError(g.d_transitions(i),
                                oracle::CentralDifference(in.trans.data() + i, 1e-5, nll)) < 1e-4);
  }
  for (long i = 0; i < in.em.size(); ++i) {
    CHECK(oracle::RelativeError(g.d_emissions(i), oracle::CentralDifference(in.em.data() + i, 1e-5, nll)) <
          1e-4);
  }
}

TEST_CASE("transition gradient equals enumerated expected minus observed counts") {
  Rng rng(13);
  Instance in = RandomInstance(rng, 3, 3);
  const std::vector<int> gold{1, 1, 0};
  const int K = 3;
  const double log_z = oracle::Enumerate(in.trans, in.em).log_z;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(K + 1, K + 1);
  auto add_counts = [&](const std::vector<int>& y, double w, Eigen::MatrixXd& into) {
    into(K, y.front()) += w;
    into(y.back(), K) += w;
    for (std::size_t t = 1; t < y.size(); ++t) into(y[t - 1], y[t]) += w;
  };
  for (const auto& y : oracle::AllSequences(3, K)) {
    add_counts(y, std::exp(oracle::Score(in.trans, in.em, y) - log_z), expected);
  }
  Eigen::MatrixXd observed = Eigen::MatrixXd::Zero(K + 1, K + 1);
  add_counts(gold, 1.0, observed);
  const crf::NllGradient g = crf::NllAndGradient(in.trans, in.em, std::vector<TagId>(gold.begin(), gold.end()));
  CHECK((g.d_transitions - (expected - observed)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("marginals match enumeration") {
  Rng rng(14);
  Instance in = RandomInstance(rng, 4, 3);
  const double log_z = oracle::Enumerate(in.trans, in.em).log_z;
  crf::Lattice expected = crf::Lattice::Zero(4, 3);
  for (const auto& y : oracle::AllSequences(4, 3)) {
    const double p = std::exp(oracle::Score(in.trans, in.em, y) - log_z);
    for (int t = 0; t < 4; ++t) expected(t, y[static_cast<std::size_t>(t)]) += p;
  }
  CHECK((crf::Marginals(in.trans, in.em) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("emissions apply the weight matrix column-wise") {
  Rng rng(15);
  crf::Parameters p = crf::ZeroParameters(3, 4);
  CHECK(p.transitions.rows() == 4);
  p.emission_weights = oracle::RandomMatrix(3, 4, rng);
  const Eigen::MatrixXd x = oracle::RandomMatrix(4, 5, rng);
  const crf::Lattice e = crf::Emissions(p, x);
  REQUIRE(e.rows() == 5);
  CHECK((e - (p.emission_weights * x).transpose()).norm() < 1e-14);
}
