// Generated corpus in which each "twin" pair of words shares one context
// distribution, so a co-occurrence model should place twins together.
#ifndef SEQTAG_TESTS_TWINS_HPP_
#define SEQTAG_TESTS_TWINS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqtag/embeddings.hpp"
#include "seqtag/random.hpp"

namespace twins {

struct TwinCorpus {
  seqtag::TokenizedCorpus corpus;
  std::vector<std::pair<std::string, std::string>> pairs;
};

// `pairs` twin pairs; each pair has its own topic, a skewed distribution
// over `contexts` shared context words. A sentence is one twin (either
// member, uniformly) surrounded by words from its topic.
inline TwinCorpus Generate(int pairs, int contexts, int sentences, std::uint64_t seed) {
  seqtag::Rng rng(seed);
  TwinCorpus out;
  std::vector<std::vector<double>> cdf(static_cast<std::size_t>(pairs));
  for (int p = 0; p < pairs; ++p) {
    out.pairs.emplace_back("twin" + std::to_string(p) + "a", "twin" + std::to_string(p) + "b");
    double acc = 0.0;
    for (int c = 0; c < contexts; ++c) {
      acc += std::pow(rng.Unit(), 4.0);
      cdf[static_cast<std::size_t>(p)].push_back(acc);
    }
    for (double& v : cdf[static_cast<std::size_t>(p)]) v /= acc;
  }
  auto draw = [&](int p) {
    const auto& c = cdf[static_cast<std::size_t>(p)];
    const double u = rng.Unit();
    std::size_t k = 0;
    while (k + 1 < c.size() && c[k] < u) ++k;
    return "ctx" + std::to_string(k);
  };
  for (int s = 0; s < sentences; ++s) {
    const int p = static_cast<int>(rng.Below(static_cast<std::uint64_t>(pairs)));
    const auto& pr = out.pairs[static_cast<std::size_t>(p)];
    std::vector<std::string> sent;
    for (int i = 0; i < 4; ++i) sent.push_back(draw(p));
    sent.push_back(rng.Below(2) ? pr.first : pr.second);
    for (int i = 0; i < 4; ++i) sent.push_back(draw(p));
    out.corpus.push_back(std::move(sent));
  }
  return out;
}

inline double Cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b) / (a.norm() * b.norm());
}

// Fraction of other vocabulary words r with cos(w, r) < cos(w, partner).
inline double PartnerRank(const seqtag::EmbeddingTable& t, const std::string& w, const std::string& partner) {
  const Eigen::VectorXd v = t.vectors.col(*t.Find(w));
  const double target = Cosine(v, t.vectors.col(*t.Find(partner)));
  int beaten = 0, others = 0;
  for (int i = 0; i < t.size(); ++i) {
    const std::string& r = t.words[static_cast<std::size_t>(i)];
    if (r == w || r == partner) continue;
    ++others;
    if (Cosine(v, t.vectors.col(i)) < target) ++beaten;
  }
  return others == 0 ? 1.0 : static_cast<double>(beaten) / others;
}

}  // namespace twins

#endif  // SEQTAG_TESTS_TWINS_HPP_
