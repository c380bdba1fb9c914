#ifndef SEQTAG_FEATURES_HPP_
#define SEQTAG_FEATURES_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "seqtag/corpus.hpp"
#include "seqtag/embeddings.hpp"

namespace seqtag {

// Hand-crafted token features. Every family maps its discrete value to a
// short trainable vector; the concatenation is 146-D with the default dims.
enum class FeatureFamily : int {
  kCase = 0,         // lower / upper / title / camel / ...
  kComposition = 1,  // letters, digits, hyphens, other punctuation
  kLength = 2,       // 1..9, 10+
  kPrefix = 3,       // lowercased first three characters
  kSuffix = 4,       // lowercased last three characters
  kTokenClass = 5,   // word/number/mixed/symbol/abbreviation x position
};

inline constexpr int kNumFeatureFamilies = 6;
inline constexpr std::array<int, kNumFeatureFamilies> kFeatureDims = {8, 8, 10, 40, 40, 40};
inline constexpr int kFeatureDim = 146;

std::string_view FeatureFamilyName(FeatureFamily f);

// Discrete values of one token in its sentence context. Prefix and suffix
// are strings; the rest are small integers.
struct TokenFeatures {
  int case_pattern = 0;
  int composition = 0;
  int length_bucket = 0;
  std::string prefix;
  std::string suffix;
  int token_class = 0;
};

TokenFeatures ExtractFeatures(const Sentence& sentence, int position);

int NumClosedValues(FeatureFamily f);

class FeatureEncoder {
 public:
  FeatureEncoder() = default;

  // Value vocabularies for prefix/suffix come from `data`; every table is
  // drawn uniformly from [-scale, scale].
  static FeatureEncoder Build(const Dataset& data, std::uint64_t seed, double scale = 1.0);

  // Row index into table(f) for the token's value of family f. Unseen
  // prefix/suffix values map to row 0.
  int ValueIndex(FeatureFamily f, const TokenFeatures& feats) const;
  std::array<int, kNumFeatureFamilies> ValueIndices(const Sentence& s, int position) const;

  Eigen::VectorXd Encode(const Sentence& s, int position) const;
  Eigen::VectorXd EncodeIndices(const std::array<int, kNumFeatureFamilies>& idx) const;

  // dim(f) x num_values(f), one column per value.
  Eigen::MatrixXd& table(FeatureFamily f) { return tables_[static_cast<std::size_t>(f)]; }
  const Eigen::MatrixXd& table(FeatureFamily f) const {
    return tables_[static_cast<std::size_t>(f)];
  }
  const Vocabulary& prefixes() const { return prefixes_; }
  const Vocabulary& suffixes() const { return suffixes_; }

  int total_dim() const { return kFeatureDim; }
  bool empty() const { return tables_[0].size() == 0; }

  // Restores an encoder from saved value lists and tables.
  static FeatureEncoder FromParts(Vocabulary prefixes, Vocabulary suffixes,
                                  std::array<Eigen::MatrixXd, kNumFeatureFamilies> tables);

 private:
  Vocabulary prefixes_;
  Vocabulary suffixes_;
  std::array<Eigen::MatrixXd, kNumFeatureFamilies> tables_;
};

}  // namespace seqtag

#endif  // SEQTAG_FEATURES_HPP_
