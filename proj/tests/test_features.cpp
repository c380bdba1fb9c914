#include <doctest.h>

#include "seqtag/error.hpp"
#include "seqtag/features.hpp"

using namespace seqtag;

namespace {

Sentence Words(std::initializer_list<const char*> ws) {
  Sentence s;
  for (const char* w : ws) s.tokens.push_back({w, 0, {}});
  return s;
}

Dataset Corpus() {
  Dataset d;
  d.scheme = TagScheme({"drug"});
  d.sentences.push_back(Words({"Take", "Aspirin", "and", "aspirin", "40", "mg/day"}));
  d.sentences.push_back(Words({"IBUPROFEN", "b.i.d.", "x"}));
  return d;
}

// Offset of family f inside the 146-D vector.
int Offset(FeatureFamily f) {
  int off = 0;
  for (int i = 0; i < static_cast<int>(f); ++i) off += kFeatureDims[static_cast<std::size_t>(i)];
  return off;
}

}  // namespace

TEST_CASE("family dims add up to 146") {
  int total = 0;
  for (int d : kFeatureDims) total += d;
  CHECK(total == kFeatureDim);
  CHECK(kFeatureDim == 146);
}

TEST_CASE("every token encodes to 146-D") {
  const Dataset d = Corpus();
  const FeatureEncoder enc = FeatureEncoder::Build(d, 3);
  for (const Sentence& s : d.sentences)
    for (int t = 0; t < static_cast<int>(s.size()); ++t) CHECK(enc.Encode(s, t).size() == 146);
}

TEST_CASE("identical surfaces in identical positions give identical vectors") {
  const Dataset d = Corpus();
  const FeatureEncoder enc = FeatureEncoder::Build(d, 3);
  const Sentence a = Words({"x", "aspirin", "y"});
  const Sentence b = Words({"q", "aspirin", "r"});
  CHECK((enc.Encode(a, 1) - enc.Encode(b, 1)).norm() == 0.0);
}

TEST_CASE("case variants differ in the case family only") {
  const Dataset d = Corpus();
  const FeatureEncoder enc = FeatureEncoder::Build(d, 3);
  const Sentence s = Words({"Take", "Aspirin", "aspirin", "x"});
  const Eigen::VectorXd upper = enc.Encode(s, 1);
  const Eigen::VectorXd lower = enc.Encode(s, 2);
  const int case_dim = kFeatureDims[0];
  CHECK((upper.head(case_dim) - lower.head(case_dim)).norm() > 0.0);
  CHECK((upper.tail(kFeatureDim - case_dim) - lower.tail(kFeatureDim - case_dim)).norm() == 0.0);
}

TEST_CASE("extracted values") {
  const Sentence s = Words({"Aspirin", "IBUPROFEN", "40", "mg/day", "b.i.d.", "oxytetracycline", "%"});
  const TokenFeatures a = ExtractFeatures(s, 0);
  CHECK(a.prefix == "asp");
  CHECK(a.suffix == "rin");
  CHECK(a.length_bucket == 6);
  CHECK(ExtractFeatures(s, 5).length_bucket == 9);  // 10+
  CHECK(ExtractFeatures(s, 0).case_pattern != ExtractFeatures(s, 1).case_pattern);
  CHECK(ExtractFeatures(s, 2).composition != ExtractFeatures(s, 0).composition);
  CHECK(ExtractFeatures(s, 3).composition != ExtractFeatures(s, 4).composition);
  // Token class: word/number/mixed/symbol/abbreviation times position.
  CHECK(ExtractFeatures(s, 0).token_class / 4 == 0);
  CHECK(ExtractFeatures(s, 2).token_class / 4 == 1);
  CHECK(ExtractFeatures(s, 4).token_class / 4 == 4);
  CHECK(ExtractFeatures(s, 6).token_class / 4 == 3);
  CHECK(ExtractFeatures(s, 0).token_class % 4 == 0);
  CHECK(ExtractFeatures(s, 3).token_class % 4 == 1);
  CHECK(ExtractFeatures(s, 6).token_class % 4 == 2);
  CHECK(ExtractFeatures(Words({"solo"}), 0).token_class % 4 == 3);
  for (int t = 0; t < 7; ++t) {
    const TokenFeatures f = ExtractFeatures(s, t);
    CHECK(f.case_pattern < NumClosedValues(FeatureFamily::kCase));
    CHECK(f.composition < NumClosedValues(FeatureFamily::kComposition));
    CHECK(f.token_class < NumClosedValues(FeatureFamily::kTokenClass));
  }
  CHECK_THROWS_AS(ExtractFeatures(s, 7), Error);
}

TEST_CASE("affixes count code points, not bytes") {
  const TokenFeatures f = ExtractFeatures(Words({"Éclairé"}), 0);
  CHECK(f.prefix == "Écl");  // non-ASCII letters are kept as-is
  CHECK(f.suffix == "iré");
  CHECK(f.length_bucket == 6);
}

TEST_CASE("unseen affixes share the reserved row") {
  const Dataset d = Corpus();
  const FeatureEncoder enc = FeatureEncoder::Build(d, 3);
  const Sentence s = Words({"zzzqqq", "yyywww"});
  const auto a = enc.ValueIndices(s, 0);
  const auto b = enc.ValueIndices(s, 1);
  CHECK(a[static_cast<std::size_t>(FeatureFamily::kPrefix)] == 0);
  CHECK(b[static_cast<std::size_t>(FeatureFamily::kSuffix)] == 0);
  const int off = Offset(FeatureFamily::kPrefix);
  CHECK((enc.Encode(s, 0).segment(off, 40) - enc.Encode(s, 1).segment(off, 40)).norm() == 0.0);
}

TEST_CASE("tables are uniform in the given range and seed-deterministic") {
  const Dataset d = Corpus();
  const FeatureEncoder a = FeatureEncoder::Build(d, 3);
  const FeatureEncoder b = FeatureEncoder::Build(d, 3);
  const FeatureEncoder c = FeatureEncoder::Build(d, 4, 0.1);
  for (int f = 0; f < kNumFeatureFamilies; ++f) {
    const auto fam = static_cast<FeatureFamily>(f);
    CHECK(a.table(fam).rows() == kFeatureDims[static_cast<std::size_t>(f)]);
    CHECK((a.table(fam) - b.table(fam)).norm() == 0.0);
    CHECK(a.table(fam).cwiseAbs().maxCoeff() <= 1.0);
    CHECK(c.table(fam).cwiseAbs().maxCoeff() <= 0.1);
  }
  CHECK(a.table(FeatureFamily::kCase).cols() == NumClosedValues(FeatureFamily::kCase));
  CHECK(a.table(FeatureFamily::kPrefix).cols() == a.prefixes().size());
}

TEST_CASE("encoder restores from parts") {
  const Dataset d = Corpus();
  const FeatureEncoder a = FeatureEncoder::Build(d, 3);
  std::array<Eigen::MatrixXd, kNumFeatureFamilies> tables;
  for (int f = 0; f < kNumFeatureFamilies; ++f) tables[static_cast<std::size_t>(f)] = a.table(static_cast<FeatureFamily>(f));
  const FeatureEncoder b = FeatureEncoder::FromParts(a.prefixes(), a.suffixes(), tables);
  CHECK((a.Encode(d.sentences[0], 2) - b.Encode(d.sentences[0], 2)).norm() == 0.0);
  tables[0].resize(3, 3);
  CHECK_THROWS_AS(FeatureEncoder::FromParts(a.prefixes(), a.suffixes(), tables), Error);
}
