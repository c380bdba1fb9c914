#include "seqtag/features.hpp"

#include "io_util.hpp"
#include "seqtag/error.hpp"
#include "seqtag/random.hpp"

namespace seqtag {

namespace {

bool IsUpper(char c) { return c >= 'A' && c <= 'Z'; }
bool IsLower(char c) { return c >= 'a' && c <= 'z'; }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }
// Non-ASCII bytes are counted as letters.
bool IsLetter(char c) { return IsUpper(c) || IsLower(c) || static_cast<unsigned char>(c) >= 0x80; }

int CasePattern(std::string_view w) {
  int upper = 0, lower = 0, letters = 0;
  for (char c : w) {
    if (IsUpper(c)) ++upper;
    if (IsLower(c)) ++lower;
    if (IsLetter(c)) ++letters;
  }
  if (letters == 0) return 0;
  if (upper == 0) return 1;
  if (lower == 0) return upper == 1 ? 4 : 2;
  char first = 0;
  for (char c : w) {
    if (IsLetter(c)) {
      first = c;
      break;
    }
  }
  if (IsLower(first)) return 5;
  return upper == 1 ? 3 : 6;
}

int Composition(std::string_view w) {
  bool letter = false, digit = false, hyphen = false, slash = false, dotcomma = false,
       other = false;
  for (char c : w) {
    if (IsLetter(c)) letter = true;
    else if (IsDigit(c)) digit = true;
    else if (c == '-') hyphen = true;
    else if (c == '/') slash = true;
    else if (c == '.' || c == ',') dotcomma = true;
    else other = true;
  }
  const bool punct = hyphen || slash || dotcomma || other;
  if (!punct) {
    if (letter && !digit) return 0;
    if (digit && !letter) return 1;
    return 2;
  }
  if (!letter && !digit) return 6;
  if (hyphen) return 3;
  if (slash) return 4;
  if (dotcomma) return 5;
  return 7;
}

int BaseClass(std::string_view w) {
  bool letter = false, digit = false, period = false, other = false;
  for (char c : w) {
    if (IsLetter(c)) letter = true;
    else if (IsDigit(c)) digit = true;
    else if (c == '.') period = true;
    else if (c != ',' && c != '-') other = true;
  }
  if (!letter && !digit) return 3;             // symbol
  if (!letter) return 1;                       // number
  if (digit) return 2;                         // mixed
  if (period && !other) return 4;              // abbreviation
  return 0;                                    // word
}

std::string Affix(std::string_view w, bool prefix) {
  auto chars = internal::Utf8Chars(w);
  const std::size_t n = std::min<std::size_t>(3, chars.size());
  std::string out;
  const std::size_t begin = prefix ? 0 : chars.size() - n;
  for (std::size_t i = begin; i < begin + n; ++i) out += chars[i];
  return internal::AsciiLower(out);
}

Eigen::MatrixXd RandomTable(int rows, int cols, Rng& rng, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.Uniform(-scale, scale);
  }
  return m;
}

}  // namespace

std::string_view FeatureFamilyName(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::kCase: return "case";
    case FeatureFamily::kComposition: return "composition";
    case FeatureFamily::kLength: return "length";
    case FeatureFamily::kPrefix: return "prefix";
    case FeatureFamily::kSuffix: return "suffix";
    case FeatureFamily::kTokenClass: return "token_class";
  }
  return "?";
}

int NumClosedValues(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::kCase: return 7;
    case FeatureFamily::kComposition: return 8;
    case FeatureFamily::kLength: return 10;
    case FeatureFamily::kTokenClass: return 20;
    default: return 0;
  }
}

TokenFeatures ExtractFeatures(const Sentence& sentence, int position) {
  if (position < 0 || position >= static_cast<int>(sentence.size())) {
    Fail(ErrorKind::kArgument, "feature position out of range");
  }
  const std::string& w = sentence.tokens[static_cast<std::size_t>(position)].surface;
  TokenFeatures f;
  f.case_pattern = CasePattern(w);
  f.composition = Composition(w);
  const auto len = static_cast<int>(internal::Utf8Chars(w).size());
  f.length_bucket = std::min(len, 10) - 1;
  f.prefix = Affix(w, true);
  f.suffix = Affix(w, false);
  const int n = static_cast<int>(sentence.size());
  const int where = n == 1 ? 3 : position == 0 ? 0 : position == n - 1 ? 2 : 1;
  f.token_class = BaseClass(w) * 4 + where;
  return f;
}

FeatureEncoder FeatureEncoder::Build(const Dataset& data, std::uint64_t seed, double scale) {
  FeatureEncoder enc;
  for (const Sentence& s : data.sentences) {
    for (int t = 0; t < static_cast<int>(s.size()); ++t) {
      TokenFeatures f = ExtractFeatures(s, t);
      enc.prefixes_.Add(f.prefix);
      enc.suffixes_.Add(f.suffix);
    }
  }
  Rng rng(MixSeed(seed, 0x6665617475726573ULL));
  for (int k = 0; k < kNumFeatureFamilies; ++k) {
    const auto f = static_cast<FeatureFamily>(k);
    int values = NumClosedValues(f);
    if (f == FeatureFamily::kPrefix) values = enc.prefixes_.size();
    if (f == FeatureFamily::kSuffix) values = enc.suffixes_.size();
    enc.tables_[static_cast<std::size_t>(k)] =
        RandomTable(kFeatureDims[static_cast<std::size_t>(k)], values, rng, scale);
  }
  return enc;
}

FeatureEncoder FeatureEncoder::FromParts(Vocabulary prefixes, Vocabulary suffixes,
                                         std::array<Eigen::MatrixXd, kNumFeatureFamilies> tables) {
  FeatureEncoder enc;
  enc.prefixes_ = std::move(prefixes);
  enc.suffixes_ = std::move(suffixes);
  enc.tables_ = std::move(tables);
  for (int k = 0; k < kNumFeatureFamilies; ++k) {
    const auto f = static_cast<FeatureFamily>(k);
    int values = NumClosedValues(f);
    if (f == FeatureFamily::kPrefix) values = enc.prefixes_.size();
    if (f == FeatureFamily::kSuffix) values = enc.suffixes_.size();
    const Eigen::MatrixXd& t = enc.tables_[static_cast<std::size_t>(k)];
    if (t.rows() != kFeatureDims[static_cast<std::size_t>(k)] || t.cols() != values) {
      Fail(ErrorKind::kFormat, "feature table '" + std::string(FeatureFamilyName(f)) +
                                   "' has inconsistent shape");
    }
  }
  return enc;
}

int FeatureEncoder::ValueIndex(FeatureFamily f, const TokenFeatures& v) const {
  switch (f) {
    case FeatureFamily::kCase: return v.case_pattern;
    case FeatureFamily::kComposition: return v.composition;
    case FeatureFamily::kLength: return v.length_bucket;
    case FeatureFamily::kPrefix: return prefixes_.Find(v.prefix).value_or(Vocabulary::kUnk);
    case FeatureFamily::kSuffix: return suffixes_.Find(v.suffix).value_or(Vocabulary::kUnk);
    case FeatureFamily::kTokenClass: return v.token_class;
  }
  return 0;
}

std::array<int, kNumFeatureFamilies> FeatureEncoder::ValueIndices(const Sentence& s,
                                                                  int position) const {
  TokenFeatures v = ExtractFeatures(s, position);
  std::array<int, kNumFeatureFamilies> idx{};
  for (int k = 0; k < kNumFeatureFamilies; ++k) {
    idx[static_cast<std::size_t>(k)] = ValueIndex(static_cast<FeatureFamily>(k), v);
  }
  return idx;
}

Eigen::VectorXd FeatureEncoder::EncodeIndices(const std::array<int, kNumFeatureFamilies>& idx) const {
  Eigen::VectorXd out(kFeatureDim);
  int offset = 0;
  for (int k = 0; k < kNumFeatureFamilies; ++k) {
    const int d = kFeatureDims[static_cast<std::size_t>(k)];
    out.segment(offset, d) = tables_[static_cast<std::size_t>(k)].col(idx[static_cast<std::size_t>(k)]);
    offset += d;
  }
  return out;
}

Eigen::VectorXd FeatureEncoder::Encode(const Sentence& s, int position) const {
  return EncodeIndices(ValueIndices(s, position));
}

}  // namespace seqtag
