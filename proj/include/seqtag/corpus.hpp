#ifndef SEQTAG_CORPUS_HPP_
#define SEQTAG_CORPUS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace seqtag {

using TagId = int;

// Label alphabet over entity classes: O first, then B-c, I-c per class in
// class order. Index of B-c is 1 + 2k and of I-c is 2 + 2k for class k.
class TagScheme {
 public:
  static constexpr TagId kOutside = 0;

  TagScheme() = default;
  explicit TagScheme(std::vector<std::string> classes);

  const std::vector<std::string>& classes() const { return classes_; }
  int num_classes() const { return static_cast<int>(classes_.size()); }
  int num_tags() const { return 2 * num_classes() + 1; }

  // Throws kValidation naming the tag when it is not in the alphabet.
  TagId Index(std::string_view tag) const;
  std::optional<TagId> Find(std::string_view tag) const;
  std::string Name(TagId id) const;

  static TagId Begin(int cls) { return 1 + 2 * cls; }
  static TagId Inside(int cls) { return 2 + 2 * cls; }
  static bool IsBegin(TagId id) { return id > 0 && id % 2 == 1; }
  static bool IsInside(TagId id) { return id > 0 && id % 2 == 0; }
  // Class index of a B/I tag, -1 for O.
  static int ClassOf(TagId id) { return id == kOutside ? -1 : (id - 1) / 2; }

  bool operator==(const TagScheme&) const = default;

 private:
  std::vector<std::string> classes_;
};

struct Token {
  std::string surface;
  std::optional<TagId> gold;
  std::optional<TagId> pred;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

struct Dataset {
  TagScheme scheme;
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  bool operator==(const Dataset&) const = default;
};

struct EntitySpan {
  int start = 0;  // inclusive
  int end = 0;    // exclusive
  int cls = 0;    // index into TagScheme::classes()

  auto operator<=>(const EntitySpan&) const = default;
};

struct ParseResult {
  Dataset data;
  // Gold sequences that are not valid BIO (I-c after O, at sentence start,
  // or after another class). They are kept as-is.
  std::vector<std::string> warnings;
};

// One token per line, `surface[<TAB>gold[<TAB>pred]]`, blank line between
// sentences. Lines ending in '\r' are accepted.
ParseResult ParseConll(std::string_view text, const TagScheme& scheme);
ParseResult ReadConllFile(const std::string& path, const TagScheme& scheme);

// Collects the entity classes used in the tag columns, in order of first
// appearance. Used when a scheme is not configured explicitly.
TagScheme InferScheme(std::string_view text);

// Emits gold and pred columns when present. A token with a prediction but
// no gold tag is written as `surface<TAB>pred`.
void WriteConll(const Dataset& data, std::ostream& out);
std::string FormatConll(const Dataset& data);
void WriteConllFile(const Dataset& data, const std::string& path);

// I-c after O, at sentence start, or after a tag of another class becomes
// B-c. Every other position is unchanged.
std::vector<TagId> RepairBio(std::span<const TagId> tags);
bool IsValidBio(std::span<const TagId> tags);

// One span per maximal B-c (I-c)* run. Throws kContract on an unrepaired
// sequence.
std::vector<EntitySpan> ExtractEntities(std::span<const TagId> tags);

// Inverse of ExtractEntities for a sentence of the given length.
std::vector<TagId> SpansToTags(std::span<const EntitySpan> spans, int length);

std::vector<TagId> GoldTags(const Sentence& s);
std::vector<TagId> PredTags(const Sentence& s);

// Sentence-level split. The first part holds ceil(ratio * N) sentences;
// both parts keep corpus order.
std::pair<Dataset, Dataset> SplitTrainValid(const Dataset& data, double ratio,
                                            std::uint64_t seed);

// Whitespace tokenization for untagged raw text, one sentence per line.
Dataset SplitWhitespace(std::string_view text, const TagScheme& scheme);

}  // namespace seqtag

#endif  // SEQTAG_CORPUS_HPP_
