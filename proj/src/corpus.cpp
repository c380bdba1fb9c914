#include "seqtag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "io_util.hpp"
#include "seqtag/error.hpp"
#include "seqtag/random.hpp"

namespace seqtag {

TagScheme::TagScheme(std::vector<std::string> classes)
    : classes_(std::move(classes)) {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const std::string& c = classes_[i];
    if (c.empty()) Fail(ErrorKind::kValidation, "empty entity class name");
    for (char ch : c) {
      if (internal::IsSpace(ch) || ch == ',') {
        Fail(ErrorKind::kValidation, "invalid entity class name '" + c + "'");
      }
    }
    if (std::find(classes_.begin(), classes_.begin() + static_cast<long>(i),
                  c) != classes_.begin() + static_cast<long>(i)) {
      Fail(ErrorKind::kValidation, "duplicate entity class '" + c + "'");
    }
  }
}

std::optional<TagId> TagScheme::Find(std::string_view tag) const {
  if (tag == "O") return kOutside;
  if (tag.size() < 3 || tag[1] != '-') return std::nullopt;
  std::string_view cls = tag.substr(2);
  for (int k = 0; k < num_classes(); ++k) {
    if (classes_[static_cast<std::size_t>(k)] != cls) continue;
    if (tag[0] == 'B') return Begin(k);
    if (tag[0] == 'I') return Inside(k);
  }
  return std::nullopt;
}

TagId TagScheme::Index(std::string_view tag) const {
  if (auto id = Find(tag)) return *id;
  Fail(ErrorKind::kValidation, "unknown tag '" + std::string(tag) + "'");
}

std::string TagScheme::Name(TagId id) const {
  if (id < 0 || id >= num_tags()) {
    Fail(ErrorKind::kArgument, "tag index " + std::to_string(id) +
                                   " outside scheme of " +
                                   std::to_string(num_tags()) + " tags");
  }
  if (id == kOutside) return "O";
  const std::string& cls = classes_[static_cast<std::size_t>(ClassOf(id))];
  return (IsBegin(id) ? "B-" : "I-") + cls;
}

namespace {

std::string LineError(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

void FinishSentence(Sentence& current, std::size_t first_line,
                    ParseResult& result) {
  if (current.tokens.empty()) return;
  bool all_gold = std::all_of(current.tokens.begin(), current.tokens.end(),
                              [](const Token& t) { return t.gold.has_value(); });
  if (all_gold) {
    std::vector<TagId> gold = GoldTags(current);
    if (!IsValidBio(gold)) {
      result.warnings.push_back(LineError(
          first_line, "gold tags of sentence " +
                          std::to_string(result.data.sentences.size()) +
                          " are not valid BIO"));
    }
  }
  result.data.sentences.push_back(std::move(current));
  current = Sentence{};
}

}  // namespace

ParseResult ParseConll(std::string_view text, const TagScheme& scheme) {
  ParseResult result;
  result.data.scheme = scheme;
  Sentence current;
  std::size_t first_line = 0;
  auto lines = internal::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = lines[i];
    if (internal::Trim(line).empty()) {
      FinishSentence(current, first_line, result);
      continue;
    }
    auto cols = internal::SplitOn(line, '\t');
    if (cols.size() > 3) {
      Fail(ErrorKind::kParse,
           LineError(lineno, "expected 1 to 3 tab-separated columns, got " +
                                 std::to_string(cols.size())));
    }
    Token tok;
    tok.surface = std::string(cols[0]);
    if (tok.surface.empty() ||
        std::any_of(tok.surface.begin(), tok.surface.end(), internal::IsSpace)) {
      Fail(ErrorKind::kParse,
           LineError(lineno, "token surface must be non-empty and contain no "
                             "whitespace; wrong column count?"));
    }
    try {
      if (cols.size() >= 2) tok.gold = scheme.Index(cols[1]);
      if (cols.size() == 3) tok.pred = scheme.Index(cols[2]);
    } catch (const Error& e) {
      Fail(ErrorKind::kValidation, LineError(lineno, e.what()));
    }
    if (current.tokens.empty()) first_line = lineno;
    current.tokens.push_back(std::move(tok));
  }
  FinishSentence(current, first_line, result);
  return result;
}

ParseResult ReadConllFile(const std::string& path, const TagScheme& scheme) {
  return ParseConll(internal::ReadFile(path), scheme);
}

TagScheme InferScheme(std::string_view text) {
  std::vector<std::string> classes;
  auto lines = internal::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto cols = internal::SplitOn(lines[i], '\t');
    for (std::size_t c = 1; c < cols.size() && c < 3; ++c) {
      std::string_view tag = cols[c];
      if (tag == "O") continue;
      if (tag.size() < 3 || tag[1] != '-' || (tag[0] != 'B' && tag[0] != 'I')) {
        Fail(ErrorKind::kValidation,
             LineError(i + 1, "unknown tag '" + std::string(tag) + "'"));
      }
      std::string cls(tag.substr(2));
      if (std::find(classes.begin(), classes.end(), cls) == classes.end()) {
        classes.push_back(std::move(cls));
      }
    }
  }
  return TagScheme(std::move(classes));
}

void WriteConll(const Dataset& data, std::ostream& out) {
  const TagScheme& scheme = data.scheme;
  for (const Sentence& s : data.sentences) {
    for (const Token& t : s.tokens) {
      out << t.surface;
      if (t.gold) out << '\t' << scheme.Name(*t.gold);
      if (t.pred) out << '\t' << scheme.Name(*t.pred);
      out << '\n';
    }
    out << '\n';
  }
}

std::string FormatConll(const Dataset& data) {
  std::ostringstream ss;
  WriteConll(data, ss);
  return ss.str();
}

void WriteConllFile(const Dataset& data, const std::string& path) {
  internal::WriteFile(path, FormatConll(data));
}

namespace {

bool NeedsRepair(TagId prev, TagId tag) {
  if (!TagScheme::IsInside(tag)) return false;
  return TagScheme::ClassOf(prev) != TagScheme::ClassOf(tag);
}

}  // namespace

std::vector<TagId> RepairBio(std::span<const TagId> tags) {
  std::vector<TagId> out(tags.begin(), tags.end());
  TagId prev = TagScheme::kOutside;
  for (TagId& t : out) {
    if (NeedsRepair(prev, t)) t = TagScheme::Begin(TagScheme::ClassOf(t));
    prev = t;
  }
  return out;
}

bool IsValidBio(std::span<const TagId> tags) {
  TagId prev = TagScheme::kOutside;
  for (TagId t : tags) {
    if (NeedsRepair(prev, t)) return false;
    prev = t;
  }
  return true;
}

std::vector<EntitySpan> ExtractEntities(std::span<const TagId> tags) {
  std::vector<EntitySpan> spans;
  const int n = static_cast<int>(tags.size());
  int t = 0;
  while (t < n) {
    TagId tag = tags[static_cast<std::size_t>(t)];
    if (tag == TagScheme::kOutside) {
      ++t;
      continue;
    }
    if (!TagScheme::IsBegin(tag)) {
      Fail(ErrorKind::kContract, "I tag without opening B at position " +
                                     std::to_string(t) +
                                     "; repair the sequence first");
    }
    const int cls = TagScheme::ClassOf(tag);
    int end = t + 1;
    while (end < n && tags[static_cast<std::size_t>(end)] == TagScheme::Inside(cls)) {
      ++end;
    }
    spans.push_back({t, end, cls});
    t = end;
  }
  return spans;
}

std::vector<TagId> SpansToTags(std::span<const EntitySpan> spans, int length) {
  std::vector<TagId> tags(static_cast<std::size_t>(length), TagScheme::kOutside);
  for (const EntitySpan& s : spans) {
    if (s.start < 0 || s.start >= s.end || s.end > length) {
      Fail(ErrorKind::kArgument, "span out of range");
    }
    tags[static_cast<std::size_t>(s.start)] = TagScheme::Begin(s.cls);
    for (int i = s.start + 1; i < s.end; ++i) {
      tags[static_cast<std::size_t>(i)] = TagScheme::Inside(s.cls);
    }
  }
  return tags;
}

std::vector<TagId> GoldTags(const Sentence& s) {
  std::vector<TagId> tags;
  tags.reserve(s.size());
  for (const Token& t : s.tokens) {
    if (!t.gold) Fail(ErrorKind::kValidation, "token '" + t.surface + "' has no gold tag");
    tags.push_back(*t.gold);
  }
  return tags;
}

std::vector<TagId> PredTags(const Sentence& s) {
  std::vector<TagId> tags;
  tags.reserve(s.size());
  for (const Token& t : s.tokens) {
    if (!t.pred) Fail(ErrorKind::kValidation, "token '" + t.surface + "' has no predicted tag");
    tags.push_back(*t.pred);
  }
  return tags;
}

std::pair<Dataset, Dataset> SplitTrainValid(const Dataset& data, double ratio,
                                            std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    Fail(ErrorKind::kArgument, "split ratio must lie in (0, 1)");
  }
  if (data.empty()) Fail(ErrorKind::kArgument, "cannot split an empty dataset");
  const std::size_t n = data.size();
  // The epsilon keeps 0.7 * 10 from rounding up to 8.
  auto first = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(n) - 1e-9));
  first = std::min(first, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(MixSeed(seed, 0x73706c6974ULL));
  Shuffle(order, rng);
  std::sort(order.begin(), order.begin() + static_cast<long>(first));
  std::sort(order.begin() + static_cast<long>(first), order.end());

  Dataset a{data.scheme, {}}, b{data.scheme, {}};
  a.sentences.reserve(first);
  b.sentences.reserve(n - first);
  for (std::size_t i = 0; i < n; ++i) {
    (i < first ? a : b).sentences.push_back(data.sentences[order[i]]);
  }
  return {std::move(a), std::move(b)};
}

Dataset SplitWhitespace(std::string_view text, const TagScheme& scheme) {
  Dataset data{scheme, {}};
  for (std::string_view line : internal::SplitLines(text)) {
    auto words = internal::SplitWhitespaceView(line);
    if (words.empty()) continue;
    Sentence s;
    for (std::string_view w : words) s.tokens.push_back({std::string(w), {}, {}});
    data.sentences.push_back(std::move(s));
  }
  return data;
}

}  // namespace seqtag
