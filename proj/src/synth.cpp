#include "seqtag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "io_util.hpp"
#include "seqtag/error.hpp"
#include "seqtag/random.hpp"

namespace seqtag::synth {

namespace {

// Word shapes per class slot; slots beyond the table reuse it with a
// numbered suffix so lexicons stay disjoint.
struct Shape {
  std::vector<std::string> suffixes;
  bool capitalized;
};

const std::vector<Shape>& Shapes() {
  static const std::vector<Shape> shapes = {
      {{"mycin", "cillin", "azole", "pril", "olol"}, false},
      {{"ex", "ax", "ium", "ora"}, true},
      {{"ides", "ates", "ines", "ants"}, false},
      {{"ase", "itis", "oma", "osis"}, false},
      {{"gen", "zyme", "phyte"}, true},
  };
  return shapes;
}

const char* const kEntityOnsets[] = {"b", "d", "f", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
const char* const kEntityVowels[] = {"a", "e", "i", "o", "u"};
const char* const kFillerOnsets[] = {"h", "w", "th", "sh", "g", "c", "j", "y"};
const char* const kFillerVowels[] = {"a", "e", "i", "o", "u", "ea", "oo"};

template <std::size_t N>
const char* Pick(const char* const (&items)[N], Rng& rng) {
  return items[rng.Below(N)];
}

std::string Syllables(Rng& rng, int count, bool filler) {
  std::string w;
  for (int i = 0; i < count; ++i) {
    w += filler ? Pick(kFillerOnsets, rng) : Pick(kEntityOnsets, rng);
    w += filler ? Pick(kFillerVowels, rng) : Pick(kEntityVowels, rng);
  }
  return w;
}

std::vector<std::string> MakeLexicon(int slot, int size, Rng& rng, std::set<std::string>& used) {
  const auto& shapes = Shapes();
  const Shape& shape = shapes[static_cast<std::size_t>(slot) % shapes.size()];
  const int round = slot / static_cast<int>(shapes.size());
  std::vector<std::string> words;
  int attempts = 0;
  while (static_cast<int>(words.size()) < size) {
    if (++attempts > size * 1000) Fail(ErrorKind::kArgument, "cannot generate enough distinct entity words");
    std::string w = Syllables(rng, 2 + static_cast<int>(rng.Below(2)), false);
    w += shape.suffixes[rng.Below(shape.suffixes.size())];
    if (round > 0) w += std::to_string(round);
    if (shape.capitalized) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (used.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

std::vector<std::string> MakeFiller(int size, Rng& rng, std::set<std::string>& used) {
  std::vector<std::string> words;
  int attempts = 0;
  while (static_cast<int>(words.size()) < size) {
    if (++attempts > size * 1000) Fail(ErrorKind::kArgument, "cannot generate enough distinct filler words");
    std::string w = Syllables(rng, 1 + static_cast<int>(rng.Below(2)), true);
    if (used.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

int EntityLength(Rng& rng) {
  const double u = rng.Unit();
  return u < 0.6 ? 1 : u < 0.9 ? 2 : 3;
}

struct Pools {
  std::vector<std::vector<std::string>> seen;
  std::vector<std::vector<std::string>> held_out;
};

Sentence MakeSentence(const SynthSpec& spec, const Pools& pools, const std::vector<std::string>& filler,
                      bool test, Rng& rng) {
  const int length = spec.min_length + static_cast<int>(rng.Below(
                                           static_cast<std::uint64_t>(spec.max_length - spec.min_length + 1)));
  Sentence s;
  int pos = 0;
  auto add_filler = [&] {
    s.tokens.push_back({filler[rng.Below(filler.size())], TagScheme::kOutside, {}});
    ++pos;
  };
  while (pos < length) {
    if (spec.density > 0.0 && rng.Unit() < spec.density) {
      const int n = EntityLength(rng);
      const int cls = static_cast<int>(rng.Below(spec.classes.size()));
      if (pos + n <= length) {
        for (int i = 0; i < n; ++i) {
          const auto c = static_cast<std::size_t>(cls);
          const bool novel = test && !pools.held_out[c].empty() && rng.Unit() >= spec.test_overlap;
          const auto& pool = novel ? pools.held_out[c] : pools.seen[c];
          s.tokens.push_back({pool[rng.Below(pool.size())],
                              i == 0 ? TagScheme::Begin(cls) : TagScheme::Inside(cls),
                              {}});
        }
        pos += n;
        if (pos < length) add_filler();
        continue;
      }
    }
    add_filler();
  }
  return s;
}

}  // namespace

void SynthSpec::Validate() const {
  auto bad = [](const std::string& what) { Fail(ErrorKind::kConfig, "synth spec: " + what); };
  if (classes.empty()) bad("at least one class is required");
  if (!(density >= 0.0 && density < 1.0)) bad("density must lie in [0, 1)");
  if (min_length < 1 || max_length < min_length) bad("invalid sentence length range");
  if (train_sentences < 0 || test_sentences < 0) bad("corpus sizes must be >= 0");
  if (lexicon_size < 1 || filler_size < 1) bad("lexicon sizes must be >= 1");
  if (!(test_overlap >= 0.0 && test_overlap <= 1.0)) bad("test_overlap must lie in [0, 1]");
  std::set<std::string> seen;
  auto check = [&](const std::vector<std::string>& words, const std::string& owner) {
    for (const std::string& w : words) {
      if (w.empty() || std::any_of(w.begin(), w.end(), internal::IsSpace)) bad("invalid word in " + owner);
      if (!seen.insert(w).second) bad("lexicons are not disjoint ('" + w + "')");
    }
  };
  for (const auto& [cls, words] : lexicons) {
    if (std::find(classes.begin(), classes.end(), cls) == classes.end()) {
      bad("lexicon for unknown class '" + cls + "'");
    }
    if (words.empty()) bad("empty lexicon for '" + cls + "'");
    check(words, "lexicon." + cls);
  }
  check(filler, "filler");
}

SynthSpec ParseSynthSpec(std::string_view text) {
  SynthSpec spec;
  auto words = [](std::string_view v) {
    std::vector<std::string> out;
    for (auto p : internal::SplitOn(v, ',')) {
      auto t = internal::Trim(p);
      if (!t.empty()) out.emplace_back(t);
    }
    return out;
  };
  auto lines = internal::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = internal::Trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    const std::string where = "synth spec line " + std::to_string(i + 1);
    if (eq == std::string_view::npos) Fail(ErrorKind::kConfig, where + ": expected key = value");
    const std::string key(internal::Trim(line.substr(0, eq)));
    const std::string_view value = internal::Trim(line.substr(eq + 1));
    auto num = [&](auto& out) {
      double v;
      if (!internal::ParseDouble(value, v)) Fail(ErrorKind::kConfig, where + ": bad number for " + key);
      out = static_cast<std::remove_reference_t<decltype(out)>>(v);
    };
    if (key == "classes") spec.classes = words(value);
    else if (key.rfind("lexicon.", 0) == 0) spec.lexicons[key.substr(8)] = words(value);
    else if (key == "filler") spec.filler = words(value);
    else if (key == "lexicon_size") num(spec.lexicon_size);
    else if (key == "filler_size") num(spec.filler_size);
    else if (key == "min_length") num(spec.min_length);
    else if (key == "max_length") num(spec.max_length);
    else if (key == "density") num(spec.density);
    else if (key == "train_sentences") num(spec.train_sentences);
    else if (key == "test_sentences") num(spec.test_sentences);
    else if (key == "test_overlap") num(spec.test_overlap);
    else if (key == "seed") num(spec.seed);
    else Fail(ErrorKind::kConfig, where + ": unknown key '" + key + "'");
  }
  spec.Validate();
  return spec;
}

Corpus Generate(const SynthSpec& spec) {
  spec.Validate();
  Rng lex_rng(MixSeed(spec.seed, 0x6c657869636f6eULL));
  std::set<std::string> used;
  for (const auto& [cls, words] : spec.lexicons) used.insert(words.begin(), words.end());
  used.insert(spec.filler.begin(), spec.filler.end());

  Corpus out;
  Pools pools;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    auto it = spec.lexicons.find(spec.classes[c]);
    std::vector<std::string> lex = it != spec.lexicons.end()
                                       ? it->second
                                       : MakeLexicon(static_cast<int>(c), spec.lexicon_size, lex_rng, used);
    out.lexicons[spec.classes[c]] = lex;
    // The last fifth of each lexicon never appears in training.
    const std::size_t held = lex.size() >= 5 ? lex.size() / 5 : 0;
    pools.seen.emplace_back(lex.begin(), lex.end() - static_cast<long>(held));
    pools.held_out.emplace_back(lex.end() - static_cast<long>(held), lex.end());
  }
  out.filler = spec.filler.empty() ? MakeFiller(spec.filler_size, lex_rng, used) : spec.filler;

  const TagScheme scheme(spec.classes);
  out.train.scheme = scheme;
  out.test.scheme = scheme;
  Rng train_rng(MixSeed(spec.seed, 0x747261696eULL));
  for (int i = 0; i < spec.train_sentences; ++i) {
    out.train.sentences.push_back(MakeSentence(spec, pools, out.filler, false, train_rng));
  }
  Rng test_rng(MixSeed(spec.seed, 0x74657374ULL));
  for (int i = 0; i < spec.test_sentences; ++i) {
    out.test.sentences.push_back(MakeSentence(spec, pools, out.filler, true, test_rng));
  }
  return out;
}

}  // namespace seqtag::synth
