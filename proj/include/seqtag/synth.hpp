#ifndef SEQTAG_SYNTH_HPP_
#define SEQTAG_SYNTH_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "seqtag/corpus.hpp"

namespace seqtag::synth {

// Parameters of a generated NER corpus. Entity words are drawn from
// per-class lexicons and filler words from a separate lexicon; lexicons are
// generated from class-specific word shapes unless given explicitly.
struct SynthSpec {
  std::vector<std::string> classes = {"drug", "brand", "group"};
  std::map<std::string, std::vector<std::string>> lexicons;  // optional, per class
  std::vector<std::string> filler;                          // optional
  int lexicon_size = 40;   // generated words per class
  int filler_size = 200;   // generated filler words
  int min_length = 6;
  int max_length = 14;
  double density = 0.2;    // chance that a free position opens an entity
  int train_sentences = 200;
  int test_sentences = 50;
  // Fraction of test entity words taken from the part of each lexicon that
  // also appears in training; the rest come from a held-out part.
  double test_overlap = 0.9;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Flat `key = value` text. Keys: classes, lexicon.<class>, filler,
// lexicon_size, filler_size, min_length, max_length, density,
// train_sentences, test_sentences, test_overlap, seed.
SynthSpec ParseSynthSpec(std::string_view text);

struct Corpus {
  Dataset train;
  Dataset test;
  // Lexicons actually used, for scans of generated data.
  std::map<std::string, std::vector<std::string>> lexicons;
  std::vector<std::string> filler;
};

// Entity lengths: 60% one word, 30% two, 10% three. Entities never touch,
// so every gold sequence is valid BIO.
Corpus Generate(const SynthSpec& spec);

}  // namespace seqtag::synth

#endif  // SEQTAG_SYNTH_HPP_
