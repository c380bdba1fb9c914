#ifndef SEQTAG_EMBEDDINGS_HPP_
#define SEQTAG_EMBEDDINGS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "seqtag/corpus.hpp"

namespace seqtag {

// Dense word index with a reserved unknown entry at 0.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr std::string_view kUnkWord = "<unk>";

  Vocabulary();

  // Adds a word if absent; returns its index.
  int Add(std::string_view word);
  std::optional<int> Find(std::string_view word) const;
  // Exact match, then lowercased match.
  std::optional<int> Lookup(std::string_view word) const;

  const std::string& word(int id) const { return words_[static_cast<std::size_t>(id)]; }
  const std::vector<std::string>& words() const { return words_; }
  int size() const { return static_cast<int>(words_.size()); }

  static Vocabulary FromDatasets(std::span<const Dataset* const> datasets);

  bool operator==(const Vocabulary& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

enum class Provenance : std::uint8_t { kRandom = 0, kPretrained = 1 };

// Word vectors stored column-wise: vectors.col(i) belongs to words[i].
struct EmbeddingTable {
  int dim = 0;
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;
  Eigen::MatrixXd vectors;
  std::vector<Provenance> provenance;

  int size() const { return static_cast<int>(words.size()); }
  const int* Find(std::string_view word) const;
  // Exact match, then lowercased match.
  const int* Lookup(std::string_view word) const;
};

struct CoverageStats {
  long total_words = 0;
  long covered = 0;
  double percentage = 0.0;  // ratio in [0, 1]
};

// `word v1 ... vd` per line, single spaces or tabs. Throws kFormat with the
// line number on inconsistent dimension or non-numeric components, and on
// an empty file.
EmbeddingTable ParseEmbeddingTable(std::string_view text);
EmbeddingTable LoadEmbeddingTable(const std::string& path);
std::string FormatEmbeddingTable(const EmbeddingTable& table);
void SaveEmbeddingTable(const EmbeddingTable& table, const std::string& path);

// Deterministic uniform [-1, 1] vector for (word, segment, seed). Used both
// for back-filling table segments and for words unseen at inference time.
Eigen::VectorXd RandomSegment(std::string_view word, int segment, std::uint64_t seed,
                              int dim);

// Concatenates one segment per table for every vocabulary word (the
// reserved unknown entry included). Missing segments are random.
// Provenance is pretrained when at least one segment was copied.
EmbeddingTable Assemble(const Vocabulary& vocab,
                        std::span<const EmbeddingTable> tables, std::uint64_t seed);

// Excludes the reserved unknown entry from the counts.
CoverageStats CoverageReport(const Vocabulary& vocab, const EmbeddingTable& table);

// --- pseudo-sentence corpus ---

using TokenizedCorpus = std::vector<std::vector<std::string>>;

struct CellRecord {
  std::string column;
  std::string text;
};

// One pseudo-sentence per non-empty cell: lowercased column-title tokens
// ('_' read as a separator) followed by the lowercased cell tokens.
TokenizedCorpus BuildPseudoCorpus(std::span<const CellRecord> records);

// RFC-4180 CSV: quoted fields, doubled quotes, embedded separators and
// newlines. Returns rows including the header.
std::vector<std::vector<std::string>> ParseCsv(std::string_view text);

// Manifest lines are `table_path<TAB>column_name`; relative table paths are
// resolved against the manifest's directory.
std::vector<CellRecord> ReadManifestCells(const std::string& manifest_path);

// --- GloVe ---

struct GloveParams {
  int dim = 300;
  int window = 10;
  double x_max = 100.0;
  double alpha = 0.75;
  double learning_rate = 0.05;
  int iterations = 50;
  int min_count = 1;
  std::uint64_t seed = 1;
  // >1 runs lock-free parallel updates; results are then not reproducible.
  int threads = 1;
};

struct CooccurrenceEntry {
  int row;
  int col;
  double value;
};

struct Cooccurrence {
  std::vector<std::string> words;
  std::vector<CooccurrenceEntry> entries;  // sorted by (row, col)

  double Count(std::string_view a, std::string_view b) const;
};

// Symmetric window counts weighted by 1/distance, within sentences.
Cooccurrence CountCooccurrences(const TokenizedCorpus& corpus, int window, int min_count);

struct GloveResult {
  EmbeddingTable table;            // word + context vectors
  std::vector<double> objective;   // weighted least-squares loss after each iteration
};

GloveResult TrainGlove(const TokenizedCorpus& corpus, const GloveParams& params);

// Reads one sentence per line, whitespace-tokenized.
TokenizedCorpus ParseTokenizedCorpus(std::string_view text);
std::string FormatTokenizedCorpus(const TokenizedCorpus& corpus);

}  // namespace seqtag

#endif  // SEQTAG_EMBEDDINGS_HPP_
