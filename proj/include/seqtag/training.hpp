#ifndef SEQTAG_TRAINING_HPP_
#define SEQTAG_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "seqtag/corpus.hpp"
#include "seqtag/network.hpp"

namespace seqtag {

struct TrainConfig {
  Variant variant = Variant::kBlstmCrf;
  std::vector<std::string> embeddings;  // pretrained table paths, concatenated in order
  bool use_char = true;
  bool use_features = false;
  int word_dim = 300;  // used only without pretrained tables
  int char_dim = 25;
  int word_hidden = 100;
  int char_hidden = 25;
  double learning_rate = 0.01;
  double dropout = 0.5;
  int epochs = 100;
  double split_ratio = 0.7;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;  // <= 0 disables
  double l2 = 1e-4;        // CRF baseline only
  std::string init = "uniform";  // or "glorot"
  double init_scale = 1.0;
  std::vector<std::string> classes;  // empty: inferred from the training file

  // Throws kConfig when a value is out of range.
  void Validate() const;
};

// Applies one `key = value` assignment. Unknown keys and unparsable values
// throw kConfig.
void SetConfigValue(TrainConfig& config, std::string_view key, std::string_view value);

// Flat `key = value` text; '#' starts a comment line.
TrainConfig ParseConfig(std::string_view text, TrainConfig base = {});
std::string FormatConfig(const TrainConfig& config);

struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  TrainConfig config;
  TagScheme scheme;
  Model model;
  int best_epoch = 0;  // 0-based
  std::vector<double> validation_f1;
};

struct EpochReport {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_f1 = 0.0;
};

using EpochCallback = std::function<void(const EpochReport&)>;

// Splits `train_data` into training and validation parts, runs the
// configured number of SGD epochs and keeps the epoch with the best
// validation F1 (earliest on ties). Words of `extra_vocab` (for example a
// test set) join the vocabulary so they receive table vectors.
Checkpoint Train(const TrainConfig& config, const Dataset& train_data,
                 const Dataset* extra_vocab = nullptr, const EpochCallback& on_epoch = {});

// Same, with tables already loaded (config.embeddings is ignored).
Checkpoint TrainWithTables(const TrainConfig& config, const Dataset& train_data,
                           std::span<const EmbeddingTable> tables, const Dataset* extra_vocab,
                           const EpochCallback& on_epoch);

// Fills pred tags. The dataset's scheme must equal the checkpoint's.
Dataset Tag(const Checkpoint& checkpoint, const Dataset& sentences);

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
Checkpoint DeserializeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace seqtag

#endif  // SEQTAG_TRAINING_HPP_
