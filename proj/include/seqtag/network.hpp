#ifndef SEQTAG_NETWORK_HPP_
#define SEQTAG_NETWORK_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seqtag/corpus.hpp"
#include "seqtag/crf.hpp"
#include "seqtag/embeddings.hpp"
#include "seqtag/features.hpp"
#include "seqtag/lstm.hpp"

namespace seqtag {

enum class Variant { kCrf, kBlstm, kBlstmCrf };

std::string_view VariantName(Variant v);
Variant ParseVariant(std::string_view name);

struct NetworkShape {
  Variant variant = Variant::kBlstmCrf;
  int num_tags = 0;
  // Word-vector segment dims, one per embedding source. A single random
  // segment when no pretrained source is configured.
  std::vector<int> word_segments = {300};
  int char_dim = 25;
  int char_hidden = 25;
  int word_hidden = 100;
  bool use_char = true;
  bool use_features = false;

  int word_dim() const;
  bool neural() const { return variant != Variant::kCrf; }
  bool char_enabled() const { return neural() && use_char; }
  // Dimension of the concatenated token representation.
  int input_dim() const;
};

// Every trainable tensor plus the lookup tables that give them meaning.
struct Model {
  NetworkShape shape;
  std::uint64_t seed = 0;  // seeds random vectors of words unseen in training

  Vocabulary words;
  Eigen::MatrixXd word_table;  // d_w x |words|
  Vocabulary chars;
  Eigen::MatrixXd char_table;  // d_c x |chars|
  FeatureEncoder features;

  LstmCell char_fwd, char_bwd;
  LstmCell word_fwd, word_bwd;
  Eigen::MatrixXd projection;  // K x 2H_w
  crf::Parameters crf;         // emission weights are used by the CRF baseline only
};

// Mutable view of one parameter tensor, column-major.
struct TensorView {
  std::string name;
  double* data;
  long rows;
  long cols;

  long size() const { return rows * cols; }
};

// Tensors that take part in the configured variant, in a fixed order.
// Word and char tables of the CRF baseline are fixed inputs and excluded.
std::vector<TensorView> TrainableTensors(Model& model);
// Every stored tensor, trainable or not; the checkpoint payload.
std::vector<TensorView> AllTensors(Model& model);

struct Gradients {
  std::map<int, Eigen::VectorXd> word_rows;
  std::map<int, Eigen::VectorXd> char_rows;
  std::array<std::map<int, Eigen::VectorXd>, kNumFeatureFamilies> feature_rows;
  LstmCell char_fwd, char_bwd, word_fwd, word_bwd;
  Eigen::MatrixXd projection;
  Eigen::MatrixXd emission_weights;
  Eigen::MatrixXd transitions;

  static Gradients ZerosLike(const Model& model);
  double SquaredNorm() const;
  void Scale(double factor);
  // Dense copies aligned with TrainableTensors(model).
  std::vector<Eigen::MatrixXd> Dense(const Model& model) const;
};

struct InitOptions {
  // Weight range; the default draws everything from [-1, 1].
  double scale = 1.0;
  // When set, LSTM and projection ranges become sqrt(6 / (fan_in + fan_out)).
  bool glorot = false;
};

// Builds vocabularies from `vocab_sources` (training data first), draws
// random parameters, and fills the word table from `tables` when given.
Model InitModel(const NetworkShape& shape, const TagScheme& scheme,
                std::span<const Dataset* const> vocab_sources,
                std::span<const EmbeddingTable> tables, std::uint64_t seed,
                const InitOptions& init = {});

// Final forward state and final backward state of the character BiLSTM.
Eigen::VectorXd CharEmbed(const Model& model, std::string_view word);

// Word vector with exact, lowercased, then hashed-random fallback.
Eigen::VectorXd WordVector(const Model& model, std::string_view word);

enum class Mode { kTrain, kInfer };

// Concatenation of word vector, char embedding and features per the shape.
// Train mode applies inverted dropout seeded by (seed, position).
Eigen::VectorXd TokenRepresentation(const Model& model, const Sentence& sentence, int position,
                                    Mode mode, double dropout, std::uint64_t seed);

// Outputs of the word-level BiLSTM, [forward; backward] per column.
Eigen::MatrixXd BiLstm(const LstmCell& fwd, const LstmCell& bwd, const Eigen::MatrixXd& inputs);

// Unary scores per token (T x K).
crf::Lattice Emissions(const Model& model, const Sentence& sentence);

// T x K posteriors: softmax for the B-LSTM, CRF marginals otherwise.
Eigen::MatrixXd Posteriors(const Model& model, const Sentence& sentence);

// Repaired prediction: per-token argmax for the B-LSTM, Viterbi otherwise.
std::vector<TagId> Predict(const Model& model, const Sentence& sentence);

struct LossOptions {
  double dropout = 0.0;          // 0 disables
  std::uint64_t dropout_seed = 0;
  double l2 = 0.0;               // CRF baseline only
};

struct LossResult {
  double loss = 0.0;
  Gradients grads;
};

// Sum of token cross-entropies (B-LSTM) or CRF negative log-likelihood
// (B-LSTM-CRF, CRF baseline) with gradients for every trainable tensor.
LossResult LossAndGradients(const Model& model, const Sentence& sentence,
                            std::span<const TagId> gold, const LossOptions& options);

// model -= learning_rate * grads
void ApplyGradients(Model& model, const Gradients& grads, double learning_rate);

}  // namespace seqtag

#endif  // SEQTAG_NETWORK_HPP_
