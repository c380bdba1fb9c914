#include "seqtag/network.hpp"

#include <cmath>
#include <numeric>

#include "io_util.hpp"
#include "seqtag/error.hpp"
#include "seqtag/random.hpp"

namespace seqtag {

std::string_view VariantName(Variant v) {
  switch (v) {
    case Variant::kCrf: return "crf";
    case Variant::kBlstm: return "blstm";
    case Variant::kBlstmCrf: return "blstm_crf";
  }
  return "?";
}

Variant ParseVariant(std::string_view name) {
  if (name == "crf") return Variant::kCrf;
  if (name == "blstm") return Variant::kBlstm;
  if (name == "blstm_crf") return Variant::kBlstmCrf;
  Fail(ErrorKind::kConfig, "unknown variant '" + std::string(name) +
                               "' (expected crf, blstm or blstm_crf)");
}

int NetworkShape::word_dim() const {
  return std::accumulate(word_segments.begin(), word_segments.end(), 0);
}

int NetworkShape::input_dim() const {
  int d = word_dim();
  if (char_enabled()) d += 2 * char_hidden;
  if (use_features) d += kFeatureDim;
  return d;
}

namespace {

constexpr std::uint64_t kDropoutSalt = 0x64726f706f7574ULL;

Eigen::MatrixXd RandomMatrix(long rows, long cols, Rng& rng, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long i = 0; i < rows; ++i) m(i, j) = rng.Uniform(-scale, scale);
  }
  return m;
}

double GlorotRange(long fan_in, long fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

std::vector<int> CharIds(const Model& model, std::string_view word) {
  std::vector<int> ids;
  for (std::string_view ch : internal::Utf8Chars(word)) {
    ids.push_back(model.chars.Find(ch).value_or(Vocabulary::kUnk));
  }
  return ids;
}

Eigen::MatrixXd CharInputs(const Model& model, const std::vector<int>& ids) {
  Eigen::MatrixXd x(model.shape.char_dim, static_cast<long>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) x.col(static_cast<long>(j)) = model.char_table.col(ids[j]);
  return x;
}

Eigen::VectorXd DropoutMask(int dim, double rate, std::uint64_t seed, int position) {
  Rng rng(MixSeed(MixSeed(seed, kDropoutSalt), static_cast<std::uint64_t>(position)));
  const double keep_scale = 1.0 / (1.0 - rate);
  Eigen::VectorXd m(dim);
  for (int k = 0; k < dim; ++k) m[k] = rng.Unit() < rate ? 0.0 : keep_scale;
  return m;
}

// Everything the backward pass needs from one forward pass.
struct Forward {
  int length = 0;
  std::vector<int> word_ids;  // -1 when the word has no table row
  std::vector<std::vector<int>> char_ids;
  std::vector<std::array<int, kNumFeatureFamilies>> feature_ids;
  std::vector<LstmTrace> char_fwd, char_bwd;
  Eigen::MatrixXd mask;  // D x T, empty without dropout
  Eigen::MatrixXd inputs;  // after dropout
  LstmTrace word_fwd, word_bwd;
  Eigen::MatrixXd hidden;  // 2H x T
  crf::Lattice emissions;
};

Forward RunForward(const Model& model, const Sentence& sentence, double dropout,
                   std::uint64_t dropout_seed) {
  const NetworkShape& shape = model.shape;
  Forward f;
  f.length = static_cast<int>(sentence.size());
  if (f.length == 0) Fail(ErrorKind::kArgument, "empty sentence");
  const int d = shape.input_dim();
  const int dw = shape.word_dim();
  f.inputs.resize(d, f.length);
  for (int t = 0; t < f.length; ++t) {
    const std::string& w = sentence.tokens[static_cast<std::size_t>(t)].surface;
    auto id = model.words.Lookup(w);
    f.word_ids.push_back(id ? *id : -1);
    f.inputs.col(t).head(dw) = id ? Eigen::VectorXd(model.word_table.col(*id)) : WordVector(model, w);
    int offset = dw;
    if (shape.char_enabled()) {
      f.char_ids.push_back(CharIds(model, w));
      Eigen::MatrixXd cx = CharInputs(model, f.char_ids.back());
      f.char_fwd.push_back(RunLstm(model.char_fwd, cx, false));
      f.char_bwd.push_back(RunLstm(model.char_bwd, cx, true));
      const long n = cx.cols();
      f.inputs.col(t).segment(offset, shape.char_hidden) = f.char_fwd.back().hidden.col(n - 1);
      f.inputs.col(t).segment(offset + shape.char_hidden, shape.char_hidden) =
          f.char_bwd.back().hidden.col(0);
      offset += 2 * shape.char_hidden;
    }
    if (shape.use_features) {
      f.feature_ids.push_back(model.features.ValueIndices(sentence, t));
      f.inputs.col(t).segment(offset, kFeatureDim) = model.features.EncodeIndices(f.feature_ids.back());
    }
  }
  if (dropout > 0.0) {
    f.mask.resize(d, f.length);
    for (int t = 0; t < f.length; ++t) f.mask.col(t) = DropoutMask(d, dropout, dropout_seed, t);
    f.inputs.array() *= f.mask.array();
  }
  if (shape.neural()) {
    f.word_fwd = RunLstm(model.word_fwd, f.inputs, false);
    f.word_bwd = RunLstm(model.word_bwd, f.inputs, true);
    f.hidden.resize(2 * shape.word_hidden, f.length);
    f.hidden.topRows(shape.word_hidden) = f.word_fwd.hidden;
    f.hidden.bottomRows(shape.word_hidden) = f.word_bwd.hidden;
    f.emissions = (model.projection * f.hidden).transpose();
  } else {
    f.emissions = crf::Emissions(model.crf, f.inputs);
  }
  return f;
}

void AddRow(std::map<int, Eigen::VectorXd>& rows, int id, const Eigen::VectorXd& g) {
  auto it = rows.find(id);
  if (it == rows.end()) {
    rows.emplace(id, g);
  } else {
    it->second += g;
  }
}

void Backward(const Model& model, const Forward& f, const crf::Lattice& d_emissions,
              Gradients& g) {
  const NetworkShape& shape = model.shape;
  Eigen::MatrixXd d_inputs;
  if (shape.neural()) {
    g.projection.noalias() += d_emissions.transpose() * f.hidden.transpose();
    Eigen::MatrixXd d_hidden = model.projection.transpose() * d_emissions.transpose();
    d_inputs = BackpropLstm(model.word_fwd, f.word_fwd, d_hidden.topRows(shape.word_hidden),
                            g.word_fwd);
    d_inputs += BackpropLstm(model.word_bwd, f.word_bwd, d_hidden.bottomRows(shape.word_hidden),
                             g.word_bwd);
  } else {
    g.emission_weights.noalias() += d_emissions.transpose() * f.inputs.transpose();
    return;  // inputs of the CRF baseline are fixed
  }
  if (f.mask.size() != 0) d_inputs.array() *= f.mask.array();

  const int dw = shape.word_dim();
  for (int t = 0; t < f.length; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    if (f.word_ids[tt] >= 0) AddRow(g.word_rows, f.word_ids[tt], d_inputs.col(t).head(dw));
    int offset = dw;
    if (shape.char_enabled()) {
      const int hc = shape.char_hidden;
      const long n = f.char_fwd[tt].length();
      Eigen::MatrixXd dh_f = Eigen::MatrixXd::Zero(hc, n);
      Eigen::MatrixXd dh_b = Eigen::MatrixXd::Zero(hc, n);
      dh_f.col(n - 1) = d_inputs.col(t).segment(offset, hc);
      dh_b.col(0) = d_inputs.col(t).segment(offset + hc, hc);
      Eigen::MatrixXd d_chars = BackpropLstm(model.char_fwd, f.char_fwd[tt], dh_f, g.char_fwd);
      d_chars += BackpropLstm(model.char_bwd, f.char_bwd[tt], dh_b, g.char_bwd);
      for (long j = 0; j < n; ++j) AddRow(g.char_rows, f.char_ids[tt][static_cast<std::size_t>(j)], d_chars.col(j));
      offset += 2 * hc;
    }
    if (shape.use_features) {
      for (int k = 0; k < kNumFeatureFamilies; ++k) {
        const int dim = kFeatureDims[static_cast<std::size_t>(k)];
        AddRow(g.feature_rows[static_cast<std::size_t>(k)],
               f.feature_ids[tt][static_cast<std::size_t>(k)], d_inputs.col(t).segment(offset, dim));
        offset += dim;
      }
    }
  }
}

void PushCell(std::vector<TensorView>& out, const std::string& prefix, LstmCell& c) {
  out.push_back({prefix + ".w_x", c.w_x.data(), c.w_x.rows(), c.w_x.cols()});
  out.push_back({prefix + ".w_h", c.w_h.data(), c.w_h.rows(), c.w_h.cols()});
  out.push_back({prefix + ".peep_input", c.peep_input.data(), c.peep_input.size(), 1});
  out.push_back({prefix + ".peep_output", c.peep_output.data(), c.peep_output.size(), 1});
  out.push_back({prefix + ".bias", c.bias.data(), c.bias.size(), 1});
}

TensorView View(const std::string& name, Eigen::MatrixXd& m) {
  return {name, m.data(), m.rows(), m.cols()};
}

std::vector<TensorView> Tensors(Model& m, bool trainable_only) {
  std::vector<TensorView> out;
  const NetworkShape& s = m.shape;
  const bool neural = s.neural();
  if (neural || !trainable_only) out.push_back(View("word_table", m.word_table));
  if (s.char_enabled()) out.push_back(View("char_table", m.char_table));
  if (s.use_features && (neural || !trainable_only)) {
    for (int k = 0; k < kNumFeatureFamilies; ++k) {
      const auto f = static_cast<FeatureFamily>(k);
      out.push_back(View("feature." + std::string(FeatureFamilyName(f)), m.features.table(f)));
    }
  }
  if (s.char_enabled()) {
    PushCell(out, "char_fwd", m.char_fwd);
    PushCell(out, "char_bwd", m.char_bwd);
  }
  if (neural) {
    PushCell(out, "word_fwd", m.word_fwd);
    PushCell(out, "word_bwd", m.word_bwd);
    out.push_back(View("projection", m.projection));
  } else {
    out.push_back(View("crf.emission_weights", m.crf.emission_weights));
  }
  if (s.variant != Variant::kBlstm) out.push_back(View("crf.transitions", m.crf.transitions));
  return out;
}

}  // namespace

std::vector<TensorView> TrainableTensors(Model& model) { return Tensors(model, true); }
std::vector<TensorView> AllTensors(Model& model) { return Tensors(model, false); }

Gradients Gradients::ZerosLike(const Model& m) {
  Gradients g;
  auto zero_cell = [](const LstmCell& c) {
    LstmCell z = c;
    z.SetZero();
    return z;
  };
  g.char_fwd = zero_cell(m.char_fwd);
  g.char_bwd = zero_cell(m.char_bwd);
  g.word_fwd = zero_cell(m.word_fwd);
  g.word_bwd = zero_cell(m.word_bwd);
  g.projection = Eigen::MatrixXd::Zero(m.projection.rows(), m.projection.cols());
  g.emission_weights =
      Eigen::MatrixXd::Zero(m.crf.emission_weights.rows(), m.crf.emission_weights.cols());
  g.transitions = Eigen::MatrixXd::Zero(m.crf.transitions.rows(), m.crf.transitions.cols());
  return g;
}

double Gradients::SquaredNorm() const {
  double total = char_fwd.SquaredNorm() + char_bwd.SquaredNorm() + word_fwd.SquaredNorm() +
                 word_bwd.SquaredNorm() + projection.squaredNorm() +
                 emission_weights.squaredNorm() + transitions.squaredNorm();
  for (const auto& [id, v] : word_rows) total += v.squaredNorm();
  for (const auto& [id, v] : char_rows) total += v.squaredNorm();
  for (const auto& fam : feature_rows) {
    for (const auto& [id, v] : fam) total += v.squaredNorm();
  }
  return total;
}

void Gradients::Scale(double factor) {
  for (LstmCell* c : {&char_fwd, &char_bwd, &word_fwd, &word_bwd}) {
    c->w_x *= factor;
    c->w_h *= factor;
    c->peep_input *= factor;
    c->peep_output *= factor;
    c->bias *= factor;
  }
  projection *= factor;
  emission_weights *= factor;
  transitions *= factor;
  for (auto& [id, v] : word_rows) v *= factor;
  for (auto& [id, v] : char_rows) v *= factor;
  for (auto& fam : feature_rows) {
    for (auto& [id, v] : fam) v *= factor;
  }
}

std::vector<Eigen::MatrixXd> Gradients::Dense(const Model& model) const {
  Model shadow = model;
  // Fill a copy of the model with gradient values, then read it back in
  // TrainableTensors order.
  auto scatter = [](Eigen::MatrixXd& table, const std::map<int, Eigen::VectorXd>& rows) {
    table.setZero();
    for (const auto& [id, v] : rows) table.col(id) = v;
  };
  scatter(shadow.word_table, word_rows);
  scatter(shadow.char_table, char_rows);
  for (int k = 0; k < kNumFeatureFamilies; ++k) {
    scatter(shadow.features.table(static_cast<FeatureFamily>(k)),
            feature_rows[static_cast<std::size_t>(k)]);
  }
  shadow.char_fwd = char_fwd;
  shadow.char_bwd = char_bwd;
  shadow.word_fwd = word_fwd;
  shadow.word_bwd = word_bwd;
  shadow.projection = projection;
  shadow.crf.emission_weights = emission_weights;
  shadow.crf.transitions = transitions;
  std::vector<Eigen::MatrixXd> out;
  for (const TensorView& t : TrainableTensors(shadow)) {
    out.push_back(Eigen::Map<Eigen::MatrixXd>(t.data, t.rows, t.cols));
  }
  return out;
}

Model InitModel(const NetworkShape& shape, const TagScheme& scheme,
                std::span<const Dataset* const> vocab_sources,
                std::span<const EmbeddingTable> tables, std::uint64_t seed,
                const InitOptions& init) {
  if (vocab_sources.empty()) Fail(ErrorKind::kArgument, "model needs training data");
  Model m;
  m.shape = shape;
  m.shape.num_tags = scheme.num_tags();
  m.seed = seed;
  const int k = m.shape.num_tags;
  if (!tables.empty()) {
    m.shape.word_segments.clear();
    for (const EmbeddingTable& t : tables) m.shape.word_segments.push_back(t.dim);
  }
  if (m.shape.word_segments.empty() || m.shape.word_dim() <= 0) {
    Fail(ErrorKind::kConfig, "word embedding dimension must be positive");
  }

  m.words = Vocabulary::FromDatasets(vocab_sources);
  for (const std::string& w : m.words.words()) {
    if (w == Vocabulary::kUnkWord) continue;
    for (std::string_view ch : internal::Utf8Chars(w)) m.chars.Add(ch);
  }
  if (!tables.empty()) {
    m.word_table = Assemble(m.words, tables, seed).vectors;
  } else {
    m.word_table.resize(m.shape.word_dim(), m.words.size());
    for (int w = 0; w < m.words.size(); ++w) {
      m.word_table.col(w) = RandomSegment(m.words.word(w), 0, seed, m.shape.word_dim());
    }
  }

  Rng rng(MixSeed(seed, 0x6d6f64656cULL));
  const double s = init.scale;
  const int hc = m.shape.char_hidden;
  const int hw = m.shape.word_hidden;
  const int d = m.shape.input_dim();
  if (m.shape.char_enabled()) {
    m.char_table = RandomMatrix(m.shape.char_dim, m.chars.size(), rng, s);
    const double r = init.glorot ? GlorotRange(m.shape.char_dim, hc) : s;
    m.char_fwd = LstmCell::Random(m.shape.char_dim, hc, rng, r);
    m.char_bwd = LstmCell::Random(m.shape.char_dim, hc, rng, r);
  }
  if (m.shape.use_features) m.features = FeatureEncoder::Build(*vocab_sources[0], seed, s);
  if (m.shape.neural()) {
    const double r = init.glorot ? GlorotRange(d, hw) : s;
    m.word_fwd = LstmCell::Random(d, hw, rng, r);
    m.word_bwd = LstmCell::Random(d, hw, rng, r);
    m.projection = RandomMatrix(k, 2 * hw, rng, init.glorot ? GlorotRange(2 * hw, k) : s);
  } else {
    m.crf.emission_weights = RandomMatrix(k, d, rng, init.glorot ? GlorotRange(d, k) : s);
  }
  if (m.shape.variant != Variant::kBlstm) {
    m.crf.transitions = RandomMatrix(k + 1, k + 1, rng, init.glorot ? GlorotRange(k + 1, k + 1) : s);
  }
  return m;
}

Eigen::VectorXd CharEmbed(const Model& model, std::string_view word) {
  if (word.empty()) Fail(ErrorKind::kArgument, "cannot embed an empty word");
  Eigen::MatrixXd cx = CharInputs(model, CharIds(model, word));
  const int hc = model.char_fwd.hidden();
  Eigen::VectorXd out(2 * hc);
  out.head(hc) = RunLstm(model.char_fwd, cx, false).hidden.col(cx.cols() - 1);
  out.tail(hc) = RunLstm(model.char_bwd, cx, true).hidden.col(0);
  return out;
}

Eigen::VectorXd WordVector(const Model& model, std::string_view word) {
  if (auto id = model.words.Lookup(word)) return model.word_table.col(*id);
  Eigen::VectorXd v(model.shape.word_dim());
  int offset = 0;
  for (std::size_t s = 0; s < model.shape.word_segments.size(); ++s) {
    const int dim = model.shape.word_segments[s];
    v.segment(offset, dim) = RandomSegment(word, static_cast<int>(s), model.seed, dim);
    offset += dim;
  }
  return v;
}

Eigen::VectorXd TokenRepresentation(const Model& model, const Sentence& sentence, int position,
                                    Mode mode, double dropout, std::uint64_t seed) {
  if (position < 0 || position >= static_cast<int>(sentence.size())) {
    Fail(ErrorKind::kArgument, "token position out of range");
  }
  const NetworkShape& shape = model.shape;
  const std::string& w = sentence.tokens[static_cast<std::size_t>(position)].surface;
  Eigen::VectorXd x(shape.input_dim());
  int offset = shape.word_dim();
  x.head(offset) = WordVector(model, w);
  if (shape.char_enabled()) {
    x.segment(offset, 2 * shape.char_hidden) = CharEmbed(model, w);
    offset += 2 * shape.char_hidden;
  }
  if (shape.use_features) x.segment(offset, kFeatureDim) = model.features.Encode(sentence, position);
  if (mode == Mode::kTrain && dropout > 0.0) {
    x.array() *= DropoutMask(shape.input_dim(), dropout, seed, position).array();
  }
  return x;
}

Eigen::MatrixXd BiLstm(const LstmCell& fwd, const LstmCell& bwd, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() == 0) Fail(ErrorKind::kArgument, "empty input sequence");
  LstmTrace f = RunLstm(fwd, inputs, false);
  LstmTrace b = RunLstm(bwd, inputs, true);
  Eigen::MatrixXd out(fwd.hidden() + bwd.hidden(), inputs.cols());
  out.topRows(fwd.hidden()) = f.hidden;
  out.bottomRows(bwd.hidden()) = b.hidden;
  return out;
}

crf::Lattice Emissions(const Model& model, const Sentence& sentence) {
  return RunForward(model, sentence, 0.0, 0).emissions;
}

Eigen::MatrixXd Posteriors(const Model& model, const Sentence& sentence) {
  crf::Lattice em = Emissions(model, sentence);
  if (model.shape.variant != Variant::kBlstm) return crf::Marginals(model.crf.transitions, em);
  Eigen::MatrixXd p(em.rows(), em.cols());
  for (long t = 0; t < em.rows(); ++t) {
    const double m = em.row(t).maxCoeff();
    Eigen::RowVectorXd e = (em.row(t).array() - m).exp();
    p.row(t) = e / e.sum();
  }
  return p;
}

std::vector<TagId> Predict(const Model& model, const Sentence& sentence) {
  crf::Lattice em = Emissions(model, sentence);
  std::vector<TagId> tags;
  if (model.shape.variant == Variant::kBlstm) {
    for (long t = 0; t < em.rows(); ++t) {
      Eigen::Index arg = 0;
      em.row(t).maxCoeff(&arg);  // first maximum
      tags.push_back(static_cast<TagId>(arg));
    }
  } else {
    tags = crf::Viterbi(model.crf.transitions, em);
  }
  return RepairBio(tags);
}

LossResult LossAndGradients(const Model& model, const Sentence& sentence,
                            std::span<const TagId> gold, const LossOptions& options) {
  if (gold.size() != sentence.size()) {
    Fail(ErrorKind::kArgument, "gold length does not match sentence length");
  }
  const bool dropout = model.shape.neural() && options.dropout > 0.0;
  Forward f = RunForward(model, sentence, dropout ? options.dropout : 0.0, options.dropout_seed);
  LossResult r;
  r.grads = Gradients::ZerosLike(model);
  crf::Lattice d_em;
  if (model.shape.variant == Variant::kBlstm) {
    d_em.resize(f.emissions.rows(), f.emissions.cols());
    for (long t = 0; t < f.emissions.rows(); ++t) {
      const double m = f.emissions.row(t).maxCoeff();
      Eigen::RowVectorXd e = (f.emissions.row(t).array() - m).exp();
      const double z = e.sum();
      const int y = gold[static_cast<std::size_t>(t)];
      r.loss += m + std::log(z) - f.emissions(t, y);
      d_em.row(t) = e / z;
      d_em(t, y) -= 1.0;
    }
  } else {
    crf::NllGradient nll = crf::NllAndGradient(model.crf.transitions, f.emissions, gold);
    r.loss = nll.nll;
    r.grads.transitions = nll.d_transitions;
    d_em = std::move(nll.d_emissions);
  }
  Backward(model, f, d_em, r.grads);
  if (model.shape.variant == Variant::kCrf && options.l2 > 0.0) {
    r.loss += 0.5 * options.l2 *
              (model.crf.emission_weights.squaredNorm() + model.crf.transitions.squaredNorm());
    r.grads.emission_weights += options.l2 * model.crf.emission_weights;
    r.grads.transitions += options.l2 * model.crf.transitions;
  }
  return r;
}

void ApplyGradients(Model& model, const Gradients& g, double lr) {
  const NetworkShape& s = model.shape;
  if (s.neural()) {
    for (const auto& [id, v] : g.word_rows) model.word_table.col(id) -= lr * v;
    for (const auto& [id, v] : g.char_rows) model.char_table.col(id) -= lr * v;
    for (int k = 0; k < kNumFeatureFamilies; ++k) {
      auto& table = model.features.table(static_cast<FeatureFamily>(k));
      for (const auto& [id, v] : g.feature_rows[static_cast<std::size_t>(k)]) table.col(id) -= lr * v;
    }
    if (s.char_enabled()) {
      model.char_fwd.AddScaled(g.char_fwd, -lr);
      model.char_bwd.AddScaled(g.char_bwd, -lr);
    }
    model.word_fwd.AddScaled(g.word_fwd, -lr);
    model.word_bwd.AddScaled(g.word_bwd, -lr);
    model.projection -= lr * g.projection;
  } else {
    model.crf.emission_weights -= lr * g.emission_weights;
  }
  if (s.variant != Variant::kBlstm) model.crf.transitions -= lr * g.transitions;
}

}  // namespace seqtag
