#include "seqtag/training.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include <zlib.h>

#include "io_util.hpp"
#include "seqtag/error.hpp"
#include "seqtag/eval.hpp"
#include "seqtag/random.hpp"

namespace seqtag {

namespace {

bool ParseBool(std::string_view v, bool& out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    out = true;
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    out = false;
    return true;
  }
  return false;
}

template <typename Int>
bool ParseInt(std::string_view v, Int& out) {
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  return ec == std::errc() && ptr == v.data() + v.size();
}

std::vector<std::string> ParseList(std::string_view v) {
  std::vector<std::string> out;
  for (auto part : internal::SplitOn(v, ',')) {
    auto p = internal::Trim(part);
    if (!p.empty()) out.emplace_back(p);
  }
  return out;
}

std::string JoinList(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

}  // namespace

void TrainConfig::Validate() const {
  auto bad = [](const std::string& what) { Fail(ErrorKind::kConfig, what); };
  if (!(learning_rate > 0.0)) bad("learning_rate must be positive");
  if (!(dropout > 0.0 && dropout < 1.0)) bad("dropout must lie in (0, 1)");
  if (epochs < 1) bad("epochs must be >= 1");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) bad("split_ratio must lie in (0, 1)");
  if (word_dim < 1 || char_dim < 1 || word_hidden < 1 || char_hidden < 1) {
    bad("dimensions must be >= 1");
  }
  if (l2 < 0.0) bad("l2 must be >= 0");
  if (init != "uniform" && init != "glorot") bad("init must be uniform or glorot");
  if (!(init_scale > 0.0)) bad("init_scale must be positive");
}

void SetConfigValue(TrainConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view v = internal::Trim(raw);
  bool ok = true;
  if (key == "variant") {
    c.variant = ParseVariant(v);
  } else if (key == "embeddings") {
    c.embeddings = ParseList(v);
  } else if (key == "classes") {
    c.classes = ParseList(v);
  } else if (key == "use_char") {
    ok = ParseBool(v, c.use_char);
  } else if (key == "use_features") {
    ok = ParseBool(v, c.use_features);
  } else if (key == "word_dim" || key == "d_w") {
    ok = ParseInt(v, c.word_dim);
  } else if (key == "char_dim" || key == "d_c") {
    ok = ParseInt(v, c.char_dim);
  } else if (key == "word_hidden" || key == "h_w") {
    ok = ParseInt(v, c.word_hidden);
  } else if (key == "char_hidden" || key == "h_c") {
    ok = ParseInt(v, c.char_hidden);
  } else if (key == "learning_rate") {
    ok = internal::ParseDouble(v, c.learning_rate);
  } else if (key == "dropout") {
    ok = internal::ParseDouble(v, c.dropout);
  } else if (key == "epochs") {
    ok = ParseInt(v, c.epochs);
  } else if (key == "split_ratio") {
    ok = internal::ParseDouble(v, c.split_ratio);
  } else if (key == "seed") {
    ok = ParseInt(v, c.seed);
  } else if (key == "clip_norm") {
    ok = internal::ParseDouble(v, c.clip_norm);
  } else if (key == "l2") {
    ok = internal::ParseDouble(v, c.l2);
  } else if (key == "init") {
    c.init = std::string(v);
  } else if (key == "init_scale") {
    ok = internal::ParseDouble(v, c.init_scale);
  } else {
    Fail(ErrorKind::kConfig, "unknown config key '" + std::string(key) + "'");
  }
  if (!ok) {
    Fail(ErrorKind::kConfig, "invalid value '" + std::string(v) + "' for '" + std::string(key) + "'");
  }
}

TrainConfig ParseConfig(std::string_view text, TrainConfig base) {
  auto lines = internal::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = internal::Trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      Fail(ErrorKind::kConfig, "line " + std::to_string(i + 1) + ": expected key = value");
    }
    try {
      SetConfigValue(base, internal::Trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      Fail(ErrorKind::kConfig, "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return base;
}

std::string FormatConfig(const TrainConfig& c) {
  std::ostringstream out;
  out << "variant = " << VariantName(c.variant) << '\n'
      << "embeddings = " << JoinList(c.embeddings) << '\n'
      << "classes = " << JoinList(c.classes) << '\n'
      << "use_char = " << (c.use_char ? "true" : "false") << '\n'
      << "use_features = " << (c.use_features ? "true" : "false") << '\n'
      << "word_dim = " << c.word_dim << '\n'
      << "char_dim = " << c.char_dim << '\n'
      << "word_hidden = " << c.word_hidden << '\n'
      << "char_hidden = " << c.char_hidden << '\n'
      << "learning_rate = " << internal::FormatDouble(c.learning_rate) << '\n'
      << "dropout = " << internal::FormatDouble(c.dropout) << '\n'
      << "epochs = " << c.epochs << '\n'
      << "split_ratio = " << internal::FormatDouble(c.split_ratio) << '\n'
      << "seed = " << c.seed << '\n'
      << "clip_norm = " << internal::FormatDouble(c.clip_norm) << '\n'
      << "l2 = " << internal::FormatDouble(c.l2) << '\n'
      << "init = " << c.init << '\n'
      << "init_scale = " << internal::FormatDouble(c.init_scale) << '\n';
  return out.str();
}

// --- training ---

namespace {

NetworkShape ShapeFromConfig(const TrainConfig& c) {
  NetworkShape s;
  s.variant = c.variant;
  s.word_segments = {c.word_dim};
  s.char_dim = c.char_dim;
  s.char_hidden = c.char_hidden;
  s.word_hidden = c.word_hidden;
  s.use_char = c.use_char;
  s.use_features = c.use_features;
  return s;
}

double ValidationF1(const Model& model, const Dataset& valid) {
  Dataset tagged = valid;
  for (Sentence& s : tagged.sentences) {
    std::vector<TagId> pred = Predict(model, s);
    for (std::size_t t = 0; t < s.size(); ++t) s.tokens[t].pred = pred[t];
  }
  return eval::MicroF1(tagged);
}

}  // namespace

Checkpoint TrainWithTables(const TrainConfig& config, const Dataset& train_data,
                           std::span<const EmbeddingTable> tables, const Dataset* extra_vocab,
                           const EpochCallback& on_epoch) {
  config.Validate();
  if (train_data.empty()) Fail(ErrorKind::kValidation, "training data is empty");
  if (extra_vocab != nullptr && extra_vocab->scheme != train_data.scheme) {
    Fail(ErrorKind::kValidation, "test data uses a different tag scheme");
  }
  auto [train, valid] = SplitTrainValid(train_data, config.split_ratio, config.seed);
  if (train.empty()) Fail(ErrorKind::kValidation, "training split is empty");
  // Tiny corpora can leave the validation part empty; select on the
  // training part then.
  const Dataset& selection = valid.empty() ? train : valid;

  std::vector<const Dataset*> sources{&train_data};
  if (extra_vocab != nullptr) sources.push_back(extra_vocab);
  InitOptions init;
  init.scale = config.init_scale;
  init.glorot = config.init == "glorot";
  Checkpoint ck;
  ck.config = config;
  ck.scheme = train_data.scheme;
  Model model = InitModel(ShapeFromConfig(config), train_data.scheme, sources, tables,
                          config.seed, init);

  std::vector<std::vector<TagId>> gold;
  for (const Sentence& s : train.sentences) gold.push_back(GoldTags(s));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_f1 = -1.0;
  Model best = model;
  LossOptions options;
  options.dropout = config.dropout;
  options.l2 = config.l2;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::uint64_t epoch_seed = MixSeed(config.seed, static_cast<std::uint64_t>(epoch) + 1);
    Rng rng(epoch_seed);
    Shuffle(order, rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      options.dropout_seed = MixSeed(epoch_seed, idx);
      LossResult r = LossAndGradients(model, train.sentences[idx], gold[idx], options);
      const double norm_sq = r.grads.SquaredNorm();
      if (!std::isfinite(r.loss) || !std::isfinite(norm_sq)) {
        Fail(ErrorKind::kNumeric, "non-finite loss at epoch " + std::to_string(epoch + 1) +
                                      ", training sentence index " + std::to_string(idx));
      }
      if (config.clip_norm > 0.0 && norm_sq > config.clip_norm * config.clip_norm) {
        r.grads.Scale(config.clip_norm / std::sqrt(norm_sq));
      }
      ApplyGradients(model, r.grads, config.learning_rate);
      total += r.loss;
    }
    const double f1 = ValidationF1(model, selection);
    ck.validation_f1.push_back(f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = model;
      ck.best_epoch = epoch;
    }
    if (on_epoch) on_epoch({epoch, total, f1});
  }
  ck.model = std::move(best);
  return ck;
}

Checkpoint Train(const TrainConfig& config, const Dataset& train_data, const Dataset* extra_vocab,
                 const EpochCallback& on_epoch) {
  std::vector<EmbeddingTable> tables;
  for (const std::string& path : config.embeddings) tables.push_back(LoadEmbeddingTable(path));
  return TrainWithTables(config, train_data, tables, extra_vocab, on_epoch);
}

Dataset Tag(const Checkpoint& ck, const Dataset& sentences) {
  if (sentences.scheme != ck.scheme) {
    Fail(ErrorKind::kValidation, "input tag scheme does not match the model's");
  }
  Dataset out = sentences;
  for (Sentence& s : out.sentences) {
    std::vector<TagId> pred = Predict(ck.model, s);
    for (std::size_t t = 0; t < s.size(); ++t) s.tokens[t].pred = pred[t];
  }
  return out;
}

// --- checkpoint container ---

namespace {

constexpr std::string_view kMagic = "seqtag-checkpoint";
constexpr std::string_view kPayloadMarker = "[payload]\n";

std::uint32_t Crc32(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

void AppendLe64(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double ReadLe64(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

void WriteVocab(std::ostringstream& out, const std::string& name, const Vocabulary& v) {
  out << "[vocab " << name << ' ' << v.size() << "]\n";
  for (const std::string& w : v.words()) out << w << '\n';
}

// Line reader over the header section.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view text) : lines_(internal::SplitLines(text)) {}

  std::string_view Next() {
    if (pos_ >= lines_.size()) Fail(ErrorKind::kFormat, "checkpoint header ends early");
    return lines_[pos_++];
  }

  std::string_view Expect(std::string_view prefix) {
    std::string_view line = Next();
    if (line.substr(0, prefix.size()) != prefix) {
      Fail(ErrorKind::kFormat, "checkpoint header: expected '" + std::string(prefix) + "', got '" +
                                   std::string(line) + "'");
    }
    return internal::Trim(line.substr(prefix.size()));
  }

  long ExpectCount(std::string_view prefix) {
    std::string_view rest = Expect(prefix);
    if (!rest.empty() && rest.back() == ']') rest.remove_suffix(1);
    long n = 0;
    if (!ParseInt(internal::Trim(rest), n) || n < 0) {
      Fail(ErrorKind::kFormat, "checkpoint header: bad count after '" + std::string(prefix) + "'");
    }
    return n;
  }

  Vocabulary ReadVocab(std::string_view name) {
    const long n = ExpectCount("[vocab " + std::string(name));
    Vocabulary v;
    for (long i = 0; i < n; ++i) {
      std::string_view w = Next();
      if (i == 0) {
        if (w != Vocabulary::kUnkWord) Fail(ErrorKind::kFormat, "vocabulary must start with <unk>");
        continue;
      }
      if (v.Add(w) != i) Fail(ErrorKind::kFormat, "duplicate vocabulary entry '" + std::string(w) + "'");
    }
    return v;
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

long ParseLong(std::string_view s) {
  long v = 0;
  if (!ParseInt(internal::Trim(s), v)) Fail(ErrorKind::kFormat, "checkpoint header: bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& ck) {
  Model model = ck.model;  // views need mutable storage
  const NetworkShape& s = model.shape;
  std::ostringstream h;
  h << kMagic << '\n' << "version " << Checkpoint::kFormatVersion << '\n';
  h << "[config]\n" << FormatConfig(ck.config) << "[end]\n";
  h << "[scheme]\n" << JoinList(ck.scheme.classes()) << '\n';
  h << "[model]\n"
    << "variant " << VariantName(s.variant) << '\n'
    << "seed " << model.seed << '\n'
    << "num_tags " << s.num_tags << '\n'
    << "word_segments";
  for (int d : s.word_segments) h << ' ' << d;
  h << '\n'
    << "char_dim " << s.char_dim << '\n'
    << "char_hidden " << s.char_hidden << '\n'
    << "word_hidden " << s.word_hidden << '\n'
    << "use_char " << (s.use_char ? 1 : 0) << '\n'
    << "use_features " << (s.use_features ? 1 : 0) << '\n';
  WriteVocab(h, "words", model.words);
  WriteVocab(h, "chars", model.chars);
  WriteVocab(h, "prefixes", model.features.prefixes());
  WriteVocab(h, "suffixes", model.features.suffixes());
  h << "[training]\n" << "best_epoch " << ck.best_epoch << '\n' << "validation_f1";
  for (double f : ck.validation_f1) h << ' ' << internal::FormatDouble(f);
  h << '\n';
  std::vector<TensorView> tensors = AllTensors(model);
  h << "[tensors " << tensors.size() << "]\n";
  for (const TensorView& t : tensors) h << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
  h << kPayloadMarker;

  std::string out = h.str();
  for (const TensorView& t : tensors) {
    for (long i = 0; i < t.size(); ++i) AppendLe64(out, t.data[i]);
  }
  const std::uint32_t crc = Crc32(out);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((crc >> (8 * i)) & 0xff));
  return out;
}

Checkpoint DeserializeCheckpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 4 || bytes.substr(0, kMagic.size()) != kMagic) {
    Fail(ErrorKind::kFormat, "not a seqtag checkpoint");
  }
  // Version is checked before the checksum so that files from a newer
  // release get an explicit message.
  {
    HeaderReader probe(bytes.substr(0, std::min<std::size_t>(bytes.size(), 256)));
    probe.Next();
    const long version = ParseLong(probe.Expect("version"));
    if (version != Checkpoint::kFormatVersion) {
      Fail(ErrorKind::kVersion, "unsupported checkpoint version " + std::to_string(version) +
                                    " (this build reads version " +
                                    std::to_string(Checkpoint::kFormatVersion) + ")");
    }
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[bytes.size() - 4 + static_cast<std::size_t>(i)])) << (8 * i);
  }
  if (Crc32(body) != stored) {
    Fail(ErrorKind::kIntegrity, "checkpoint checksum mismatch (truncated or corrupt file)");
  }
  const std::size_t marker = body.find(kPayloadMarker);
  if (marker == std::string_view::npos) Fail(ErrorKind::kFormat, "checkpoint has no payload");
  HeaderReader r(body.substr(0, marker));
  r.Next();
  r.Next();

  Checkpoint ck;
  r.Expect("[config]");
  std::string config_text;
  for (std::string_view line = r.Next(); line != "[end]"; line = r.Next()) {
    config_text += line;
    config_text += '\n';
  }
  ck.config = ParseConfig(config_text);
  r.Expect("[scheme]");
  ck.scheme = TagScheme(ParseList(r.Next()));

  r.Expect("[model]");
  NetworkShape s;
  s.variant = ParseVariant(r.Expect("variant"));
  Model& m = ck.model;
  std::uint64_t seed = 0;
  if (!ParseInt(r.Expect("seed"), seed)) Fail(ErrorKind::kFormat, "bad model seed");
  m.seed = seed;
  s.num_tags = static_cast<int>(ParseLong(r.Expect("num_tags")));
  s.word_segments.clear();
  for (auto part : internal::SplitWhitespaceView(r.Expect("word_segments"))) {
    s.word_segments.push_back(static_cast<int>(ParseLong(part)));
  }
  s.char_dim = static_cast<int>(ParseLong(r.Expect("char_dim")));
  s.char_hidden = static_cast<int>(ParseLong(r.Expect("char_hidden")));
  s.word_hidden = static_cast<int>(ParseLong(r.Expect("word_hidden")));
  s.use_char = ParseLong(r.Expect("use_char")) != 0;
  s.use_features = ParseLong(r.Expect("use_features")) != 0;
  if (s.num_tags != ck.scheme.num_tags()) Fail(ErrorKind::kFormat, "tag count does not match scheme");
  m.shape = s;
  m.words = r.ReadVocab("words");
  m.chars = r.ReadVocab("chars");
  Vocabulary prefixes = r.ReadVocab("prefixes");
  Vocabulary suffixes = r.ReadVocab("suffixes");

  r.Expect("[training]");
  ck.best_epoch = static_cast<int>(ParseLong(r.Expect("best_epoch")));
  for (auto part : internal::SplitWhitespaceView(r.Expect("validation_f1"))) {
    double v;
    if (!internal::ParseDouble(part, v)) Fail(ErrorKind::kFormat, "bad validation history");
    ck.validation_f1.push_back(v);
  }

  // Allocate every tensor from the shape, then match the listed layout.
  const int k = s.num_tags;
  m.word_table.resize(s.word_dim(), m.words.size());
  if (s.char_enabled()) {
    m.char_table.resize(s.char_dim, m.chars.size());
    m.char_fwd = LstmCell::Zero(s.char_dim, s.char_hidden);
    m.char_bwd = LstmCell::Zero(s.char_dim, s.char_hidden);
  }
  if (s.use_features) {
    std::array<Eigen::MatrixXd, kNumFeatureFamilies> tables;
    for (int f = 0; f < kNumFeatureFamilies; ++f) {
      const auto fam = static_cast<FeatureFamily>(f);
      int values = NumClosedValues(fam);
      if (fam == FeatureFamily::kPrefix) values = prefixes.size();
      if (fam == FeatureFamily::kSuffix) values = suffixes.size();
      tables[static_cast<std::size_t>(f)].resize(kFeatureDims[static_cast<std::size_t>(f)], values);
    }
    m.features = FeatureEncoder::FromParts(std::move(prefixes), std::move(suffixes), std::move(tables));
  }
  if (s.neural()) {
    m.word_fwd = LstmCell::Zero(s.input_dim(), s.word_hidden);
    m.word_bwd = LstmCell::Zero(s.input_dim(), s.word_hidden);
    m.projection.resize(k, 2 * s.word_hidden);
  } else {
    m.crf.emission_weights.resize(k, s.input_dim());
  }
  if (s.variant != Variant::kBlstm) m.crf.transitions.resize(k + 1, k + 1);

  std::vector<TensorView> tensors = AllTensors(m);
  const long listed = r.ExpectCount("[tensors");
  if (listed != static_cast<long>(tensors.size())) Fail(ErrorKind::kFormat, "tensor count mismatch");
  std::size_t expected_bytes = 0;
  for (const TensorView& t : tensors) {
    auto fields = internal::SplitWhitespaceView(r.Next());
    if (fields.size() != 3 || fields[0] != t.name || ParseLong(fields[1]) != t.rows ||
        ParseLong(fields[2]) != t.cols) {
      Fail(ErrorKind::kFormat, "tensor layout mismatch at '" + t.name + "'");
    }
    expected_bytes += static_cast<std::size_t>(t.size()) * 8;
  }
  const std::string_view payload = body.substr(marker + kPayloadMarker.size());
  if (payload.size() != expected_bytes) Fail(ErrorKind::kIntegrity, "checkpoint payload size mismatch");
  const char* p = payload.data();
  for (const TensorView& t : tensors) {
    for (long i = 0; i < t.size(); ++i, p += 8) t.data[i] = ReadLe64(p);
  }
  return ck;
}

void SaveCheckpoint(const Checkpoint& ck, const std::string& path) {
  internal::WriteFile(path, SerializeCheckpoint(ck));
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return DeserializeCheckpoint(internal::ReadFile(path));
}

}  // namespace seqtag
