#include "seqtag/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <thread>

#include "io_util.hpp"
#include "seqtag/error.hpp"
#include "seqtag/random.hpp"

namespace seqtag {

Vocabulary::Vocabulary() { Add(kUnkWord); }

int Vocabulary::Add(std::string_view word) {
  auto it = index_.find(std::string(word));
  if (it != index_.end()) return it->second;
  int id = size();
  words_.emplace_back(word);
  index_.emplace(words_.back(), id);
  return id;
}

std::optional<int> Vocabulary::Find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Vocabulary::Lookup(std::string_view word) const {
  if (auto id = Find(word)) return id;
  return Find(internal::AsciiLower(word));
}

Vocabulary Vocabulary::FromDatasets(std::span<const Dataset* const> datasets) {
  Vocabulary v;
  for (const Dataset* d : datasets) {
    for (const Sentence& s : d->sentences) {
      for (const Token& t : s.tokens) v.Add(t.surface);
    }
  }
  return v;
}

const int* EmbeddingTable::Find(std::string_view word) const {
  auto it = index.find(std::string(word));
  return it == index.end() ? nullptr : &it->second;
}

const int* EmbeddingTable::Lookup(std::string_view word) const {
  if (const int* id = Find(word)) return id;
  return Find(internal::AsciiLower(word));
}

EmbeddingTable ParseEmbeddingTable(std::string_view text) {
  EmbeddingTable table;
  std::vector<double> values;
  std::size_t rows = 0;
  auto lines = internal::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto fields = internal::SplitWhitespaceView(lines[i]);
    if (fields.empty()) continue;
    const std::string where = "line " + std::to_string(i + 1);
    const int d = static_cast<int>(fields.size()) - 1;
    if (d < 1) Fail(ErrorKind::kFormat, where + ": word without vector components");
    if (table.dim == 0) {
      table.dim = d;
    } else if (d != table.dim) {
      Fail(ErrorKind::kFormat, where + ": expected " + std::to_string(table.dim) +
                                   " components, got " + std::to_string(d));
    }
    for (int k = 1; k <= d; ++k) {
      double v;
      if (!internal::ParseDouble(fields[static_cast<std::size_t>(k)], v) || !std::isfinite(v)) {
        Fail(ErrorKind::kFormat, where + ": non-numeric component '" +
                                     std::string(fields[static_cast<std::size_t>(k)]) + "'");
      }
      values.push_back(v);
    }
    std::string word(fields[0]);
    if (table.index.count(word) != 0) {
      // First occurrence wins; later duplicates are dropped.
      values.resize(values.size() - static_cast<std::size_t>(d));
      continue;
    }
    table.index.emplace(word, static_cast<int>(rows));
    table.words.push_back(std::move(word));
    ++rows;
  }
  if (rows == 0) Fail(ErrorKind::kFormat, "embedding file is empty; dimension undefined");
  table.vectors = Eigen::Map<Eigen::MatrixXd>(values.data(), table.dim, static_cast<long>(rows));
  table.provenance.assign(rows, Provenance::kPretrained);
  return table;
}

EmbeddingTable LoadEmbeddingTable(const std::string& path) {
  try {
    return ParseEmbeddingTable(internal::ReadFile(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    Fail(e.kind(), path + ": " + e.what());
  }
}

std::string FormatEmbeddingTable(const EmbeddingTable& table) {
  std::string out;
  for (int i = 0; i < table.size(); ++i) {
    out += table.words[static_cast<std::size_t>(i)];
    for (int k = 0; k < table.dim; ++k) {
      out += ' ';
      out += internal::FormatDouble(table.vectors(k, i));
    }
    out += '\n';
  }
  return out;
}

void SaveEmbeddingTable(const EmbeddingTable& table, const std::string& path) {
  internal::WriteFile(path, FormatEmbeddingTable(table));
}

Eigen::VectorXd RandomSegment(std::string_view word, int segment, std::uint64_t seed,
                              int dim) {
  Rng rng(MixSeed(MixSeed(HashBytes(word), static_cast<std::uint64_t>(segment)), seed));
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) v[k] = rng.Uniform(-1.0, 1.0);
  return v;
}

EmbeddingTable Assemble(const Vocabulary& vocab, std::span<const EmbeddingTable> tables,
                        std::uint64_t seed) {
  if (tables.empty()) Fail(ErrorKind::kArgument, "assemble needs at least one table");
  EmbeddingTable out;
  for (const EmbeddingTable& t : tables) out.dim += t.dim;
  out.vectors.resize(out.dim, vocab.size());
  out.provenance.assign(static_cast<std::size_t>(vocab.size()), Provenance::kRandom);
  for (int w = 0; w < vocab.size(); ++w) {
    const std::string& word = vocab.word(w);
    out.words.push_back(word);
    out.index.emplace(word, w);
    int offset = 0;
    for (std::size_t s = 0; s < tables.size(); ++s) {
      const EmbeddingTable& t = tables[s];
      const int* hit = w == Vocabulary::kUnk ? nullptr : t.Lookup(word);
      if (hit != nullptr) {
        out.vectors.col(w).segment(offset, t.dim) = t.vectors.col(*hit);
        out.provenance[static_cast<std::size_t>(w)] = Provenance::kPretrained;
      } else {
        out.vectors.col(w).segment(offset, t.dim) =
            RandomSegment(word, static_cast<int>(s), seed, t.dim);
      }
      offset += t.dim;
    }
  }
  return out;
}

CoverageStats CoverageReport(const Vocabulary& vocab, const EmbeddingTable& table) {
  CoverageStats stats;
  for (int w = 0; w < vocab.size(); ++w) {
    if (w == Vocabulary::kUnk) continue;
    ++stats.total_words;
    const int* id = table.Find(vocab.word(w));
    if (id != nullptr && table.provenance[static_cast<std::size_t>(*id)] == Provenance::kPretrained) {
      ++stats.covered;
    }
  }
  if (stats.total_words > 0) {
    stats.percentage = static_cast<double>(stats.covered) / static_cast<double>(stats.total_words);
  }
  return stats;
}

// --- pseudo corpus ---

TokenizedCorpus BuildPseudoCorpus(std::span<const CellRecord> records) {
  TokenizedCorpus corpus;
  for (const CellRecord& r : records) {
    if (internal::Trim(r.column).empty()) {
      Fail(ErrorKind::kArgument, "pseudo-sentence column title is empty");
    }
    auto cell = internal::SplitWhitespaceView(r.text);
    if (cell.empty()) continue;
    std::string title = internal::AsciiLower(r.column);
    std::replace(title.begin(), title.end(), '_', ' ');
    std::vector<std::string> sentence;
    for (auto tok : internal::SplitWhitespaceView(title)) sentence.emplace_back(tok);
    for (auto tok : cell) sentence.push_back(internal::AsciiLower(tok));
    corpus.push_back(std::move(sentence));
  }
  return corpus;
}

std::vector<std::vector<std::string>> ParseCsv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_started || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        row_started = false;
        break;
      default:
        field += c;
        row_started = true;
    }
  }
  if (quoted) Fail(ErrorKind::kParse, "unterminated quoted CSV field");
  if (row_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<CellRecord> ReadManifestCells(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(manifest_path).parent_path();
  std::vector<CellRecord> records;
  const std::string text = internal::ReadFile(manifest_path);
  auto lines = internal::SplitLines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (internal::Trim(lines[i]).empty() || lines[i].front() == '#') continue;
    auto cols = internal::SplitOn(lines[i], '\t');
    if (cols.size() != 2) {
      Fail(ErrorKind::kParse, manifest_path + ": line " + std::to_string(i + 1) +
                                  ": expected table_path<TAB>column_name");
    }
    fs::path table = std::string(internal::Trim(cols[0]));
    if (table.is_relative()) table = base / table;
    const std::string column(internal::Trim(cols[1]));
    auto rows = ParseCsv(internal::ReadFile(table.string()));
    if (rows.empty()) continue;
    auto it = std::find(rows[0].begin(), rows[0].end(), column);
    if (it == rows[0].end()) {
      Fail(ErrorKind::kValidation, table.string() + ": no column named '" + column + "'");
    }
    const auto col = static_cast<std::size_t>(it - rows[0].begin());
    for (std::size_t r = 1; r < rows.size(); ++r) {
      records.push_back({column, col < rows[r].size() ? rows[r][col] : std::string()});
    }
  }
  return records;
}

// --- GloVe ---

double Cooccurrence::Count(std::string_view a, std::string_view b) const {
  auto ia = std::find(words.begin(), words.end(), a);
  auto ib = std::find(words.begin(), words.end(), b);
  if (ia == words.end() || ib == words.end()) return 0.0;
  const int r = static_cast<int>(ia - words.begin());
  const int c = static_cast<int>(ib - words.begin());
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{r, c},
                             [](const CooccurrenceEntry& e, std::pair<int, int> key) {
                               return std::pair{e.row, e.col} < key;
                             });
  return it != entries.end() && it->row == r && it->col == c ? it->value : 0.0;
}

Cooccurrence CountCooccurrences(const TokenizedCorpus& corpus, int window, int min_count) {
  if (window < 1) Fail(ErrorKind::kArgument, "co-occurrence window must be >= 1");
  std::map<std::string, long> freq;
  for (const auto& s : corpus) {
    for (const auto& w : s) ++freq[w];
  }
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [w, n] : freq) {
    if (n >= min_count) kept.emplace_back(w, n);
  }
  // Frequency descending, ties alphabetical.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Cooccurrence co;
  std::unordered_map<std::string, int> id;
  for (auto& [w, n] : kept) {
    id.emplace(w, static_cast<int>(co.words.size()));
    co.words.push_back(w);
  }
  std::map<std::pair<int, int>, double> counts;
  std::vector<int> ids;
  for (const auto& s : corpus) {
    ids.clear();
    for (const auto& w : s) {
      auto it = id.find(w);
      if (it != id.end()) ids.push_back(it->second);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t lo = i >= static_cast<std::size_t>(window) ? i - static_cast<std::size_t>(window) : 0;
      for (std::size_t j = lo; j < i; ++j) {
        const double weight = 1.0 / static_cast<double>(i - j);
        counts[{ids[i], ids[j]}] += weight;
        counts[{ids[j], ids[i]}] += weight;
      }
    }
  }
  co.entries.reserve(counts.size());
  for (auto& [key, value] : counts) co.entries.push_back({key.first, key.second, value});
  return co;
}

namespace {

struct GloveState {
  Eigen::MatrixXd word, context, word_sq, context_sq;
  Eigen::VectorXd word_bias, context_bias, word_bias_sq, context_bias_sq;
};

double Weight(double x, const GloveParams& p) {
  return x < p.x_max ? std::pow(x / p.x_max, p.alpha) : 1.0;
}

double Objective(const GloveState& s, const Cooccurrence& co, const GloveParams& p) {
  double j = 0.0;
  for (const CooccurrenceEntry& e : co.entries) {
    double diff = s.word.col(e.row).dot(s.context.col(e.col)) + s.word_bias[e.row] +
                  s.context_bias[e.col] - std::log(e.value);
    j += 0.5 * Weight(e.value, p) * diff * diff;
  }
  return j;
}

void Update(GloveState& s, const CooccurrenceEntry& e, const GloveParams& p,
            Eigen::VectorXd& gw, Eigen::VectorXd& gc) {
  auto w = s.word.col(e.row);
  auto c = s.context.col(e.col);
  const double diff =
      w.dot(c) + s.word_bias[e.row] + s.context_bias[e.col] - std::log(e.value);
  const double fdiff = Weight(e.value, p) * diff;
  gw = fdiff * c;
  gc = fdiff * w;
  w.array() -= p.learning_rate * gw.array() / s.word_sq.col(e.row).array().sqrt();
  c.array() -= p.learning_rate * gc.array() / s.context_sq.col(e.col).array().sqrt();
  s.word_sq.col(e.row).array() += gw.array().square();
  s.context_sq.col(e.col).array() += gc.array().square();
  s.word_bias[e.row] -= p.learning_rate * fdiff / std::sqrt(s.word_bias_sq[e.row]);
  s.context_bias[e.col] -= p.learning_rate * fdiff / std::sqrt(s.context_bias_sq[e.col]);
  s.word_bias_sq[e.row] += fdiff * fdiff;
  s.context_bias_sq[e.col] += fdiff * fdiff;
}

}  // namespace

GloveResult TrainGlove(const TokenizedCorpus& corpus, const GloveParams& p) {
  if (p.dim < 1 || p.iterations < 1 || p.x_max <= 0.0 || p.learning_rate <= 0.0) {
    Fail(ErrorKind::kArgument, "invalid GloVe parameters");
  }
  Cooccurrence co = CountCooccurrences(corpus, p.window, std::max(1, p.min_count));
  if (co.words.empty() || co.entries.empty()) {
    Fail(ErrorKind::kArgument, "GloVe corpus is empty after min-count filtering");
  }
  const long v = static_cast<long>(co.words.size());
  GloveState s;
  Rng init(MixSeed(p.seed, 0x676c6f7665ULL));
  auto fill = [&](Eigen::MatrixXd& m) {
    m.resize(p.dim, v);
    for (long j = 0; j < v; ++j) {
      for (int k = 0; k < p.dim; ++k) m(k, j) = (init.Unit() - 0.5) / p.dim;
    }
  };
  fill(s.word);
  fill(s.context);
  s.word_bias = Eigen::VectorXd::Zero(v);
  s.context_bias = Eigen::VectorXd::Zero(v);
  s.word_sq = Eigen::MatrixXd::Ones(p.dim, v);
  s.context_sq = Eigen::MatrixXd::Ones(p.dim, v);
  s.word_bias_sq = Eigen::VectorXd::Ones(v);
  s.context_bias_sq = Eigen::VectorXd::Ones(v);

  GloveResult result;
  std::vector<std::size_t> order(co.entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int it = 0; it < p.iterations; ++it) {
    Rng rng(MixSeed(p.seed, static_cast<std::uint64_t>(it) + 1));
    Shuffle(order, rng);
    if (p.threads <= 1) {
      Eigen::VectorXd gw(p.dim), gc(p.dim);
      for (std::size_t i : order) Update(s, co.entries[i], p, gw, gc);
    } else {
      std::vector<std::thread> workers;
      const std::size_t n = order.size();
      const auto nt = static_cast<std::size_t>(p.threads);
      for (std::size_t t = 0; t < nt; ++t) {
        workers.emplace_back([&, t] {
          Eigen::VectorXd gw(p.dim), gc(p.dim);
          for (std::size_t i = t * n / nt; i < (t + 1) * n / nt; ++i) {
            Update(s, co.entries[order[i]], p, gw, gc);
          }
        });
      }
      for (auto& w : workers) w.join();
    }
    result.objective.push_back(Objective(s, co, p));
  }

  EmbeddingTable& table = result.table;
  table.dim = p.dim;
  table.words = co.words;
  for (long i = 0; i < v; ++i) table.index.emplace(co.words[static_cast<std::size_t>(i)], static_cast<int>(i));
  table.vectors = s.word + s.context;
  table.provenance.assign(static_cast<std::size_t>(v), Provenance::kPretrained);
  return result;
}

TokenizedCorpus ParseTokenizedCorpus(std::string_view text) {
  TokenizedCorpus corpus;
  for (std::string_view line : internal::SplitLines(text)) {
    auto toks = internal::SplitWhitespaceView(line);
    if (toks.empty()) continue;
    corpus.emplace_back(toks.begin(), toks.end());
  }
  return corpus;
}

std::string FormatTokenizedCorpus(const TokenizedCorpus& corpus) {
  std::string out;
  for (const auto& s : corpus) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += ' ';
      out += s[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace seqtag
