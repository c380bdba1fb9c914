#include "seqtag/seqtag.h"

#include <new>
#include <string>
#include <vector>

#include "io_util.hpp"
#include "seqtag/corpus.hpp"
#include "seqtag/embeddings.hpp"
#include "seqtag/error.hpp"
#include "seqtag/eval.hpp"
#include "seqtag/synth.hpp"
#include "seqtag/training.hpp"

struct seqtag_dataset {
  seqtag::Dataset data;
  std::vector<std::string> warnings;
  std::string classes;
};

struct seqtag_config {
  seqtag::TrainConfig config;
  std::string text;
};

struct seqtag_model {
  seqtag::Checkpoint checkpoint;
  std::string classes;
};

struct seqtag_report {
  seqtag::eval::Metrics metrics;
  std::string text;
  std::string json;
};

struct seqtag_table {
  seqtag::EmbeddingTable table;
};

namespace {

thread_local std::string g_last_error;

seqtag_status StatusOf(seqtag::ErrorKind kind) {
  using seqtag::ErrorKind;
  switch (kind) {
    case ErrorKind::kArgument: return SEQTAG_ERR_ARGUMENT;
    case ErrorKind::kParse: return SEQTAG_ERR_PARSE;
    case ErrorKind::kValidation: return SEQTAG_ERR_VALIDATION;
    case ErrorKind::kFormat: return SEQTAG_ERR_FORMAT;
    case ErrorKind::kConfig: return SEQTAG_ERR_CONFIG;
    case ErrorKind::kNumeric: return SEQTAG_ERR_NUMERIC;
    case ErrorKind::kIo: return SEQTAG_ERR_IO;
    case ErrorKind::kIntegrity: return SEQTAG_ERR_INTEGRITY;
    case ErrorKind::kVersion: return SEQTAG_ERR_VERSION;
    case ErrorKind::kContract: return SEQTAG_ERR_CONTRACT;
  }
  return SEQTAG_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes.
template <typename Fn>
seqtag_status Guard(Fn&& body) {
  try {
    body();
    g_last_error.clear();
    return SEQTAG_OK;
  } catch (const seqtag::Error& e) {
    g_last_error = e.what();
    return StatusOf(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return SEQTAG_ERR_INTERNAL;
}

void Require(bool cond, const char* what) {
  if (!cond) seqtag::Fail(seqtag::ErrorKind::kArgument, what);
}

std::string JoinClasses(const seqtag::TagScheme& scheme) {
  std::string out;
  for (const std::string& c : scheme.classes()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

seqtag::TagScheme SchemeFromList(const char* classes) {
  std::vector<std::string> names;
  for (auto part : seqtag::internal::SplitOn(classes, ',')) {
    auto t = seqtag::internal::Trim(part);
    if (!t.empty()) names.emplace_back(t);
  }
  return seqtag::TagScheme(std::move(names));
}

seqtag_dataset* Wrap(seqtag::Dataset data, std::vector<std::string> warnings = {}) {
  auto* out = new seqtag_dataset{std::move(data), std::move(warnings), {}};
  out->classes = JoinClasses(out->data.scheme);
  return out;
}

std::vector<const seqtag::Dataset*> Unwrap(const seqtag_dataset* const* datasets, size_t n) {
  Require(datasets != nullptr || n == 0, "dataset list is null");
  std::vector<const seqtag::Dataset*> out;
  for (size_t i = 0; i < n; ++i) {
    Require(datasets[i] != nullptr, "null dataset in list");
    out.push_back(&datasets[i]->data);
  }
  return out;
}

std::vector<seqtag::EmbeddingTable> UnwrapTables(const seqtag_table* const* tables, size_t n) {
  Require(tables != nullptr || n == 0, "table list is null");
  std::vector<seqtag::EmbeddingTable> out;
  for (size_t i = 0; i < n; ++i) {
    Require(tables[i] != nullptr, "null table in list");
    out.push_back(tables[i]->table);
  }
  return out;
}

}  // namespace

extern "C" {

const char* seqtag_version(void) { return "1.0.0"; }

const char* seqtag_last_error(void) { return g_last_error.c_str(); }

const char* seqtag_status_name(seqtag_status status) {
  switch (status) {
    case SEQTAG_OK: return "ok";
    case SEQTAG_ERR_ARGUMENT: return "argument error";
    case SEQTAG_ERR_PARSE: return "parse error";
    case SEQTAG_ERR_VALIDATION: return "validation error";
    case SEQTAG_ERR_FORMAT: return "format error";
    case SEQTAG_ERR_CONFIG: return "config error";
    case SEQTAG_ERR_NUMERIC: return "numeric error";
    case SEQTAG_ERR_IO: return "i/o error";
    case SEQTAG_ERR_INTEGRITY: return "integrity error";
    case SEQTAG_ERR_VERSION: return "unsupported version";
    case SEQTAG_ERR_CONTRACT: return "contract violation";
    case SEQTAG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// ---- datasets ----

seqtag_status seqtag_dataset_parse(const char* text, size_t length, const char* classes,
                                   seqtag_dataset** out) {
  return Guard([&] {
    Require(out != nullptr && (text != nullptr || length == 0), "null argument");
    std::string_view view(text == nullptr ? "" : text, length);
    seqtag::TagScheme scheme = classes ? SchemeFromList(classes) : seqtag::InferScheme(view);
    seqtag::ParseResult r = seqtag::ParseConll(view, scheme);
    *out = Wrap(std::move(r.data), std::move(r.warnings));
  });
}

seqtag_status seqtag_dataset_read(const char* path, const char* classes, seqtag_dataset** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    const std::string text = seqtag::internal::ReadFile(path);
    seqtag::TagScheme scheme = classes ? SchemeFromList(classes) : seqtag::InferScheme(text);
    try {
      seqtag::ParseResult r = seqtag::ParseConll(text, scheme);
      *out = Wrap(std::move(r.data), std::move(r.warnings));
    } catch (const seqtag::Error& e) {
      seqtag::Fail(e.kind(), std::string(path) + ": " + e.what());
    }
  });
}

seqtag_status seqtag_dataset_read_raw(const char* path, const char* classes, seqtag_dataset** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    seqtag::TagScheme scheme = classes ? SchemeFromList(classes) : seqtag::TagScheme();
    *out = Wrap(seqtag::SplitWhitespace(seqtag::internal::ReadFile(path), scheme));
  });
}

seqtag_status seqtag_dataset_write(const seqtag_dataset* data, const char* path) {
  return Guard([&] {
    Require(data != nullptr && path != nullptr, "null argument");
    seqtag::WriteConllFile(data->data, path);
  });
}

size_t seqtag_dataset_sentences(const seqtag_dataset* data) {
  return data == nullptr ? 0 : data->data.size();
}

size_t seqtag_dataset_tokens(const seqtag_dataset* data) {
  if (data == nullptr) return 0;
  size_t n = 0;
  for (const auto& s : data->data.sentences) n += s.size();
  return n;
}

const char* seqtag_dataset_classes(const seqtag_dataset* data) {
  return data == nullptr ? "" : data->classes.c_str();
}

size_t seqtag_dataset_warning_count(const seqtag_dataset* data) {
  return data == nullptr ? 0 : data->warnings.size();
}

const char* seqtag_dataset_warning(const seqtag_dataset* data, size_t index) {
  if (data == nullptr || index >= data->warnings.size()) return nullptr;
  return data->warnings[index].c_str();
}

void seqtag_dataset_free(seqtag_dataset* data) { delete data; }

// ---- config ----

seqtag_status seqtag_config_new(seqtag_config** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = new seqtag_config{};
  });
}

seqtag_status seqtag_config_read(seqtag_config* config, const char* path) {
  return Guard([&] {
    Require(config != nullptr && path != nullptr, "null argument");
    seqtag::TrainConfig parsed = seqtag::ParseConfig(seqtag::internal::ReadFile(path), config->config);
    config->config = std::move(parsed);
  });
}

seqtag_status seqtag_config_set(seqtag_config* config, const char* key, const char* value) {
  return Guard([&] {
    Require(config != nullptr && key != nullptr && value != nullptr, "null argument");
    seqtag::TrainConfig copy = config->config;
    seqtag::SetConfigValue(copy, key, value);
    config->config = std::move(copy);
  });
}

const char* seqtag_config_text(seqtag_config* config) {
  if (config == nullptr) return "";
  config->text = seqtag::FormatConfig(config->config);
  return config->text.c_str();
}

void seqtag_config_free(seqtag_config* config) { delete config; }

// ---- models ----

seqtag_status seqtag_train(const seqtag_config* config, const seqtag_dataset* train,
                           const seqtag_dataset* extra_vocab, seqtag_epoch_fn on_epoch, void* user,
                           seqtag_model** out) {
  return Guard([&] {
    Require(config != nullptr && train != nullptr && out != nullptr, "null argument");
    const seqtag::TrainConfig& c = config->config;
    if (!c.classes.empty() && seqtag::TagScheme(c.classes) != train->data.scheme) {
      seqtag::Fail(seqtag::ErrorKind::kValidation,
                   "training data classes (" + train->classes +
                       ") differ from the configured classes");
    }
    seqtag::EpochCallback cb;
    if (on_epoch != nullptr) {
      cb = [&](const seqtag::EpochReport& r) { on_epoch(r.epoch, r.train_loss, r.validation_f1, user); };
    }
    auto* model = new seqtag_model{
        seqtag::Train(c, train->data, extra_vocab ? &extra_vocab->data : nullptr, cb), {}};
    model->classes = JoinClasses(model->checkpoint.scheme);
    *out = model;
  });
}

seqtag_status seqtag_model_save(const seqtag_model* model, const char* path) {
  return Guard([&] {
    Require(model != nullptr && path != nullptr, "null argument");
    seqtag::SaveCheckpoint(model->checkpoint, path);
  });
}

seqtag_status seqtag_model_load(const char* path, seqtag_model** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    auto* model = new seqtag_model{seqtag::LoadCheckpoint(path), {}};
    model->classes = JoinClasses(model->checkpoint.scheme);
    *out = model;
  });
}

seqtag_status seqtag_model_tag(const seqtag_model* model, const seqtag_dataset* input,
                               seqtag_dataset** out) {
  return Guard([&] {
    Require(model != nullptr && input != nullptr && out != nullptr, "null argument");
    *out = Wrap(seqtag::Tag(model->checkpoint, input->data));
  });
}

const char* seqtag_model_classes(const seqtag_model* model) {
  return model == nullptr ? "" : model->classes.c_str();
}

const char* seqtag_model_variant(const seqtag_model* model) {
  if (model == nullptr) return "";
  return seqtag::VariantName(model->checkpoint.model.shape.variant).data();
}

int seqtag_model_best_epoch(const seqtag_model* model) {
  return model == nullptr ? -1 : model->checkpoint.best_epoch;
}

size_t seqtag_model_epochs(const seqtag_model* model) {
  return model == nullptr ? 0 : model->checkpoint.validation_f1.size();
}

double seqtag_model_validation_f1(const seqtag_model* model, size_t epoch) {
  if (model == nullptr || epoch >= model->checkpoint.validation_f1.size()) return -1.0;
  return model->checkpoint.validation_f1[epoch];
}

void seqtag_model_free(seqtag_model* model) { delete model; }

// ---- evaluation ----

seqtag_status seqtag_evaluate(const seqtag_dataset* gold, const seqtag_dataset* pred,
                              seqtag_report** out) {
  return Guard([&] {
    Require(gold != nullptr && out != nullptr, "null argument");
    auto counts = pred ? seqtag::eval::StrictCounts(gold->data, pred->data)
                       : seqtag::eval::StrictCounts(gold->data);
    auto* report = new seqtag_report{seqtag::eval::Summarize(counts), {}, {}};
    report->text = seqtag::eval::FormatReport(report->metrics);
    report->json = seqtag::eval::FormatJson(report->metrics);
    *out = report;
  });
}

const char* seqtag_report_text(const seqtag_report* report) {
  return report == nullptr ? "" : report->text.c_str();
}

const char* seqtag_report_json(const seqtag_report* report) {
  return report == nullptr ? "" : report->json.c_str();
}

double seqtag_report_micro_f1(const seqtag_report* report) {
  return report == nullptr ? 0.0 : report->metrics.aggregate.prf.f1;
}

void seqtag_report_free(seqtag_report* report) { delete report; }

// ---- embeddings ----

void seqtag_glove_defaults(seqtag_glove_params* params) {
  if (params == nullptr) return;
  const seqtag::GloveParams d;
  *params = {d.dim, d.window, d.x_max, d.alpha, d.learning_rate, d.iterations,
             d.min_count, d.seed, d.threads};
}

seqtag_status seqtag_glove_train(const char* corpus_path, const seqtag_glove_params* params,
                                 seqtag_table** out, double* final_objective) {
  return Guard([&] {
    Require(corpus_path != nullptr && params != nullptr && out != nullptr, "null argument");
    seqtag::GloveParams p;
    p.dim = params->dim;
    p.window = params->window;
    p.x_max = params->x_max;
    p.alpha = params->alpha;
    p.learning_rate = params->learning_rate;
    p.iterations = params->iterations;
    p.min_count = params->min_count;
    p.seed = params->seed;
    p.threads = params->threads;
    auto corpus = seqtag::ParseTokenizedCorpus(seqtag::internal::ReadFile(corpus_path));
    seqtag::GloveResult r = seqtag::TrainGlove(corpus, p);
    if (final_objective != nullptr) *final_objective = r.objective.back();
    *out = new seqtag_table{std::move(r.table)};
  });
}

seqtag_status seqtag_pseudo_corpus(const char* manifest_path, const char* out_path,
                                   size_t* sentences) {
  return Guard([&] {
    Require(manifest_path != nullptr && out_path != nullptr, "null argument");
    auto cells = seqtag::ReadManifestCells(manifest_path);
    auto corpus = seqtag::BuildPseudoCorpus(cells);
    seqtag::internal::WriteFile(out_path, seqtag::FormatTokenizedCorpus(corpus));
    if (sentences != nullptr) *sentences = corpus.size();
  });
}

seqtag_status seqtag_table_load(const char* path, seqtag_table** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = new seqtag_table{seqtag::LoadEmbeddingTable(path)};
  });
}

seqtag_status seqtag_table_save(const seqtag_table* table, const char* path) {
  return Guard([&] {
    Require(table != nullptr && path != nullptr, "null argument");
    seqtag::SaveEmbeddingTable(table->table, path);
  });
}

int seqtag_table_dim(const seqtag_table* table) { return table == nullptr ? 0 : table->table.dim; }

size_t seqtag_table_size(const seqtag_table* table) {
  return table == nullptr ? 0 : table->table.words.size();
}

seqtag_status seqtag_table_assemble(const seqtag_dataset* const* datasets, size_t n_datasets,
                                    const seqtag_table* const* tables, size_t n_tables,
                                    uint64_t seed, seqtag_table** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    auto sources = Unwrap(datasets, n_datasets);
    auto vocab = seqtag::Vocabulary::FromDatasets(sources);
    auto loaded = UnwrapTables(tables, n_tables);
    *out = new seqtag_table{seqtag::Assemble(vocab, loaded, seed)};
  });
}

seqtag_status seqtag_coverage(const seqtag_dataset* const* datasets, size_t n_datasets,
                              const seqtag_table* const* tables, size_t n_tables, long* total_words,
                              long* covered) {
  return Guard([&] {
    Require(total_words != nullptr && covered != nullptr, "null argument");
    auto sources = Unwrap(datasets, n_datasets);
    auto vocab = seqtag::Vocabulary::FromDatasets(sources);
    auto loaded = UnwrapTables(tables, n_tables);
    auto stats = seqtag::CoverageReport(vocab, seqtag::Assemble(vocab, loaded, 0));
    *total_words = stats.total_words;
    *covered = stats.covered;
  });
}

void seqtag_table_free(seqtag_table* table) { delete table; }

// ---- synth ----

seqtag_status seqtag_synth(const char* spec_path, seqtag_dataset** train, seqtag_dataset** test) {
  return Guard([&] {
    Require(train != nullptr && test != nullptr, "null argument");
    seqtag::synth::SynthSpec spec;
    if (spec_path != nullptr) spec = seqtag::synth::ParseSynthSpec(seqtag::internal::ReadFile(spec_path));
    seqtag::synth::Corpus corpus = seqtag::synth::Generate(spec);
    seqtag_dataset* a = Wrap(std::move(corpus.train));
    seqtag_dataset* b = Wrap(std::move(corpus.test));
    *train = a;
    *test = b;
  });
}

}  // extern "C"
