// seqtag command-line front end over the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqtag/seqtag.h"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kDataError = 2, kConfigError = 3, kNumericAbort = 4 };

struct Failure {
  int code;
};

int ExitFor(seqtag_status s) {
  switch (s) {
    case SEQTAG_OK: return kOk;
    case SEQTAG_ERR_CONFIG: return kConfigError;
    case SEQTAG_ERR_NUMERIC: return kNumericAbort;
    case SEQTAG_ERR_INTERNAL: return kFailure;
    default: return kDataError;
  }
}

void Check(seqtag_status s) {
  if (s == SEQTAG_OK) return;
  std::cerr << "seqtag: " << seqtag_status_name(s) << ": " << seqtag_last_error() << '\n';
  throw Failure{ExitFor(s)};
}

// Owning wrappers so early exits release handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
  Handle& operator=(Handle&& o) noexcept {
    std::swap(p, o.p);
    return *this;
  }
  ~Handle() { Free(p); }
  T** out() { return &p; }
};

using Dataset = Handle<seqtag_dataset, seqtag_dataset_free>;
using Config = Handle<seqtag_config, seqtag_config_free>;
using Model = Handle<seqtag_model, seqtag_model_free>;
using Report = Handle<seqtag_report, seqtag_report_free>;
using Table = Handle<seqtag_table, seqtag_table_free>;

void PrintWarnings(const seqtag_dataset* d, const std::string& path) {
  const size_t n = seqtag_dataset_warning_count(d);
  for (size_t i = 0; i < n && i < 20; ++i) {
    std::cerr << "warning: " << path << ": " << seqtag_dataset_warning(d, i) << '\n';
  }
  if (n > 20) std::cerr << "warning: " << path << ": " << (n - 20) << " more\n";
}

Dataset ReadDataset(const std::string& path, const char* classes) {
  Dataset d;
  Check(seqtag_dataset_read(path.c_str(), classes, d.out()));
  PrintWarnings(d.p, path);
  return d;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "seqtag: cannot write " << path << '\n';
    throw Failure{kDataError};
  }
}

// ---- train ----

struct TrainArgs {
  std::string config, train, test, out = "model.seqtag";
  std::vector<std::string> sets;
  std::string variant, embeddings;
  int epochs = 0;
  bool quiet = false;
};

void OnEpoch(int epoch, double loss, double f1, void* user) {
  if (*static_cast<bool*>(user)) return;
  std::fprintf(stderr, "epoch %3d  loss %.4f  valid F1 %.4f\n", epoch + 1, loss, f1);
}

void RunTrain(TrainArgs& a) {
  Config cfg;
  Check(seqtag_config_new(cfg.out()));
  if (!a.config.empty()) Check(seqtag_config_read(cfg.p, a.config.c_str()));
  if (!a.variant.empty()) Check(seqtag_config_set(cfg.p, "variant", a.variant.c_str()));
  if (!a.embeddings.empty()) Check(seqtag_config_set(cfg.p, "embeddings", a.embeddings.c_str()));
  if (a.epochs > 0) Check(seqtag_config_set(cfg.p, "epochs", std::to_string(a.epochs).c_str()));
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "seqtag: --set expects key=value, got '" << kv << "'\n";
      throw Failure{kConfigError};
    }
    Check(seqtag_config_set(cfg.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  if (const char* seed = std::getenv("SEQTAG_SEED"); seed != nullptr && *seed != '\0') {
    Check(seqtag_config_set(cfg.p, "seed", seed));
  }

  // An explicit class list in the config fixes the scheme; otherwise it is
  // inferred from the training file and imposed on the test file.
  std::string classes;
  {
    const std::string text = seqtag_config_text(cfg.p);
    const auto pos = text.find("classes = ");
    if (pos != std::string::npos) {
      const auto end = text.find('\n', pos);
      classes = text.substr(pos + 10, end - pos - 10);
    }
  }
  Dataset train = ReadDataset(a.train, classes.empty() ? nullptr : classes.c_str());
  Dataset test;
  if (!a.test.empty()) test = ReadDataset(a.test, seqtag_dataset_classes(train.p));

  bool quiet = a.quiet;
  Model model;
  Check(seqtag_train(cfg.p, train.p, test.p, OnEpoch, &quiet, model.out()));
  Check(seqtag_model_save(model.p, a.out.c_str()));
  const int best = seqtag_model_best_epoch(model.p);
  std::printf("saved %s (best epoch %d, validation F1 %.4f)\n", a.out.c_str(), best + 1,
              seqtag_model_validation_f1(model.p, static_cast<size_t>(best)));
}

// ---- tag ----

struct TagArgs {
  std::string model, input, out;
  bool raw = false;
};

void RunTag(const TagArgs& a) {
  Model model;
  Check(seqtag_model_load(a.model.c_str(), model.out()));
  const char* classes = seqtag_model_classes(model.p);
  Dataset input;
  if (a.raw) {
    Check(seqtag_dataset_read_raw(a.input.c_str(), classes, input.out()));
  } else {
    input = ReadDataset(a.input, classes);
  }
  Dataset tagged;
  Check(seqtag_model_tag(model.p, input.p, tagged.out()));
  const std::string out = a.out.empty() || a.out == "-" ? "/dev/stdout" : a.out;
  std::fflush(stdout);
  Check(seqtag_dataset_write(tagged.p, out.c_str()));
}

// ---- evaluate ----

struct EvalArgs {
  std::string gold, pred, json;
};

void RunEvaluate(const EvalArgs& a) {
  Dataset gold = ReadDataset(a.gold, nullptr);
  Dataset pred;
  if (!a.pred.empty()) pred = ReadDataset(a.pred, seqtag_dataset_classes(gold.p));
  Report report;
  Check(seqtag_evaluate(gold.p, pred.p, report.out()));
  std::fputs(seqtag_report_text(report.p), stdout);
  if (!a.json.empty()) WriteText(a.json, std::string(seqtag_report_json(report.p)) + "\n");
}

// ---- embeddings ----

struct EmbedTrainArgs {
  std::string corpus, out;
  seqtag_glove_params params{};
};

void RunEmbedTrain(const EmbedTrainArgs& a) {
  Table table;
  double objective = 0.0;
  Check(seqtag_glove_train(a.corpus.c_str(), &a.params, table.out(), &objective));
  Check(seqtag_table_save(table.p, a.out.c_str()));
  std::printf("saved %s (%zu words, dim %d, final objective %.6g)\n", a.out.c_str(),
              seqtag_table_size(table.p), seqtag_table_dim(table.p), objective);
}

struct TablesArgs {
  std::vector<std::string> data, tables;
  std::string out;
  unsigned long long seed = 1;
};

std::vector<Dataset> ReadAll(const std::vector<std::string>& paths) {
  std::vector<Dataset> out;
  std::string classes;
  for (const std::string& p : paths) {
    out.push_back(ReadDataset(p, classes.empty() ? nullptr : classes.c_str()));
    if (classes.empty()) classes = seqtag_dataset_classes(out.back().p);
  }
  return out;
}

std::vector<Table> LoadAll(const std::vector<std::string>& paths) {
  std::vector<Table> out;
  for (const std::string& p : paths) {
    out.emplace_back();
    Check(seqtag_table_load(p.c_str(), out.back().out()));
  }
  return out;
}

template <typename H, typename T>
std::vector<const T*> Raw(const std::vector<H>& handles) {
  std::vector<const T*> out;
  for (const H& h : handles) out.push_back(h.p);
  return out;
}

void RunEmbedConcat(const TablesArgs& a) {
  auto data = ReadAll(a.data);
  auto tables = LoadAll(a.tables);
  auto d = Raw<Dataset, seqtag_dataset>(data);
  auto t = Raw<Table, seqtag_table>(tables);
  Table out;
  Check(seqtag_table_assemble(d.data(), d.size(), t.data(), t.size(), a.seed, out.out()));
  Check(seqtag_table_save(out.p, a.out.c_str()));
  std::printf("saved %s (%zu words, dim %d)\n", a.out.c_str(), seqtag_table_size(out.p),
              seqtag_table_dim(out.p));
}

void RunCoverage(const TablesArgs& a) {
  auto data = ReadAll(a.data);
  auto tables = LoadAll(a.tables);
  auto d = Raw<Dataset, seqtag_dataset>(data);
  auto t = Raw<Table, seqtag_table>(tables);
  long total = 0, covered = 0;
  Check(seqtag_coverage(d.data(), d.size(), t.data(), t.size(), &total, &covered));
  const double pct = total == 0 ? 0.0 : 100.0 * static_cast<double>(covered) / static_cast<double>(total);
  std::printf("%ld of %ld words covered (%.2f%%)\n", covered, total, pct);
}

struct PseudoArgs {
  std::string manifest, out;
};

void RunPseudoCorpus(const PseudoArgs& a) {
  size_t n = 0;
  Check(seqtag_pseudo_corpus(a.manifest.c_str(), a.out.c_str(), &n));
  std::printf("wrote %zu pseudo-sentences to %s\n", n, a.out.c_str());
}

// ---- synth ----

struct SynthArgs {
  std::string spec, train, test;
};

void RunSynth(const SynthArgs& a) {
  Dataset train, test;
  Check(seqtag_synth(a.spec.empty() ? nullptr : a.spec.c_str(), train.out(), test.out()));
  Check(seqtag_dataset_write(train.p, a.train.c_str()));
  Check(seqtag_dataset_write(test.p, a.test.c_str()));
  std::printf("train %zu sentences, test %zu sentences\n", seqtag_dataset_sentences(train.p),
              seqtag_dataset_sentences(test.p));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqtag: neural sequence tagging for health-domain NER"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(seqtag_version()));

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "train a tagger on a CoNLL file");
  c_train->add_option("--config", train.config, "key = value config file");
  c_train->add_option("--train", train.train, "training CoNLL file")->required();
  c_train->add_option("--test", train.test, "test CoNLL file (adds its words to the vocabulary)");
  c_train->add_option("--out", train.out, "checkpoint path")->capture_default_str();
  c_train->add_option("--set", train.sets, "override a config key (key=value)");
  c_train->add_option("--variant", train.variant, "crf, blstm or blstm_crf");
  c_train->add_option("--embeddings", train.embeddings, "comma-separated embedding tables");
  c_train->add_option("--epochs", train.epochs, "number of epochs");
  c_train->add_flag("--quiet", train.quiet, "no per-epoch progress");

  TagArgs tag;
  auto* c_tag = app.add_subcommand("tag", "tag sentences with a trained model");
  c_tag->add_option("--model", tag.model, "checkpoint")->required();
  c_tag->add_option("--input", tag.input, "CoNLL file, or raw text with --raw")->required();
  c_tag->add_option("--out", tag.out, "output CoNLL file (default stdout)");
  c_tag->add_flag("--raw", tag.raw, "input is whitespace-tokenized text, one sentence per line");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "strict entity-level precision, recall and F1");
  c_eval->add_option("--gold", ev.gold, "gold CoNLL file (third column used when --pred is absent)")
      ->required();
  c_eval->add_option("--pred", ev.pred, "predicted CoNLL file");
  c_eval->add_option("--json", ev.json, "also write the report as JSON");

  EmbedTrainArgs et;
  seqtag_glove_defaults(&et.params);
  auto* c_et = app.add_subcommand("embed-train", "train GloVe vectors on a tokenized corpus");
  c_et->add_option("--corpus", et.corpus, "one sentence per line")->required();
  c_et->add_option("--out", et.out, "embedding table")->required();
  c_et->add_option("--dim", et.params.dim)->capture_default_str();
  c_et->add_option("--window", et.params.window)->capture_default_str();
  c_et->add_option("--x-max", et.params.x_max)->capture_default_str();
  c_et->add_option("--alpha", et.params.alpha)->capture_default_str();
  c_et->add_option("--lr", et.params.learning_rate)->capture_default_str();
  c_et->add_option("--iterations", et.params.iterations)->capture_default_str();
  c_et->add_option("--min-count", et.params.min_count)->capture_default_str();
  c_et->add_option("--seed", et.params.seed)->capture_default_str();
  c_et->add_option("--threads", et.params.threads)->capture_default_str();

  TablesArgs concat;
  auto* c_concat = app.add_subcommand("embed-concat", "assemble one table for a corpus vocabulary");
  c_concat->add_option("--data", concat.data, "CoNLL files defining the vocabulary")->required();
  c_concat->add_option("--table", concat.tables, "tables, concatenated in order")->required();
  c_concat->add_option("--out", concat.out, "output table")->required();
  c_concat->add_option("--seed", concat.seed, "seed for back-filled vectors")->capture_default_str();

  TablesArgs cov;
  auto* c_cov = app.add_subcommand("coverage", "share of vocabulary words found in the tables");
  c_cov->add_option("--data", cov.data, "CoNLL files defining the vocabulary")->required();
  c_cov->add_option("--table", cov.tables, "embedding tables")->required();

  PseudoArgs pc;
  auto* c_pc = app.add_subcommand("pseudo-corpus", "pseudo-sentences from structured tables");
  c_pc->add_option("--manifest", pc.manifest, "lines of `table.csv<TAB>column`")->required();
  c_pc->add_option("--out", pc.out, "tokenized corpus")->required();

  SynthArgs sy;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic NER corpus");
  c_synth->add_option("--spec", sy.spec, "key = value spec (defaults when omitted)");
  c_synth->add_option("--out-train", sy.train, "training CoNLL output")->required();
  c_synth->add_option("--out-test", sy.test, "test CoNLL output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (c_train->parsed()) RunTrain(train);
    else if (c_tag->parsed()) RunTag(tag);
    else if (c_eval->parsed()) RunEvaluate(ev);
    else if (c_et->parsed()) RunEmbedTrain(et);
    else if (c_concat->parsed()) RunEmbedConcat(concat);
    else if (c_cov->parsed()) RunCoverage(cov);
    else if (c_pc->parsed()) RunPseudoCorpus(pc);
    else if (c_synth->parsed()) RunSynth(sy);
  } catch (const Failure& f) {
    return f.code;
  }
  return kOk;
}
