#include "seqtag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seqtag/error.hpp"

namespace seqtag::eval {

namespace {

std::vector<EntitySpan> GoldSpans(std::vector<TagId> tags) {
  // Gold is trusted as-is; invalid I runs are read as if repaired.
  return ExtractEntities(RepairBio(tags));
}

void Accumulate(const std::vector<EntitySpan>& gold,
                const std::vector<EntitySpan>& pred,
                std::vector<ClassCounts>& counts) {
  std::set<EntitySpan> gold_set(gold.begin(), gold.end());
  for (const EntitySpan& g : gold) ++counts[static_cast<std::size_t>(g.cls)].true_entities;
  for (const EntitySpan& p : pred) {
    ClassCounts& c = counts[static_cast<std::size_t>(p.cls)];
    if (gold_set.count(p) != 0) {
      ++c.tp;
    } else {
      ++c.fp;
    }
  }
}

std::vector<ClassCounts> EmptyCounts(const TagScheme& scheme) {
  std::vector<ClassCounts> counts;
  for (const std::string& name : scheme.classes()) counts.push_back({name});
  return counts;
}

void DeriveFalseNegatives(std::vector<ClassCounts>& counts) {
  for (ClassCounts& c : counts) c.fn = c.true_entities - c.tp;
}

}  // namespace

std::vector<ClassCounts> StrictCounts(const Dataset& gold, const Dataset& pred) {
  if (gold.scheme != pred.scheme) {
    Fail(ErrorKind::kValidation, "gold and prediction use different tag schemes");
  }
  if (gold.size() != pred.size()) {
    Fail(ErrorKind::kValidation,
         "gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
             std::to_string(pred.size()) + "; first divergent sentence " +
             std::to_string(std::min(gold.size(), pred.size()) + 1));
  }
  std::vector<ClassCounts> counts = EmptyCounts(gold.scheme);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Sentence& g = gold.sentences[i];
    const Sentence& p = pred.sentences[i];
    bool same = g.size() == p.size();
    for (std::size_t t = 0; same && t < g.size(); ++t) {
      same = g.tokens[t].surface == p.tokens[t].surface;
    }
    if (!same) {
      Fail(ErrorKind::kValidation,
           "gold and prediction diverge at sentence " + std::to_string(i + 1));
    }
    // A prediction file may carry its tags in the gold column.
    std::vector<TagId> pred_tags;
    for (const Token& t : p.tokens) {
      auto tag = t.pred ? t.pred : t.gold;
      if (!tag) Fail(ErrorKind::kValidation, "sentence " + std::to_string(i + 1) + " has untagged tokens");
      pred_tags.push_back(*tag);
    }
    Accumulate(GoldSpans(GoldTags(g)), ExtractEntities(RepairBio(pred_tags)), counts);
  }
  DeriveFalseNegatives(counts);
  return counts;
}

std::vector<ClassCounts> StrictCounts(const Dataset& tagged) {
  std::vector<ClassCounts> counts = EmptyCounts(tagged.scheme);
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    const Sentence& s = tagged.sentences[i];
    for (const Token& t : s.tokens) {
      if (!t.pred) Fail(ErrorKind::kValidation, "sentence " + std::to_string(i + 1) + " has untagged tokens");
    }
    Accumulate(GoldSpans(GoldTags(s)), ExtractEntities(RepairBio(PredTags(s))), counts);
  }
  DeriveFalseNegatives(counts);
  return counts;
}

Prf ComputePrf(const ClassCounts& c) {
  Prf m;
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

Metrics Summarize(const std::vector<ClassCounts>& counts) {
  Metrics m;
  m.aggregate.counts.name = "aggregate";
  for (const ClassCounts& c : counts) {
    m.classes.push_back({c, ComputePrf(c)});
    m.aggregate.counts.tp += c.tp;
    m.aggregate.counts.fp += c.fp;
    m.aggregate.counts.fn += c.fn;
    m.aggregate.counts.true_entities += c.true_entities;
  }
  m.aggregate.prf = ComputePrf(m.aggregate.counts);
  return m;
}

std::string FormatPercent(double ratio) {
  // Scale to hundredths of a percent in integers; the 1e-9 absorbs binary
  // representation error so that 0.84665 rounds to 84.67.
  double hundredths = std::floor(ratio * 10000.0 + 0.5 + 1e-9);
  long v = static_cast<long>(hundredths);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%ld.%02ld", v / 100, v % 100);
  return buf;
}

std::string FormatReport(const Metrics& metrics) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %6s %6s %6s %10s %8s %8s\n", "class", "TP",
                "FP", "FN", "precision", "recall", "F1");
  out << line;
  auto row = [&](const ClassMetrics& c) {
    std::snprintf(line, sizeof(line), "%-16s %6ld %6ld %6ld %10s %8s %8s\n",
                  c.counts.name.c_str(), c.counts.tp, c.counts.fp, c.counts.fn,
                  FormatPercent(c.prf.precision).c_str(),
                  FormatPercent(c.prf.recall).c_str(), FormatPercent(c.prf.f1).c_str());
    out << line;
  };
  for (const ClassMetrics& c : metrics.classes) row(c);
  row(metrics.aggregate);
  return out.str();
}

std::string FormatJson(const Metrics& metrics) {
  nlohmann::ordered_json doc;
  auto entry = [](const ClassMetrics& c) {
    nlohmann::ordered_json e;
    e["tp"] = c.counts.tp;
    e["fp"] = c.counts.fp;
    e["fn"] = c.counts.fn;
    e["precision"] = c.prf.precision;
    e["recall"] = c.prf.recall;
    e["f1"] = c.prf.f1;
    return e;
  };
  for (const ClassMetrics& c : metrics.classes) doc[c.counts.name] = entry(c);
  doc["aggregate"] = entry(metrics.aggregate);
  return doc.dump(2) + "\n";
}

double MicroF1(const Dataset& tagged) {
  return Summarize(StrictCounts(tagged)).aggregate.prf.f1;
}

}  // namespace seqtag::eval
