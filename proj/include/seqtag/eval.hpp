#ifndef SEQTAG_EVAL_HPP_
#define SEQTAG_EVAL_HPP_

#include <string>
#include <vector>

#include "seqtag/corpus.hpp"

namespace seqtag::eval {

struct ClassCounts {
  std::string name;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long true_entities = 0;

  bool operator==(const ClassCounts&) const = default;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassMetrics {
  ClassCounts counts;
  Prf prf;
};

struct Metrics {
  std::vector<ClassMetrics> classes;
  ClassMetrics aggregate;  // micro average over pooled counts
};

// Strict span matching: a predicted entity is a true positive only when a
// gold entity has the same class and the same boundaries. Predicted tags
// are repaired before spans are read; FN is derived as true_entities - TP.
std::vector<ClassCounts> StrictCounts(const Dataset& gold, const Dataset& pred);

// Uses the gold and pred columns of one dataset.
std::vector<ClassCounts> StrictCounts(const Dataset& tagged);

Prf ComputePrf(const ClassCounts& counts);
Metrics Summarize(const std::vector<ClassCounts>& counts);

// Percentages rounded half-up to two decimals.
std::string FormatPercent(double ratio);
std::string FormatReport(const Metrics& metrics);
// Flat key/value JSON: one object per class plus "aggregate".
std::string FormatJson(const Metrics& metrics);

// Micro F1 of the pred column against the gold column.
double MicroF1(const Dataset& tagged);

}  // namespace seqtag::eval

#endif  // SEQTAG_EVAL_HPP_
