#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "seqtag/error.hpp"
#include "seqtag/eval.hpp"
#include "seqtag/random.hpp"

using namespace seqtag;
using eval::ClassCounts;

namespace {

Dataset Fixture() {
  const TagScheme scheme({"problem", "drug"});
  return ParseConll(fixture::kStrictFive, scheme).data;
}

Dataset GoldOnly(const Dataset& d) {
  Dataset out = d;
  for (auto& s : out.sentences)
    for (auto& t : s.tokens) t.pred.reset();
  return out;
}

Dataset PredAsGold(const Dataset& d) {
  Dataset out = d;
  for (auto& s : out.sentences)
    for (auto& t : s.tokens) {
      t.gold = t.pred;
      t.pred.reset();
    }
  return out;
}

// Set-intersection oracle over (sentence, start, end, class) triples.
std::vector<ClassCounts> OracleCounts(const Dataset& tagged) {
  std::vector<ClassCounts> out;
  for (const auto& name : tagged.scheme.classes()) out.push_back({name, 0, 0, 0, 0});
  std::set<std::tuple<int, int, int, int>> gold, pred;
  for (int s = 0; s < static_cast<int>(tagged.size()); ++s) {
    const Sentence& sent = tagged.sentences[static_cast<std::size_t>(s)];
    for (const EntitySpan& e : ExtractEntities(RepairBio(GoldTags(sent)))) gold.insert({s, e.start, e.end, e.cls});
    for (const EntitySpan& e : ExtractEntities(RepairBio(PredTags(sent)))) pred.insert({s, e.start, e.end, e.cls});
  }
  for (const auto& g : gold) ++out[static_cast<std::size_t>(std::get<3>(g))].true_entities;
  for (const auto& p : pred) {
    ClassCounts& c = out[static_cast<std::size_t>(std::get<3>(p))];
    if (gold.count(p)) ++c.tp;
    else ++c.fp;
  }
  for (auto& c : out) c.fn = c.true_entities - c.tp;
  return out;
}

}  // namespace

TEST_CASE("fixture counts") {
  const Dataset d = Fixture();
  const auto counts = eval::StrictCounts(d);
  REQUIRE(counts.size() == 2);
  CHECK(counts[0] == ClassCounts{"problem", 1, 2, 2, 3});
  CHECK(counts[1] == ClassCounts{"drug", 2, 2, 3, 5});
  CHECK(counts == OracleCounts(d));
  const eval::Metrics m = eval::Summarize(counts);
  CHECK(m.aggregate.counts.tp == 3);
  CHECK(m.aggregate.counts.fp == 4);
  CHECK(m.aggregate.counts.fn == 5);
  CHECK(m.aggregate.prf.precision == doctest::Approx(3.0 / 7.0));
  CHECK(m.aggregate.prf.recall == doctest::Approx(3.0 / 8.0));
  CHECK(m.aggregate.prf.f1 == doctest::Approx(0.4));
  CHECK(m.classes[1].prf.precision == doctest::Approx(0.5));
  CHECK(m.classes[1].prf.recall == doctest::Approx(0.4));
}

TEST_CASE("two-file form equals the three-column form") {
  const Dataset d = Fixture();
  CHECK(eval::StrictCounts(GoldOnly(d), PredAsGold(d)) == eval::StrictCounts(d));
}

TEST_CASE("boundary mismatch is one FP and one FN") {
  const TagScheme s({"problem"});
  const Dataset d = ParseConll(
                        "recently\tB-problem\tO\ndiagnosed\tI-problem\tB-problem\n"
                        "abdominal\tI-problem\tI-problem\ncarcinomatosis\tI-problem\tI-problem\n",
                        s)
                        .data;
  CHECK(eval::StrictCounts(d)[0] == ClassCounts{"problem", 0, 1, 1, 1});
}

TEST_CASE("perfect prediction and gold against itself") {
  Dataset d = Fixture();
  for (auto& s : d.sentences)
    for (auto& t : s.tokens) t.pred = t.gold;
  for (const auto& m : eval::Summarize(eval::StrictCounts(d)).classes) {
    CHECK(m.counts.fp == 0);
    CHECK(m.counts.fn == 0);
    CHECK(m.prf.f1 == 1.0);
  }
}

TEST_CASE("prf arithmetic") {
  eval::Prf p = eval::ComputePrf({"x", 1, 1, 1, 2});
  CHECK(p.precision == 0.5);
  CHECK(p.recall == 0.5);
  CHECK(p.f1 == 0.5);
  p = eval::ComputePrf({"x", 0, 3, 2, 2});
  CHECK(p.precision == 0.0);
  CHECK(p.recall == 0.0);
  CHECK(p.f1 == 0.0);
  p = eval::ComputePrf({"x", 0, 0, 0, 0});
  CHECK(p.f1 == 0.0);
}

TEST_CASE("published per-class row is internally consistent") {
  const double p = 0.8169, r = 0.8788;
  CHECK(std::abs(2 * p * r / (p + r) - 0.8467) <= 1e-4);
}

TEST_CASE("structure mismatches name the first divergent sentence") {
  const Dataset d = Fixture();
  Dataset pred = PredAsGold(d);
  pred.sentences[2].tokens[1].surface = "sulphate";
  try {
    eval::StrictCounts(GoldOnly(d), pred);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("sentence 3") != std::string::npos);
  }
  pred = PredAsGold(d);
  pred.sentences.pop_back();
  CHECK_THROWS_AS(eval::StrictCounts(GoldOnly(d), pred), Error);
}

TEST_CASE("empty predictions over non-empty gold") {
  Dataset d = Fixture();
  for (auto& s : d.sentences)
    for (auto& t : s.tokens) t.pred = 0;
  const eval::Metrics m = eval::Summarize(eval::StrictCounts(d));
  for (const auto& c : m.classes) CHECK(c.prf.f1 == 0.0);
  CHECK(m.aggregate.prf.precision == 0.0);
}

TEST_CASE("micro F1 is invariant under sentence reordering") {
  Dataset d = Fixture();
  const double f = eval::MicroF1(d);
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    Shuffle(d.sentences, rng);
    CHECK(eval::MicroF1(d) == f);
  }
}

TEST_CASE("random predictions: counts match the set oracle and pool correctly") {
  const TagScheme s({"a", "b", "c"});
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Dataset d;
    d.scheme = s;
    for (int n = 0; n < 4; ++n) {
      Sentence sent;
      const int len = 1 + static_cast<int>(rng.Below(8));
      for (int t = 0; t < len; ++t) {
        sent.tokens.push_back({"w", static_cast<TagId>(rng.Below(7)), static_cast<TagId>(rng.Below(7))});
      }
      d.sentences.push_back(sent);
    }
    const auto counts = eval::StrictCounts(d);
    CHECK(counts == OracleCounts(d));
    long predicted = 0, tp = 0;
    for (const auto& sent : d.sentences) predicted += static_cast<long>(ExtractEntities(RepairBio(PredTags(sent))).size());
    for (const auto& c : counts) tp += c.tp;
    long tpfp = 0;
    for (const auto& c : counts) tpfp += c.tp + c.fp;
    CHECK(tp <= predicted);
    CHECK(tpfp == predicted);
    const eval::Metrics m = eval::Summarize(counts);
    long ptp = 0, pfp = 0, pfn = 0;
    for (const auto& c : counts) {
      ptp += c.tp;
      pfp += c.fp;
      pfn += c.fn;
    }
    CHECK(m.aggregate.prf.f1 == eval::ComputePrf({"", ptp, pfp, pfn, ptp + pfn}).f1);
  }
}

TEST_CASE("percent formatting rounds half up") {
  CHECK(eval::FormatPercent(0.84665) == "84.67");
  CHECK(eval::FormatPercent(0.5) == "50.00");
  CHECK(eval::FormatPercent(0.0) == "0.00");
  CHECK(eval::FormatPercent(1.0) == "100.00");
  CHECK(eval::FormatPercent(0.12345) == "12.35");
}

TEST_CASE("report has one row per class plus the aggregate") {
  const TagScheme s({"drug"});
  const Dataset d = ParseConll("aspirin\tB-drug\tB-drug\nand\tO\tO\n", s).data;
  const std::string text = eval::FormatReport(eval::Summarize(eval::StrictCounts(d)));
  CHECK(text.find("drug") != std::string::npos);
  CHECK(text.find("aggregate") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("json report keeps raw ratios") {
  const auto m = eval::Summarize(eval::StrictCounts(Fixture()));
  const auto j = nlohmann::json::parse(eval::FormatJson(m));
  CHECK(j["drug"]["tp"] == 2);
  CHECK(j["drug"]["fn"] == 3);
  CHECK(j["aggregate"]["precision"].get<double>() == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
  CHECK(j["problem"].contains("f1"));
}
