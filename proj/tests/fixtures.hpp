// Hand-built data shared by several tests.
#ifndef SEQTAG_TESTS_FIXTURES_HPP_
#define SEQTAG_TESTS_FIXTURES_HPP_

namespace fixture {

// Five sentences, columns surface / gold / pred, classes problem and drug.
//
//   1: gold problem (1,5), pred problem (2,5)        boundary mismatch
//   2: drugs (1,2) and (3,4) both found
//   3: gold drug (0,2), pred drug (0,1); problem (3,4) found
//   4: gold problem (1,2) and drug (3,4) missed; pred I-drug after O at 2
//      is repaired to a spurious drug (2,3)
//   5: gold drug (0,2), pred problem (0,2)           class mismatch
//
// problem: 3 gold, 3 predicted, TP 1, FP 2, FN 2
// drug:    5 gold, 4 predicted, TP 2, FP 2, FN 3
// pooled:  TP 3, FP 4, FN 5
inline constexpr const char* kStrictFive =
    "patient\tO\tO\n"
    "recently\tB-problem\tO\n"
    "diagnosed\tI-problem\tB-problem\n"
    "abdominal\tI-problem\tI-problem\n"
    "carcinomatosis\tI-problem\tI-problem\n"
    "\n"
    "take\tO\tO\n"
    "aspirin\tB-drug\tB-drug\n"
    "and\tO\tO\n"
    "ibuprofen\tB-drug\tB-drug\n"
    "\n"
    "albuterol\tB-drug\tB-drug\n"
    "sulfate\tI-drug\tO\n"
    "for\tO\tO\n"
    "fever\tB-problem\tB-problem\n"
    "\n"
    "no\tO\tO\n"
    "pain\tB-problem\tO\n"
    "today\tO\tI-drug\n"
    "morphine\tB-drug\tO\n"
    "\n"
    "heparin\tB-drug\tB-problem\n"
    "infusion\tI-drug\tI-problem\n";

}  // namespace fixture

#endif  // SEQTAG_TESTS_FIXTURES_HPP_
