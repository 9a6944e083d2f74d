#pragma once

#include <span>
#include <string>
#include <vector>

#include "nesum/corpus.hpp"

namespace nesum {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;

  /// Harmonic mean of p and r; 0 when p + r == 0.
  static Prf from_pr(double p, double r);

  friend bool operator==(const Prf&, const Prf&) = default;
};

struct MetricReport {
  Prf rouge1;
  Prf rouge2;
  Prf rougeL;
  Prf rougeNE;
};

/// Token subsequence carrying only B/I-tagged tokens, in source order.
using EntityTokenView = std::vector<std::string>;

/// N-gram overlap with precision, recall and F. The overlap is the clipped
/// multiset intersection: sum over distinct n-grams of
/// min(count_ref, count_cand). Comparisons are exact, case-sensitive token
/// equality; no stemming, stop words or synonyms. A side with fewer than n
/// tokens contributes no n-grams and a zero denominator yields 0 for that
/// component. Throws ArgumentError on n == 0.
Prf rouge_raw_n(std::span<const std::string> reference,
                std::span<const std::string> candidate, std::size_t n);

/// Longest-common-subsequence variant: precision = |LCS| / |candidate|,
/// recall = |LCS| / |reference|, zero denominators yield 0.
Prf rouge_raw_l(std::span<const std::string> reference,
                std::span<const std::string> candidate);

/// Filters tokens down to the B/I-tagged ones. Throws ArgumentError on a
/// length mismatch between tokens and tags.
EntityTokenView entity_view(const std::vector<std::string>& tokens,
                            const std::vector<IobTag>& tags);

/// Unigram overlap over entity-token views. When either view is empty the
/// whole result is 0/0/0. By default precision normalizes by the candidate
/// side; paper_literal flips the denominators (precision by reference).
Prf rouge_ne(const EntityTokenView& reference_view,
             const EntityTokenView& candidate_view, bool paper_literal = false);

/// Arithmetic mean of each of the 12 components over documents. F is averaged
/// directly, not recomputed from mean P and R. Throws ArgumentError on an
/// empty input.
MetricReport aggregate(std::span<const MetricReport> reports);

/// {"rouge1":{"p":..,"r":..,"f":..}, ...} with full double precision.
std::string report_to_json(const MetricReport& report);

}  // namespace nesum
