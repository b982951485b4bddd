#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mlrules/eval.hpp"
#include "mlrules/rulemodel.hpp"

namespace mlrules {

/// Label vectors of the examples a body covers and of those it does not. Each
/// example may carry an availability mask: labels already predicted for it by
/// earlier rules are unavailable and take no part in scoring a head.
struct CoverageSplit {
  std::vector<LabelVector> covered;
  std::vector<LabelVector> uncovered;
  /// Empty, or one mask per example (1 = label still unset).
  std::vector<LabelVector> covered_available;
  std::vector<LabelVector> uncovered_available;

  [[nodiscard]] std::size_t label_count() const;
  [[nodiscard]] bool available(bool in_covered, std::size_t row, std::size_t label) const;
  /// Throws ContractError on ragged vectors or masks of the wrong shape.
  void validate() const;
};

/// Labels still unset in at least one covered example, ascending.
std::vector<std::size_t> eligible_labels(const CoverageSplit& split);

enum class Polarity : std::uint8_t { PositiveOnly, Both };

struct MetricProperties {
  bool anti_monotonic = false;
  bool decomposable = false;
  friend bool operator==(const MetricProperties&, const MetricProperties&) = default;
};

/// Anti-monotonicity and decomposability of a metric under a strategy and averaging.
MetricProperties metric_properties(const Metric& m);

/// Cells assessed when `head` is scored on `split`: the head's labels on covered
/// examples (correct -> TP, wrong -> FP); under the full strategy also every
/// other available label of every example, as TN if absent and FN if present.
/// Rows are covered examples followed by uncovered ones.
CellGrid head_cells(const Head& head, const CoverageSplit& split, EvaluationStrategy strategy);

Score score_head(const Head& head, const CoverageSplit& split, const Metric& m);

/// True if (a, sa) ranks before (b, sb): higher score, then more labels, then the
/// smaller sorted label sequence, then value 1 before 0.
bool head_precedes(const Head& a, const Rational& sa, const Head& b, const Rational& sb);

struct SearchNode {
  Head head;
  Rational score;
  std::optional<std::size_t> parent;  ///< index into the trace
  bool expanded = false;
};

struct HeadSearchResult {
  Head head;
  Rational score;
  bool degenerate = false;
  std::size_t nodes_evaluated = 0;
  std::size_t nodes_pruned = 0;
  std::vector<SearchNode> trace;  ///< filled when requested
};

struct HeadSearchOptions {
  Polarity polarity = Polarity::Both;
  std::size_t oracle_bound = 10;
  bool record_trace = false;
  /// Refuse metrics the pruning is unsound for. Switched off only to look for
  /// counterexamples.
  bool require_sound = true;
};

/// Enumerates every head over the eligible labels. Throws ValidationError when
/// there are more eligible labels than options.oracle_bound.
HeadSearchResult exhaustive_best_head(const CoverageSplit& split, const Metric& m,
                                      const HeadSearchOptions& options = {});

/// Breadth-first search that adds one label per level, never scores a head twice
/// and does not expand a head that scores below the head it was generated from.
HeadSearchResult pruned_best_head(const CoverageSplit& split, const Metric& m,
                                  const HeadSearchOptions& options = {});

/// Scores the single-label heads only and merges all that reach the maximum.
HeadSearchResult decomposable_best_head(const CoverageSplit& split, const Metric& m,
                                        const HeadSearchOptions& options = {});

/// Best head that assigns exactly one label.
HeadSearchResult best_single_head(const CoverageSplit& split, const Metric& m,
                                  const HeadSearchOptions& options = {});

/// Picks the cheapest sound search for the metric: decomposable, then pruned,
/// then exhaustive.
HeadSearchResult best_head(const CoverageSplit& split, const Metric& m, const HeadSearchOptions& options = {});

/// "{quality,fashion=0}" style: names of labels set to 1 plain, 0-valued ones with "=0".
std::string head_set_text(const Head& h, const std::vector<std::string>& label_names);

/// Coverage CSV: a header of label names plus a "covered" column, then one 0/1 row
/// per example. Returns the split and stores the label names.
CoverageSplit read_coverage_csv(std::istream& in, std::vector<std::string>& label_names);

}  // namespace mlrules
