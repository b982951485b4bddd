#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlrules/data.hpp"
#include "mlrules/rational.hpp"
#include "mlrules/rulemodel.hpp"

namespace mlrules {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  [[nodiscard]] std::uint64_t total() const { return tp + fp + tn + fn; }

  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) { return a += b; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// One true label against one predicted label. Exactly one cell is 1.
/// (1,1) -> TP, (0,1) -> FP, (0,0) -> TN, (1,0) -> FN.
ConfusionMatrix atomic_confusion(std::uint8_t y, std::uint8_t yhat);

ConfusionMatrix micro_aggregate(std::span<const ConfusionMatrix> cs);

/// Counting used to select rules: a head assignment that matches the truth is a TP
/// whatever its value, a wrong one an FP. Labels the head abstains on are TN when
/// absent and FN when present.
ConfusionMatrix selection_confusion(const Head& head, const LabelVector& y);

/// selection_confusion for an example the rule covers; throws ContractError if
/// `context` and `features` are not covered by the rule's body.
ConfusionMatrix rule_selection_confusion(const Rule& r, std::span<const double> features,
                                         const LabelVector& y, const PredictionState& context);

enum class MetricKind : std::uint8_t { Precision, Recall, Hamming, FMeasure, SubsetAccuracy };
/// Partial: only the cells a head assigns. Full: abstentions count as predicted absent,
/// over covered and uncovered examples.
enum class EvaluationStrategy : std::uint8_t { Partial, Full };
enum class Averaging : std::uint8_t { Micro, LabelBased, ExampleBased, Macro };

struct Metric {
  MetricKind kind = MetricKind::Precision;
  Rational beta{1};  ///< only used by FMeasure
  EvaluationStrategy strategy = EvaluationStrategy::Partial;
  Averaging averaging = Averaging::Micro;

  static Metric precision() { return {}; }
  static Metric recall() { return {MetricKind::Recall}; }
  static Metric hamming() { return {MetricKind::Hamming}; }
  static Metric f_measure(Rational beta = Rational(1)) { return {MetricKind::FMeasure, beta}; }
  static Metric subset_accuracy() {
    return {MetricKind::SubsetAccuracy, Rational(1), EvaluationStrategy::Partial, Averaging::ExampleBased};
  }

  [[nodiscard]] Metric with(EvaluationStrategy s) const {
    Metric m = *this;
    m.strategy = s;
    return m;
  }
  [[nodiscard]] Metric with(Averaging a) const {
    Metric m = *this;
    m.averaging = a;
    return m;
  }

  /// Throws ValidationError for a negative beta or subset accuracy with a
  /// non-example-based averaging.
  void validate() const;

  friend bool operator==(const Metric&, const Metric&) = default;
};

/// Accepts precision, recall, hamming, f1, f(beta=x) (or f(β=x)), subset-accuracy,
/// each optionally followed by ":partial"/":full" and ":micro"/":label"/":example"/":macro".
Metric parse_metric(std::string_view text);
std::string metric_name(const Metric& m);
/// Comma-separated list of the accepted base names, for error messages.
std::string valid_metric_names();

struct Score {
  Rational value;
  /// The metric's denominator was zero everywhere; `value` is then 0.
  bool degenerate = false;

  friend bool operator==(const Score&, const Score&) = default;
};

/// Eqs. for precision, recall, Hamming accuracy and F-beta on one matrix. Subset
/// accuracy reads the matrix as one example: 1 iff it has no FP and no FN.
Score metric_value(const Metric& m, const ConfusionMatrix& c);

Score subset_accuracy(const std::vector<LabelVector>& truth, const std::vector<LabelVector>& predicted);

enum class Cell : std::uint8_t { None, TP, FP, TN, FN };

/// Assessed cells of an m x l evaluation, row = example, column = label.
/// Cells left at None take no part in any average.
class CellGrid {
public:
  CellGrid(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), cells_(rows * cols, Cell::None) {}

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] Cell at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, Cell v) { cells_[r * cols_ + c] = v; }

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Cell> cells_;
};

/// Aggregates a grid per the metric's averaging. Micro sums every cell. Label-,
/// example-based and macro averaging take the mean over columns, rows or single
/// cells, skipping groups whose denominator is zero; F-measure is then computed
/// from the averaged precision and recall. Subset accuracy is the share of rows
/// with at least one assessed cell that contain no FP and no FN.
Score aggregate_cells(const Metric& m, const CellGrid& grid);

/// Grid of atomic matrices for complete predictions.
CellGrid prediction_grid(const std::vector<LabelVector>& truth, const std::vector<LabelVector>& predicted);

Score evaluate_predictions(const std::vector<LabelVector>& truth, const std::vector<LabelVector>& predicted,
                           const Metric& m);

/// Throws ValidationError naming the first attribute (or the labels) where the
/// data's schema differs from the model's.
void check_schema_match(const Schema& model, const Schema& data);

/// Predicts every instance with `dl` and scores the predictions.
Score evaluate(const DecisionList& dl, const Dataset& d, const Metric& m);

}  // namespace mlrules
