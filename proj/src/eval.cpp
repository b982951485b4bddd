#include "mlrules/eval.hpp"

#include <algorithm>

#include "mlrules/errors.hpp"

namespace mlrules {

ConfusionMatrix atomic_confusion(std::uint8_t y, std::uint8_t yhat) {
  ConfusionMatrix c;
  if (y && yhat) c.tp = 1;
  else if (yhat) c.fp = 1;
  else if (y) c.fn = 1;
  else c.tn = 1;
  return c;
}

ConfusionMatrix micro_aggregate(std::span<const ConfusionMatrix> cs) {
  ConfusionMatrix sum;
  for (const auto& c : cs) sum += c;
  return sum;
}

ConfusionMatrix selection_confusion(const Head& head, const LabelVector& y) {
  ConfusionMatrix c;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (auto v = head.value_of(i)) {
      (*v == y[i] ? c.tp : c.fp) += 1;
    } else {
      (y[i] ? c.fn : c.tn) += 1;
    }
  }
  return c;
}

ConfusionMatrix rule_selection_confusion(const Rule& r, std::span<const double> features,
                                         const LabelVector& y, const PredictionState& context) {
  if (!covers(r.body, features, context)) throw ContractError("rule does not cover the example");
  return selection_confusion(r.head, y);
}

void Metric::validate() const {
  if (kind == MetricKind::FMeasure && beta < Rational(0)) throw ValidationError("F-measure beta must be >= 0");
  if (kind == MetricKind::SubsetAccuracy && averaging != Averaging::ExampleBased)
    throw ValidationError("subset accuracy is only defined with example-based averaging");
}

std::string valid_metric_names() { return "precision, recall, hamming, f1, f(beta=<x>), subset-accuracy"; }

Metric parse_metric(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto colon = text.find(':', start);
    parts.push_back(text.substr(start, colon == std::string_view::npos ? text.npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  Metric m;
  std::string_view base = parts[0];
  if (base == "precision") m = Metric::precision();
  else if (base == "recall") m = Metric::recall();
  else if (base == "hamming") m = Metric::hamming();
  else if (base == "f1") m = Metric::f_measure();
  else if (base == "subset-accuracy") m = Metric::subset_accuracy();
  else if (base.starts_with("f(") && base.ends_with(")")) {
    std::string_view arg = base.substr(2, base.size() - 3);
    std::size_t eq = arg.find('=');
    std::string_view name = eq == std::string_view::npos ? std::string_view{} : arg.substr(0, eq);
    if (name != "beta" && name != "β")
      throw ValidationError("unknown heuristic '" + std::string(text) + "'; valid: " + valid_metric_names());
    try {
      m = Metric::f_measure(Rational::parse(arg.substr(eq + 1)));
    } catch (const std::exception&) {
      throw ValidationError("bad beta in '" + std::string(text) + "'");
    }
  } else {
    throw ValidationError("unknown heuristic '" + std::string(text) + "'; valid: " + valid_metric_names());
  }
  for (std::size_t k = 1; k < parts.size(); ++k) {
    auto p = parts[k];
    if (p == "partial") m.strategy = EvaluationStrategy::Partial;
    else if (p == "full") m.strategy = EvaluationStrategy::Full;
    else if (p == "micro") m.averaging = Averaging::Micro;
    else if (p == "label") m.averaging = Averaging::LabelBased;
    else if (p == "example") m.averaging = Averaging::ExampleBased;
    else if (p == "macro") m.averaging = Averaging::Macro;
    else throw ValidationError("unknown metric option '" + std::string(p) + "' in '" + std::string(text) + "'");
  }
  m.validate();
  return m;
}

std::string metric_name(const Metric& m) {
  std::string out;
  switch (m.kind) {
    case MetricKind::Precision: out = "precision"; break;
    case MetricKind::Recall: out = "recall"; break;
    case MetricKind::Hamming: out = "hamming"; break;
    case MetricKind::FMeasure: out = m.beta == Rational(1) ? "f1" : "f(beta=" + m.beta.str() + ")"; break;
    case MetricKind::SubsetAccuracy: out = "subset-accuracy"; break;
  }
  out += m.strategy == EvaluationStrategy::Partial ? ":partial" : ":full";
  switch (m.averaging) {
    case Averaging::Micro: out += ":micro"; break;
    case Averaging::LabelBased: out += ":label"; break;
    case Averaging::ExampleBased: out += ":example"; break;
    case Averaging::Macro: out += ":macro"; break;
  }
  return out;
}

namespace {

Rational ratio(std::uint64_t a, std::uint64_t b) {
  return b ? Rational(static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)) : Rational(0);
}

Rational f_beta(const Rational& beta, const Rational& p, const Rational& r) {
  if (p.is_zero() || r.is_zero()) return Rational(0);
  Rational b2 = beta * beta;
  return (Rational(1) + b2) * p * r / (b2 * p + r);
}

}  // namespace

Score metric_value(const Metric& m, const ConfusionMatrix& c) {
  switch (m.kind) {
    case MetricKind::Precision:
      return {ratio(c.tp, c.tp + c.fp), c.tp + c.fp == 0};
    case MetricKind::Recall:
      return {ratio(c.tp, c.tp + c.fn), c.tp + c.fn == 0};
    case MetricKind::Hamming:
      return {ratio(c.tp + c.tn, c.total()), c.total() == 0};
    case MetricKind::FMeasure: {
      bool deg = c.tp + c.fp == 0 && c.tp + c.fn == 0;
      return {f_beta(m.beta, ratio(c.tp, c.tp + c.fp), ratio(c.tp, c.tp + c.fn)), deg};
    }
    case MetricKind::SubsetAccuracy:
      if (c.total() == 0) return {Rational(0), true};
      return {Rational(c.fp == 0 && c.fn == 0 ? 1 : 0), false};
  }
  return {};
}

Score subset_accuracy(const std::vector<LabelVector>& truth, const std::vector<LabelVector>& predicted) {
  if (truth.size() != predicted.size()) throw ContractError("subset_accuracy: row counts differ");
  if (truth.empty()) return {Rational(0), true};
  std::int64_t hits = 0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    if (truth[j].size() != predicted[j].size()) throw ContractError("subset_accuracy: label counts differ");
    hits += truth[j] == predicted[j];
  }
  return {Rational(hits, static_cast<std::int64_t>(truth.size())), false};
}

namespace {

void add_cell(ConfusionMatrix& c, Cell v) {
  switch (v) {
    case Cell::TP: ++c.tp; break;
    case Cell::FP: ++c.fp; break;
    case Cell::TN: ++c.tn; break;
    case Cell::FN: ++c.fn; break;
    case Cell::None: break;
  }
}

// Mean of a per-group ratio over the groups where it is defined.
struct Mean {
  Rational sum;
  std::int64_t n = 0;
  void add(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return;
    sum += ratio(num, den);
    ++n;
  }
  [[nodiscard]] Rational value() const { return n ? sum / Rational(n) : Rational(0); }
};

Score average_groups(const Metric& m, const std::vector<ConfusionMatrix>& groups) {
  Mean p, r, h;
  for (const auto& c : groups) {
    p.add(c.tp, c.tp + c.fp);
    r.add(c.tp, c.tp + c.fn);
    h.add(c.tp + c.tn, c.total());
  }
  switch (m.kind) {
    case MetricKind::Precision: return {p.value(), p.n == 0};
    case MetricKind::Recall: return {r.value(), r.n == 0};
    case MetricKind::Hamming: return {h.value(), h.n == 0};
    case MetricKind::FMeasure: return {f_beta(m.beta, p.value(), r.value()), p.n == 0 && r.n == 0};
    case MetricKind::SubsetAccuracy: break;
  }
  throw ContractError("average_groups: unsupported metric");
}

}  // namespace

Score aggregate_cells(const Metric& m, const CellGrid& grid) {
  m.validate();
  if (m.kind == MetricKind::SubsetAccuracy) {
    std::int64_t assessed = 0, perfect = 0;
    for (std::size_t r = 0; r < grid.rows(); ++r) {
      ConfusionMatrix c;
      for (std::size_t l = 0; l < grid.cols(); ++l) add_cell(c, grid.at(r, l));
      if (c.total() == 0) continue;
      ++assessed;
      perfect += c.fp == 0 && c.fn == 0;
    }
    if (!assessed) return {Rational(0), true};
    return {Rational(perfect, assessed), false};
  }
  if (m.averaging == Averaging::Micro) {
    ConfusionMatrix c;
    for (std::size_t r = 0; r < grid.rows(); ++r)
      for (std::size_t l = 0; l < grid.cols(); ++l) add_cell(c, grid.at(r, l));
    return metric_value(m, c);
  }
  std::vector<ConfusionMatrix> groups;
  switch (m.averaging) {
    case Averaging::LabelBased:
      groups.resize(grid.cols());
      for (std::size_t r = 0; r < grid.rows(); ++r)
        for (std::size_t l = 0; l < grid.cols(); ++l) add_cell(groups[l], grid.at(r, l));
      break;
    case Averaging::ExampleBased:
      groups.resize(grid.rows());
      for (std::size_t r = 0; r < grid.rows(); ++r)
        for (std::size_t l = 0; l < grid.cols(); ++l) add_cell(groups[r], grid.at(r, l));
      break;
    case Averaging::Macro:
      for (std::size_t r = 0; r < grid.rows(); ++r)
        for (std::size_t l = 0; l < grid.cols(); ++l)
          if (grid.at(r, l) != Cell::None) add_cell(groups.emplace_back(), grid.at(r, l));
      break;
    case Averaging::Micro:
      break;
  }
  return average_groups(m, groups);
}

CellGrid prediction_grid(const std::vector<LabelVector>& truth, const std::vector<LabelVector>& predicted) {
  if (truth.size() != predicted.size()) throw ValidationError("prediction and truth row counts differ");
  std::size_t cols = truth.empty() ? 0 : truth[0].size();
  CellGrid g(truth.size(), cols);
  for (std::size_t r = 0; r < truth.size(); ++r) {
    if (truth[r].size() != cols || predicted[r].size() != cols)
      throw ValidationError("row " + std::to_string(r + 1) + ": expected " + std::to_string(cols) + " labels");
    for (std::size_t l = 0; l < cols; ++l) {
      auto c = atomic_confusion(truth[r][l], predicted[r][l]);
      g.set(r, l, c.tp ? Cell::TP : c.fp ? Cell::FP : c.tn ? Cell::TN : Cell::FN);
    }
  }
  return g;
}

Score evaluate_predictions(const std::vector<LabelVector>& truth, const std::vector<LabelVector>& predicted,
                           const Metric& m) {
  return aggregate_cells(m, prediction_grid(truth, predicted));
}

void check_schema_match(const Schema& model, const Schema& data) {
  std::size_t n = std::min(model.attributes.size(), data.attributes.size());
  for (std::size_t a = 0; a < n; ++a)
    if (!(model.attributes[a] == data.attributes[a]))
      throw ValidationError("schema mismatch at attribute '" + model.attributes[a].name + "'");
  if (model.attributes.size() > n)
    throw ValidationError("schema mismatch: data lacks attribute '" + model.attributes[n].name + "'");
  if (data.attributes.size() > n)
    throw ValidationError("schema mismatch: unexpected attribute '" + data.attributes[n].name + "'");
  if (model.labels != data.labels) {
    std::string expected;
    for (const auto& l : model.labels) expected += (expected.empty() ? "" : ",") + l;
    throw ValidationError("schema mismatch: model expects " + std::to_string(model.label_count()) +
                          " labels (" + expected + ")");
  }
}

Score evaluate(const DecisionList& dl, const Dataset& d, const Metric& m) {
  check_schema_match(dl.schema, d.schema());
  std::vector<LabelVector> predicted;
  predicted.reserve(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) predicted.push_back(predict(dl, d.features(j)));
  return evaluate_predictions(d.label_matrix(), predicted, m);
}

}  // namespace mlrules
