#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mlrules/data.hpp"
#include "mlrules/rulemodel.hpp"
#include "mlrules/seco.hpp"

namespace mlrules {

/// One decision list per label. Every list is stored over the full schema and only
/// ever assigns its own label.
struct BRModel {
  Schema schema;
  std::vector<DecisionList> lists;

  friend bool operator==(const BRModel&, const BRModel&) = default;
};

/// Level-2 list i may test the other labels through "label:" conditions; at
/// prediction time those read the level-1 outputs.
struct SBRModel {
  BRModel level1;
  std::vector<DecisionList> level2;

  friend bool operator==(const SBRModel&, const SBRModel&) = default;
};

enum class TrainInputs { TrueLabels, Level1Predictions };

/// The dataset with a single label, `target`.
Dataset project_label(const Dataset& d, std::size_t target);

/// Appends every label except `target` as a nominal {0,1} attribute of the same
/// name, filled from `label_values`, and keeps `target` as the only label.
Dataset augment_instances(const Dataset& d, std::size_t target, const std::vector<LabelVector>& label_values);

/// Rewrites a list learned on a single-label projection so that it refers to label
/// `target` of `full`; conditions on attributes past `full`'s own become label
/// conditions.
DecisionList lift_list(const DecisionList& projected, const Schema& full, std::size_t target);

BRModel learn_br(const Dataset& d, const SecoConfig& cfg);
SBRModel learn_sbr(const Dataset& d, const SecoConfig& cfg, TrainInputs inputs = TrainInputs::TrueLabels);

LabelVector predict_br(const BRModel& m, std::span<const double> row);
LabelVector predict_sbr(const SBRModel& m, std::span<const double> row);

/// Header line, then one "## label <name> level <n>" section per list.
void write_br(std::ostream& out, const BRModel& m);
void write_sbr(std::ostream& out, const SBRModel& m);

/// A model file of any kind: a plain list, a BR model or an SBR model.
struct AnyModel {
  enum class Kind { List, BR, SBR } kind = Kind::List;
  DecisionList list;
  SBRModel sbr;  ///< level2 empty for BR

  [[nodiscard]] LabelVector predict(std::span<const double> row) const;
  /// All lists, level 1 first.
  [[nodiscard]] std::vector<const DecisionList*> lists() const;
  [[nodiscard]] const Schema& schema() const;
};

AnyModel read_any_model(std::istream& in, const Schema& schema);
void write_any_model(std::ostream& out, const AnyModel& m);

}  // namespace mlrules
