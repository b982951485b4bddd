#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mlrules/data.hpp"
#include "mlrules/eval.hpp"
#include "mlrules/headsearch.hpp"
#include "mlrules/rulemodel.hpp"

namespace mlrules {

enum class HeadMode : std::uint8_t { SingleLabel, MultiLabel };

struct SecoConfig {
  Metric metric = Metric::precision();
  HeadMode head_mode = HeadMode::MultiLabel;
  Polarity polarity = Polarity::Both;
  /// Share of covered examples that must end fully labeled for a full-prediction rule.
  Rational full_prediction_threshold{1};
  bool allow_label_conditions = false;
  /// 0 means m * l, the most rules the loop can ever need.
  std::size_t max_rules = 0;
  std::uint64_t seed = 0;
  /// Score candidate refinements on all cores. Results are identical either way.
  bool parallel = true;

  /// Throws ValidationError for tau outside [0,1] or an unusable metric.
  void validate() const;
};

/// Training examples with their partial predictions and active flags.
struct TrainingState {
  const Dataset* data = nullptr;
  std::vector<PredictionState> predictions;
  std::vector<std::uint8_t> active;

  static TrainingState start(const Dataset& d);

  [[nodiscard]] std::size_t active_count() const;
  /// Unset labels summed over active examples; shrinks with every accepted rule.
  [[nodiscard]] std::size_t unset_total() const;
  /// Active examples the body covers, given each example's current predictions.
  [[nodiscard]] std::vector<std::size_t> covered_by(const Body& body) const;
  /// Covered examples against the rest of the active set, with availability masks.
  [[nodiscard]] CoverageSplit split(const std::vector<std::size_t>& covered) const;
};

/// Refinements of `body`, in the order that also breaks ties between equally good
/// ones: attributes by index (nominal values in domain order; numeric thresholds
/// ascending, <= before >), then label conditions by label with value 0 before 1.
std::vector<Condition> candidate_conditions(const TrainingState& state, const Body& body, const SecoConfig& cfg);

struct ScoredRule {
  Rule rule;
  Rational score;
  std::vector<std::size_t> covered;
};

/// Head for the examples a body covers, chosen per cfg.head_mode; nullopt if the
/// body covers nothing that still has an unset label.
std::optional<HeadSearchResult> head_for(const TrainingState& state, const std::vector<std::size_t>& covered,
                                         const SecoConfig& cfg);

/// Greedy top-down refinement from the empty body, keeping a condition only when
/// it strictly improves the score of the body's best head.
ScoredRule find_best_rule(const TrainingState& state, const SecoConfig& cfg);

struct ApplyStats {
  std::size_t covered = 0;
  std::size_t newly_set = 0;
  std::size_t fully_labeled = 0;
  bool full_prediction = false;
  std::vector<std::size_t> deactivated;
};

/// Applies the head to the covered active examples, marks the rule as a
/// full-prediction rule when enough of them end fully labeled, and deactivates
/// examples accordingly.
ApplyStats apply_rule(TrainingState& state, Rule& rule, const SecoConfig& cfg);

struct TraceStep {
  std::vector<std::size_t> covered;
  std::vector<std::size_t> deactivated;
};

struct LearnResult {
  DecisionList model;
  std::vector<TraceStep> trace;
  /// Stopped at max_rules with examples still active.
  bool truncated = false;
  /// Predictions on the training set when learning stopped (before the 0 fallback).
  std::vector<PredictionState> final_predictions;
};

LearnResult learn_detailed(const Dataset& d, const SecoConfig& cfg);
DecisionList learn(const Dataset& d, const SecoConfig& cfg);

}  // namespace mlrules
