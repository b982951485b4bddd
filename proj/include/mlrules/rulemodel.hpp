#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlrules/data.hpp"
#include "mlrules/rational.hpp"

namespace mlrules {

/// One test in a rule body: a nominal equality, a numeric threshold, or a test on
/// the current prediction for a label.
struct Condition {
  enum class Target : std::uint8_t { Feature, Label };
  enum class Op : std::uint8_t { Eq, Le, Gt };

  Target target = Target::Feature;
  std::size_t index = 0;  ///< attribute index or label index
  Op op = Op::Eq;
  double value = 0.0;  ///< nominal value index, threshold, or label value 0/1

  static Condition nominal_eq(std::size_t attribute, std::size_t value_index);
  static Condition numeric_le(std::size_t attribute, double threshold);
  static Condition numeric_gt(std::size_t attribute, double threshold);
  static Condition label_eq(std::size_t label, std::uint8_t value);

  [[nodiscard]] bool is_label() const { return target == Target::Label; }

  friend bool operator==(const Condition&, const Condition&) = default;
  /// Canonical order: features before labels, then index, operator, value.
  friend auto operator<=>(const Condition&, const Condition&) = default;
};

/// Conjunction of conditions; an empty body is "true".
struct Body {
  std::vector<Condition> conditions;

  [[nodiscard]] bool empty() const { return conditions.empty(); }
  [[nodiscard]] bool has_label_conditions() const;
  [[nodiscard]] bool has_feature_conditions() const;
  [[nodiscard]] bool contains(const Condition& c) const;

  friend bool operator==(const Body&, const Body&) = default;
};

using Assignment = std::pair<std::size_t, std::uint8_t>;

/// Partial prediction: label index -> 0/1, kept sorted by label index. Labels not
/// listed are abstained on.
class Head {
public:
  Head() = default;
  /// Sorts the assignments; throws ContractError on duplicates or values other than 0/1.
  explicit Head(std::vector<Assignment> assignments);

  [[nodiscard]] const std::vector<Assignment>& assignments() const { return assignments_; }
  [[nodiscard]] std::size_t size() const { return assignments_.size(); }
  [[nodiscard]] bool empty() const { return assignments_.empty(); }
  [[nodiscard]] std::optional<std::uint8_t> value_of(std::size_t label) const;
  [[nodiscard]] Head with(std::size_t label, std::uint8_t value) const;

  friend bool operator==(const Head&, const Head&) = default;

private:
  std::vector<Assignment> assignments_;
};

/// Bookkeeping recorded when the covering loop accepts a rule.
struct RuleStats {
  std::size_t induction_index = 0;
  Rational score;
  std::size_t covered = 0;
  std::size_t newly_set = 0;

  friend bool operator==(const RuleStats&, const RuleStats&) = default;
};

struct Rule {
  Body body;
  Head head;
  bool full_prediction = false;
  std::optional<RuleStats> stats;

  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Per-instance label vector under construction: each entry is unset, 0 or 1, and
/// an entry never changes once set.
class PredictionState {
public:
  explicit PredictionState(std::size_t label_count = 0) : values_(label_count, kUnset) {}

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] bool is_set(std::size_t label) const { return values_[label] != kUnset; }
  [[nodiscard]] std::uint8_t value(std::size_t label) const {
    return static_cast<std::uint8_t>(values_[label]);
  }
  /// Returns true if the label was unset and is now set.
  bool set_if_unset(std::size_t label, std::uint8_t value);
  [[nodiscard]] bool all_set() const;
  [[nodiscard]] std::size_t unset_count() const;
  /// Unset labels become 0.
  [[nodiscard]] LabelVector finalize() const;

  friend bool operator==(const PredictionState&, const PredictionState&) = default;

private:
  static constexpr std::int8_t kUnset = -1;
  std::vector<std::int8_t> values_;
};

/// Ordered rules over a schema; earlier rules take precedence label by label.
struct DecisionList {
  Schema schema;
  std::vector<Rule> rules;

  [[nodiscard]] std::size_t label_count() const { return schema.label_count(); }

  friend bool operator==(const DecisionList&, const DecisionList&) = default;
};

/// Feature conditions test the row; label conditions hold only if the label is set
/// in `context` and equals the tested value.
bool covers(const Body& body, std::span<const double> row, const PredictionState& context);

PredictionState apply_head(const Head& head, PredictionState state);
/// In-place variant; returns how many labels were newly set.
std::size_t apply_head_in_place(const Head& head, PredictionState& state);

/// Runs the list from `state` and returns the state it stops in, without the
/// fallback to 0.
PredictionState run_rules(const DecisionList& dl, std::span<const double> row, PredictionState state);

/// First-set-wins decision list prediction; labels left unset default to 0.
LabelVector predict(const DecisionList& dl, std::span<const double> row);

/// Throws ValidationError if the rule does not fit the schema or breaks a body/head invariant.
void validate_rule(const Rule& r, const Schema& schema);

std::string condition_to_text(const Condition& c, const Schema& schema);
std::string head_to_text(const Head& h, const Schema& schema);
std::string rule_to_text(const Rule& r, const Schema& schema);

/// Parses one rule line, e.g. "quality=1,fashion=1 <- Education=University & Sex=Female".
/// Throws ParseError with the column of the offending token, or ValidationError for
/// names unknown to the schema.
Rule parse_rule(std::string_view text, const Schema& schema);

/// "mlrule v1; labels=a,b,c"
std::string model_header(const Schema& schema);
/// Returns the label names listed in a header line; throws ParseError otherwise.
std::vector<std::string> parse_model_header(std::string_view line);

/// Rule lines, each preceded by a "# rule=… score=… covered=… newly_set=…" comment when stats exist.
void write_rules(std::ostream& out, const std::vector<Rule>& rules, const Schema& schema);
/// Inverse of write_rules over already-split lines; `first_line` numbers error messages.
std::vector<Rule> read_rules(std::span<const std::string> lines, const Schema& schema,
                             std::size_t first_line);

void write_model(std::ostream& out, const DecisionList& dl);
/// Reads a model written by write_model. The header's labels must match the
/// schema's labels, otherwise a ValidationError names the expected labels.
DecisionList read_model(std::istream& in, const Schema& schema);

/// Throws ValidationError if the header's label list differs from the schema's.
void check_model_labels(const std::vector<std::string>& header_labels, const Schema& schema);

}  // namespace mlrules
