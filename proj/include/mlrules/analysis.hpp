#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mlrules/rulemodel.hpp"

namespace mlrules {

enum class HeadArity : std::uint8_t { Single, Multi };
enum class HeadSign : std::uint8_t { Positive, Negative, Mixed };
enum class BodyClass : std::uint8_t { LabelIndependent, PartiallyLabelDependent, FullyLabelDependent };

struct DependencyClass {
  HeadArity head_arity = HeadArity::Single;
  HeadSign head_sign = HeadSign::Positive;
  BodyClass body_class = BodyClass::LabelIndependent;

  friend bool operator==(const DependencyClass&, const DependencyClass&) = default;
};

DependencyClass classify_rule(const Rule& r);

std::string to_string(HeadArity a);
std::string to_string(HeadSign s);
std::string to_string(BodyClass b);

/// Counts of rules in which the row label is predicted and the column label is
/// tested. Global counts come from fully label-dependent rules, local counts from
/// partially label-dependent ones.
class DependencyMatrix {
public:
  DependencyMatrix() = default;
  explicit DependencyMatrix(std::vector<std::string> labels);

  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] std::size_t global(std::size_t head, std::size_t body) const { return global_[head * size() + body]; }
  [[nodiscard]] std::size_t local(std::size_t head, std::size_t body) const { return local_[head * size() + body]; }
  void add(std::size_t head, std::size_t body, bool is_global, std::size_t n = 1);
  [[nodiscard]] std::size_t total() const;

  friend bool operator==(const DependencyMatrix&, const DependencyMatrix&) = default;

private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> global_;
  std::vector<std::size_t> local_;
};

/// One (head label, body label) pair per rule and distinct tested label.
DependencyMatrix dependency_matrix(const std::vector<const DecisionList*>& lists);
DependencyMatrix dependency_matrix(const DecisionList& dl);

enum class ExportFormat { Csv, Dot };

/// csv: label-name header row and column, cells "global:local".
/// dot: one edge "body -> head" per non-zero bucket, blue for global, green for local.
std::string export_matrix(const DependencyMatrix& mx, ExportFormat format);
DependencyMatrix parse_matrix_csv(std::string_view text);

/// Long-format listing with the head value and the tested value of every pair:
/// columns head,body,kind,head_value,body_value,count. Goes beyond the plain matrix,
/// which records no signs.
std::string export_signed_csv(const std::vector<const DecisionList*>& lists);

}  // namespace mlrules
