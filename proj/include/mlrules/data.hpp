#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mlrules/rational.hpp"

namespace mlrules {

enum class AttributeKind { Nominal, Numeric };

/// Input feature. Nominal values are stored in rows as their index into `values`.
struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::Numeric;
  std::vector<std::string> values;

  static Attribute nominal(std::string name, std::vector<std::string> values);
  static Attribute numeric(std::string name);

  [[nodiscard]] bool is_nominal() const { return kind == AttributeKind::Nominal; }
  [[nodiscard]] std::optional<std::size_t> value_index(std::string_view value) const;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Attribute and label names shared by a dataset and the models learned from it.
struct Schema {
  std::vector<Attribute> attributes;
  std::vector<std::string> labels;

  [[nodiscard]] std::size_t label_count() const { return labels.size(); }
  [[nodiscard]] std::optional<std::size_t> attribute_index(std::string_view name) const;
  [[nodiscard]] std::optional<std::size_t> label_index(std::string_view name) const;

  /// Throws ValidationError on duplicate names, empty or duplicated nominal domains,
  /// or an empty label set.
  void validate() const;

  friend bool operator==(const Schema&, const Schema&) = default;
};

using LabelVector = std::vector<std::uint8_t>;

/// Immutable multi-label training table: m rows of feature values plus an m x l
/// binary label matrix.
class Dataset {
public:
  Dataset() = default;
  /// Validates arity, nominal indices, finiteness and label binarity.
  Dataset(Schema schema, std::vector<std::vector<double>> rows, std::vector<LabelVector> labels);

  [[nodiscard]] const Schema& schema() const { return schema_; }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] bool empty() const { return rows_.empty(); }
  [[nodiscard]] std::size_t attribute_count() const { return schema_.attributes.size(); }
  [[nodiscard]] std::size_t label_count() const { return schema_.labels.size(); }

  [[nodiscard]] std::span<const double> features(std::size_t row) const { return rows_[row]; }
  [[nodiscard]] const LabelVector& labels(std::size_t row) const { return labels_[row]; }
  [[nodiscard]] const std::vector<std::vector<double>>& rows() const { return rows_; }
  [[nodiscard]] const std::vector<LabelVector>& label_matrix() const { return labels_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

private:
  Schema schema_;
  std::vector<std::vector<double>> rows_;
  std::vector<LabelVector> labels_;
};

/// Which columns are labels: the last N attributes, or the attributes with these names.
using LabelSpec = std::variant<std::size_t, std::vector<std::string>>;

enum class DataFormat { Arff, Csv };

/// Guesses the format from the file extension (.arff, otherwise CSV).
DataFormat format_from_path(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, DataFormat format, const LabelSpec& labels);
Dataset parse_arff(std::istream& in, const LabelSpec& labels);
Dataset parse_csv(std::istream& in, const LabelSpec& labels);

/// Writes a CSV whose header carries attribute types ("age:numeric",
/// "sex:nominal=Male|Female") so that parse_csv restores the same domains.
void write_csv(std::ostream& out, const Dataset& d);

/// The 14-person newspaper subscription example with four nominal attributes and
/// the labels quality, tabloid, fashion, sports.
Dataset builtin_newspapers();

struct DatasetStats {
  std::size_t instances = 0;
  std::size_t nominal_count = 0;
  std::size_t numeric_count = 0;
  std::size_t label_count = 0;
  std::size_t label_occurrences = 0;  ///< number of ones in the label matrix
  double cardinality = 0.0;
  double density = 0.0;
  std::size_t distinct_labelsets = 0;
  bool degenerate = false;  ///< no instances; cardinality and density reported as 0

  [[nodiscard]] Rational exact_cardinality() const;
  [[nodiscard]] Rational exact_density() const;
};

DatasetStats dataset_stats(const Dataset& d);

}  // namespace mlrules
