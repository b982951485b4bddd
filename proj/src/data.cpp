#include "mlrules/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mlrules/errors.hpp"

namespace mlrules {

Attribute Attribute::nominal(std::string name, std::vector<std::string> values) {
  return Attribute{std::move(name), AttributeKind::Nominal, std::move(values)};
}

Attribute Attribute::numeric(std::string name) {
  return Attribute{std::move(name), AttributeKind::Numeric, {}};
}

std::optional<std::size_t> Attribute::value_index(std::string_view value) const {
  auto it = std::find(values.begin(), values.end(), value);
  if (it == values.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

std::optional<std::size_t> Schema::attribute_index(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> Schema::label_index(std::string_view name) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == name) return i;
  return std::nullopt;
}

void Schema::validate() const {
  if (labels.empty()) throw ValidationError("dataset needs at least one label");
  std::unordered_set<std::string> names;
  auto claim = [&](const std::string& n) {
    if (n.empty()) throw ValidationError("empty attribute or label name");
    if (!names.insert(n).second) throw ValidationError("duplicate name '" + n + "'");
  };
  for (const auto& a : attributes) {
    claim(a.name);
    if (a.is_nominal()) {
      if (a.values.empty())
        throw ValidationError("nominal attribute '" + a.name + "' has an empty domain");
      std::unordered_set<std::string> seen(a.values.begin(), a.values.end());
      if (seen.size() != a.values.size())
        throw ValidationError("nominal attribute '" + a.name + "' repeats a value");
    }
  }
  for (const auto& l : labels) claim(l);
}

Dataset::Dataset(Schema schema, std::vector<std::vector<double>> rows,
                 std::vector<LabelVector> labels)
    : schema_(std::move(schema)), rows_(std::move(rows)), labels_(std::move(labels)) {
  schema_.validate();
  if (rows_.size() != labels_.size())
    throw ValidationError("feature rows and label rows differ in count");
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    if (rows_[j].size() != schema_.attributes.size())
      throw ValidationError("row " + std::to_string(j + 1) + " has wrong number of features");
    if (labels_[j].size() != schema_.labels.size())
      throw ValidationError("row " + std::to_string(j + 1) + " has wrong number of labels");
    for (std::size_t i = 0; i < rows_[j].size(); ++i) {
      double v = rows_[j][i];
      const auto& a = schema_.attributes[i];
      if (!std::isfinite(v))
        throw ValidationError("row " + std::to_string(j + 1) + ": missing or non-finite value for '" +
                              a.name + "'");
      if (a.is_nominal() && (v < 0 || v != std::floor(v) || v >= static_cast<double>(a.values.size())))
        throw ValidationError("row " + std::to_string(j + 1) + ": bad nominal index for '" + a.name + "'");
    }
    for (auto y : labels_[j])
      if (y > 1) throw ValidationError("row " + std::to_string(j + 1) + ": label value not in {0,1}");
  }
}

DataFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".arff" ? DataFormat::Arff : DataFormat::Csv;
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format, const LabelSpec& labels) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return format == DataFormat::Arff ? parse_arff(in, labels) : parse_csv(in, labels);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string r(s);
  std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return std::tolower(c); });
  return r;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Splits on commas outside single or double quotes; strips the quotes.
std::vector<std::string> split_fields(std::string_view line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  bool quoted_field = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    char c = line[k];
    if (quote) {
      if (c == '\\' && k + 1 < line.size()) {
        cur += line[++k];
      } else if (c == quote) {
        if (quote == '"' && k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quote = 0;
        }
      } else {
        cur += c;
      }
    } else if (c == ',') {
      out.push_back(quoted_field ? cur : std::string(trim(cur)));
      cur.clear();
      quoted_field = false;
    } else if ((c == '"' || c == '\'') && trim(cur).empty()) {
      cur.clear();
      quote = c;
      quoted_field = true;
    } else {
      cur += c;
    }
  }
  if (quote) throw ParseError("unterminated quote", lineno);
  out.push_back(quoted_field ? cur : std::string(trim(cur)));
  return out;
}

// Column layout shared by both readers: which columns are labels, in file order.
std::vector<bool> label_columns(const std::vector<std::string>& names, const LabelSpec& spec) {
  std::vector<bool> is_label(names.size(), false);
  if (const auto* count = std::get_if<std::size_t>(&spec)) {
    if (*count == 0) throw ValidationError("label count must be at least 1");
    if (*count > names.size())
      throw ValidationError("label count " + std::to_string(*count) + " exceeds the " +
                            std::to_string(names.size()) + " available columns");
    for (std::size_t k = names.size() - *count; k < names.size(); ++k) is_label[k] = true;
  } else {
    const auto& wanted = std::get<std::vector<std::string>>(spec);
    if (wanted.empty()) throw ValidationError("label name list is empty");
    for (const auto& w : wanted) {
      auto it = std::find(names.begin(), names.end(), w);
      if (it == names.end()) throw ValidationError("label '" + w + "' not found among columns");
      is_label[static_cast<std::size_t>(it - names.begin())] = true;
    }
  }
  return is_label;
}

std::uint8_t parse_label(std::string_view s, const std::string& name, std::size_t lineno) {
  s = trim(s);
  if (s == "0") return 0;
  if (s == "1") return 1;
  if (auto v = parse_number(s); v && (*v == 0.0 || *v == 1.0)) return static_cast<std::uint8_t>(*v);
  if (s == "?") throw ValidationError("line " + std::to_string(lineno) + ": missing value for label '" + name + "'");
  throw ValidationError("line " + std::to_string(lineno) + ": label '" + name + "' has non-binary value '" +
                        std::string(s) + "'");
}

double parse_feature(std::string_view s, const Attribute& a, std::size_t lineno) {
  s = trim(s);
  if (s == "?")
    throw ValidationError("line " + std::to_string(lineno) + ": missing value for '" + a.name + "'");
  if (a.is_nominal()) {
    auto idx = a.value_index(s);
    if (!idx)
      throw ValidationError("line " + std::to_string(lineno) + ": unknown value '" + std::string(s) +
                            "' for nominal attribute '" + a.name + "'");
    return static_cast<double>(*idx);
  }
  auto v = parse_number(s);
  if (!v || !std::isfinite(*v))
    throw ValidationError("line " + std::to_string(lineno) + ": '" + std::string(s) +
                          "' is not numeric for attribute '" + a.name + "'");
  return *v;
}

struct RawTable {
  std::vector<Attribute> columns;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // line number, fields
};

Dataset assemble(const RawTable& t, const LabelSpec& spec) {
  std::vector<std::string> names;
  for (const auto& c : t.columns) names.push_back(c.name);
  auto is_label = label_columns(names, spec);

  Schema schema;
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    if (is_label[k]) {
      const auto& c = t.columns[k];
      if (c.is_nominal()) {
        for (const auto& v : c.values)
          if (v != "0" && v != "1")
            throw ValidationError("label attribute '" + c.name + "' has non-binary domain value '" + v + "'");
      }
      schema.labels.push_back(c.name);
    } else {
      schema.attributes.push_back(t.columns[k]);
    }
  }
  schema.validate();

  std::vector<std::vector<double>> rows;
  std::vector<LabelVector> labels;
  rows.reserve(t.rows.size());
  labels.reserve(t.rows.size());
  for (const auto& [lineno, fields] : t.rows) {
    if (fields.size() != t.columns.size())
      throw ParseError("expected " + std::to_string(t.columns.size()) + " values, found " +
                           std::to_string(fields.size()),
                       lineno);
    std::vector<double> row;
    LabelVector y;
    std::size_t attr = 0;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (is_label[k])
        y.push_back(parse_label(fields[k], t.columns[k].name, lineno));
      else
        row.push_back(parse_feature(fields[k], schema.attributes[attr++], lineno));
    }
    rows.push_back(std::move(row));
    labels.push_back(std::move(y));
  }
  return Dataset(std::move(schema), std::move(rows), std::move(labels));
}

// "name:numeric" or "name:nominal=a|b|c"; plain names have their type inferred.
struct HeaderColumn {
  std::string name;
  std::optional<Attribute> declared;
};

HeaderColumn parse_header_field(const std::string& field) {
  auto colon = field.rfind(':');
  if (colon != std::string::npos) {
    std::string name = field.substr(0, colon);
    std::string type = field.substr(colon + 1);
    if (type == "numeric") return {name, Attribute::numeric(name)};
    if (type.rfind("nominal=", 0) == 0) {
      std::vector<std::string> values;
      std::string rest = type.substr(8);
      std::size_t start = 0;
      while (true) {
        auto bar = rest.find('|', start);
        values.push_back(rest.substr(start, bar - start));
        if (bar == std::string::npos) break;
        start = bar + 1;
      }
      return {name, Attribute::nominal(name, std::move(values))};
    }
  }
  return {field, std::nullopt};
}

}  // namespace

Dataset parse_csv(std::istream& in, const LabelSpec& spec) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<HeaderColumn> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    for (const auto& f : split_fields(line, lineno)) header.push_back(parse_header_field(f));
    break;
  }
  if (header.empty()) throw ParseError("CSV has no header line");

  RawTable t;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    t.rows.emplace_back(lineno, split_fields(line, lineno));
    if (t.rows.back().second.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " values, found " +
                           std::to_string(t.rows.back().second.size()),
                       lineno);
  }

  std::vector<std::string> names;
  for (const auto& h : header) names.push_back(h.name);
  auto is_label = label_columns(names, spec);

  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k].declared) {
      t.columns.push_back(*header[k].declared);
      continue;
    }
    if (is_label[k]) {
      t.columns.push_back(Attribute::numeric(header[k].name));
      continue;
    }
    // Numeric if every value parses as a number, otherwise nominal with values
    // in order of first appearance.
    bool numeric = true;
    for (const auto& [ln, fields] : t.rows) {
      std::string_view v = trim(fields[k]);
      if (v == "?") continue;
      if (!parse_number(v)) {
        numeric = false;
        break;
      }
    }
    if (numeric && !t.rows.empty()) {
      t.columns.push_back(Attribute::numeric(header[k].name));
    } else {
      std::vector<std::string> values;
      std::set<std::string> seen;
      for (const auto& [ln, fields] : t.rows) {
        std::string v(trim(fields[k]));
        if (v != "?" && seen.insert(v).second) values.push_back(v);
      }
      if (values.empty()) values.push_back("?");  // rejected by validation below if ever used
      t.columns.push_back(Attribute::nominal(header[k].name, std::move(values)));
    }
  }
  return assemble(t, spec);
}

Dataset parse_arff(std::istream& in, const LabelSpec& spec) {
  RawTable t;
  std::string line;
  std::size_t lineno = 0;
  bool in_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '%') continue;
    if (in_data) {
      if (s.front() == '{') throw ParseError("sparse ARFF rows are not supported", lineno);
      t.rows.emplace_back(lineno, split_fields(s, lineno));
      continue;
    }
    if (s.front() != '@') throw ParseError("unexpected text before @data", lineno);
    auto space = s.find_first_of(" \t");
    std::string keyword = lower(s.substr(0, space));
    std::string_view rest = space == std::string_view::npos ? std::string_view{} : trim(s.substr(space));
    if (keyword == "@relation") continue;
    if (keyword == "@data") {
      if (t.columns.empty()) throw ParseError("@data before any @attribute", lineno);
      in_data = true;
      continue;
    }
    if (keyword != "@attribute") throw ParseError("unsupported declaration '" + keyword + "'", lineno);

    // Name, possibly quoted, then a type or a {domain}.
    std::string name;
    std::size_t pos = 0;
    if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
      char q = rest.front();
      auto end = rest.find(q, 1);
      if (end == std::string_view::npos) throw ParseError("unterminated attribute name", lineno);
      name = std::string(rest.substr(1, end - 1));
      pos = end + 1;
    } else {
      auto end = rest.find_first_of(" \t{");
      if (end == std::string_view::npos) throw ParseError("attribute without a type", lineno);
      name = std::string(rest.substr(0, end));
      pos = end;
    }
    std::string_view type = trim(rest.substr(pos));
    if (type.empty()) throw ParseError("attribute '" + name + "' has no type", lineno);
    if (type.front() == '{') {
      if (type.back() != '}') throw ParseError("unterminated nominal domain", lineno);
      auto values = split_fields(type.substr(1, type.size() - 2), lineno);
      t.columns.push_back(Attribute::nominal(name, std::move(values)));
      continue;
    }
    std::string ltype = lower(type);
    if (ltype == "numeric" || ltype == "real" || ltype == "integer")
      t.columns.push_back(Attribute::numeric(name));
    else
      throw ParseError("attribute '" + name + "' has unsupported type '" + std::string(type) + "'", lineno);
  }
  if (!in_data) throw ParseError("ARFF file has no @data section");
  return assemble(t, spec);
}

void write_csv(std::ostream& out, const Dataset& d) {
  const auto& s = d.schema();
  auto check = [](const std::string& text, std::string_view forbidden) {
    if (text.find_first_of(forbidden) != std::string::npos)
      throw ValidationError("'" + text + "' cannot be written to CSV");
  };
  bool first = true;
  for (const auto& a : s.attributes) {
    check(a.name, ",:\"\n");
    out << (first ? "" : ",") << a.name;
    first = false;
    if (a.is_nominal()) {
      out << ":nominal=";
      for (std::size_t k = 0; k < a.values.size(); ++k) {
        check(a.values[k], ",|\"\n");
        out << (k ? "|" : "") << a.values[k];
      }
    } else {
      out << ":numeric";
    }
  }
  for (const auto& l : s.labels) {
    check(l, ",:\"\n");
    out << (first ? "" : ",") << l;
    first = false;
  }
  out << '\n';
  char buf[64];
  for (std::size_t j = 0; j < d.size(); ++j) {
    auto row = d.features(j);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      const auto& a = s.attributes[i];
      if (a.is_nominal()) {
        out << a.values[static_cast<std::size_t>(row[i])];
      } else {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[i]);
        out << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
      }
    }
    for (std::size_t i = 0; i < d.label_count(); ++i)
      out << ((row.empty() && i == 0) ? "" : ",") << int(d.labels(j)[i]);
    out << '\n';
  }
}

Dataset builtin_newspapers() {
  Schema s;
  s.attributes = {
      Attribute::nominal("Education", {"Primary", "Secondary", "University"}),
      Attribute::nominal("Marital", {"Single", "Married", "Divorced"}),
      Attribute::nominal("Sex", {"Male", "Female"}),
      Attribute::nominal("Children", {"Yes", "No"}),
  };
  s.labels = {"quality", "tabloid", "fashion", "sports"};
  enum { Pri, Sec, Uni };
  enum { Sgl = 0, Mar = 1, Div = 2 };
  enum { Male = 0, Female = 1 };
  enum { Yes = 0, No = 1 };
  struct Person {
    int edu, marital, sex, children;
    LabelVector y;
  };
  const std::vector<Person> people = {
      {Pri, Sgl, Male, No, {0, 0, 0, 0}},    {Pri, Sgl, Male, Yes, {0, 0, 0, 0}},
      {Pri, Mar, Male, No, {0, 1, 0, 0}},    {Uni, Div, Female, No, {1, 0, 1, 0}},
      {Uni, Mar, Female, Yes, {1, 0, 1, 0}}, {Sec, Sgl, Male, No, {0, 1, 0, 0}},
      {Uni, Sgl, Male, No, {1, 1, 0, 0}},    {Sec, Div, Female, No, {1, 0, 0, 1}},
      {Sec, Sgl, Female, Yes, {0, 1, 1, 0}}, {Sec, Mar, Male, Yes, {1, 1, 0, 0}},
      {Pri, Mar, Female, No, {0, 0, 0, 0}},  {Sec, Div, Male, Yes, {0, 0, 0, 0}},
      {Uni, Div, Male, Yes, {1, 1, 0, 0}},   {Sec, Div, Male, No, {1, 0, 0, 1}},
  };
  std::vector<std::vector<double>> rows;
  std::vector<LabelVector> labels;
  for (const auto& p : people) {
    rows.push_back({double(p.edu), double(p.marital), double(p.sex), double(p.children)});
    labels.push_back(p.y);
  }
  return Dataset(std::move(s), std::move(rows), std::move(labels));
}

Rational DatasetStats::exact_cardinality() const {
  if (instances == 0) return Rational(0);
  return Rational(static_cast<std::int64_t>(label_occurrences), static_cast<std::int64_t>(instances));
}

Rational DatasetStats::exact_density() const {
  if (instances == 0 || label_count == 0) return Rational(0);
  return Rational(static_cast<std::int64_t>(label_occurrences),
                  static_cast<std::int64_t>(instances * label_count));
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats st;
  st.instances = d.size();
  st.label_count = d.label_count();
  for (const auto& a : d.schema().attributes) (a.is_nominal() ? st.nominal_count : st.numeric_count)++;
  std::set<LabelVector> distinct;
  for (const auto& y : d.label_matrix()) {
    for (auto v : y) st.label_occurrences += v;
    distinct.insert(y);
  }
  st.distinct_labelsets = distinct.size();
  if (st.instances == 0) {
    st.degenerate = true;
    return st;
  }
  st.cardinality = static_cast<double>(st.label_occurrences) / static_cast<double>(st.instances);
  st.density = static_cast<double>(st.label_occurrences) /
               static_cast<double>(st.instances * st.label_count);
  return st;
}

}  // namespace mlrules
