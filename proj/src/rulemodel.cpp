#include "mlrules/rulemodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "mlrules/errors.hpp"

namespace mlrules {

Condition Condition::nominal_eq(std::size_t attribute, std::size_t value_index) {
  return {Target::Feature, attribute, Op::Eq, static_cast<double>(value_index)};
}
Condition Condition::numeric_le(std::size_t attribute, double threshold) {
  return {Target::Feature, attribute, Op::Le, threshold};
}
Condition Condition::numeric_gt(std::size_t attribute, double threshold) {
  return {Target::Feature, attribute, Op::Gt, threshold};
}
Condition Condition::label_eq(std::size_t label, std::uint8_t value) {
  return {Target::Label, label, Op::Eq, static_cast<double>(value)};
}

bool Body::has_label_conditions() const {
  return std::any_of(conditions.begin(), conditions.end(), [](const Condition& c) { return c.is_label(); });
}

bool Body::has_feature_conditions() const {
  return std::any_of(conditions.begin(), conditions.end(), [](const Condition& c) { return !c.is_label(); });
}

bool Body::contains(const Condition& c) const {
  return std::find(conditions.begin(), conditions.end(), c) != conditions.end();
}

Head::Head(std::vector<Assignment> assignments) : assignments_(std::move(assignments)) {
  std::sort(assignments_.begin(), assignments_.end());
  for (std::size_t k = 0; k < assignments_.size(); ++k) {
    if (assignments_[k].second > 1) throw ContractError("head value must be 0 or 1");
    if (k && assignments_[k].first == assignments_[k - 1].first)
      throw ContractError("head assigns label " + std::to_string(assignments_[k].first) + " twice");
  }
}

std::optional<std::uint8_t> Head::value_of(std::size_t label) const {
  auto it = std::lower_bound(assignments_.begin(), assignments_.end(), Assignment{label, 0});
  if (it == assignments_.end() || it->first != label) return std::nullopt;
  return it->second;
}

Head Head::with(std::size_t label, std::uint8_t value) const {
  auto a = assignments_;
  a.emplace_back(label, value);
  return Head(std::move(a));
}

bool PredictionState::set_if_unset(std::size_t label, std::uint8_t value) {
  if (values_[label] != kUnset) return false;
  values_[label] = static_cast<std::int8_t>(value);
  return true;
}

bool PredictionState::all_set() const {
  return std::none_of(values_.begin(), values_.end(), [](std::int8_t v) { return v == kUnset; });
}

std::size_t PredictionState::unset_count() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), kUnset));
}

LabelVector PredictionState::finalize() const {
  LabelVector out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i] == 1 ? 1 : 0;
  return out;
}

bool covers(const Body& body, std::span<const double> row, const PredictionState& context) {
  for (const auto& c : body.conditions) {
    if (c.is_label()) {
      if (!context.is_set(c.index) || context.value(c.index) != static_cast<std::uint8_t>(c.value))
        return false;
      continue;
    }
    double v = row[c.index];
    switch (c.op) {
      case Condition::Op::Eq:
        if (v != c.value) return false;
        break;
      case Condition::Op::Le:
        if (!(v <= c.value)) return false;
        break;
      case Condition::Op::Gt:
        if (!(v > c.value)) return false;
        break;
    }
  }
  return true;
}

std::size_t apply_head_in_place(const Head& head, PredictionState& state) {
  std::size_t newly = 0;
  for (const auto& [label, value] : head.assignments()) newly += state.set_if_unset(label, value);
  return newly;
}

PredictionState apply_head(const Head& head, PredictionState state) {
  apply_head_in_place(head, state);
  return state;
}

PredictionState run_rules(const DecisionList& dl, std::span<const double> row, PredictionState state) {
  if (state.all_set()) return state;
  for (const auto& r : dl.rules) {
    if (!covers(r.body, row, state)) continue;
    apply_head_in_place(r.head, state);
    if (r.full_prediction || state.all_set()) break;
  }
  return state;
}

LabelVector predict(const DecisionList& dl, std::span<const double> row) {
  return run_rules(dl, row, PredictionState(dl.label_count())).finalize();
}

void validate_rule(const Rule& r, const Schema& schema) {
  if (r.head.empty()) throw ValidationError("rule head is empty");
  for (const auto& [label, value] : r.head.assignments())
    if (label >= schema.label_count()) throw ValidationError("head label index out of range");
  std::set<std::size_t> nominal_tested;
  for (std::size_t k = 0; k < r.body.conditions.size(); ++k) {
    const auto& c = r.body.conditions[k];
    for (std::size_t q = 0; q < k; ++q)
      if (r.body.conditions[q] == c) throw ValidationError("duplicate condition in body");
    if (c.is_label()) {
      if (c.index >= schema.label_count()) throw ValidationError("label condition index out of range");
      if (c.op != Condition::Op::Eq || (c.value != 0.0 && c.value != 1.0))
        throw ValidationError("label condition must test equality with 0 or 1");
      continue;
    }
    if (c.index >= schema.attributes.size()) throw ValidationError("attribute index out of range");
    const auto& a = schema.attributes[c.index];
    if (a.is_nominal()) {
      if (c.op != Condition::Op::Eq) throw ValidationError("nominal attribute '" + a.name + "' needs '='");
      if (c.value < 0 || c.value >= static_cast<double>(a.values.size()) || c.value != std::floor(c.value))
        throw ValidationError("bad value index for '" + a.name + "'");
      if (!nominal_tested.insert(c.index).second)
        throw ValidationError("two equality tests on '" + a.name + "'");
    } else {
      if (c.op == Condition::Op::Eq) throw ValidationError("numeric attribute '" + a.name + "' needs <= or >");
      if (!std::isfinite(c.value)) throw ValidationError("non-finite threshold for '" + a.name + "'");
    }
  }
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, static_cast<std::size_t>(ptr - buf));
}

[[noreturn]] void syntax_error(const std::string& what, std::size_t column) {
  throw ParseError(what + " at column " + std::to_string(column + 1));
}

std::uint8_t parse_bit(std::string_view s, std::size_t column) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  syntax_error("expected 0 or 1, found '" + std::string(s) + "'", column);
}

std::size_t lookup_label(const Schema& schema, std::string_view name, std::size_t column) {
  auto idx = schema.label_index(name);
  if (!idx) throw ValidationError("unknown label '" + std::string(name) + "' at column " + std::to_string(column + 1));
  return *idx;
}

Condition parse_condition(std::string_view text, std::size_t offset, const Schema& schema) {
  constexpr std::string_view kLabelPrefix = "label:";
  if (text.substr(0, kLabelPrefix.size()) == kLabelPrefix) {
    auto rest = text.substr(kLabelPrefix.size());
    auto eq = rest.rfind('=');
    if (eq == std::string_view::npos) syntax_error("expected '=' in label condition", offset);
    std::size_t label = lookup_label(schema, rest.substr(0, eq), offset + kLabelPrefix.size());
    return Condition::label_eq(label, parse_bit(rest.substr(eq + 1), offset + kLabelPrefix.size() + eq + 1));
  }
  std::size_t op_pos = text.find("<=");
  std::size_t op_len = 2;
  Condition::Op op = Condition::Op::Le;
  if (op_pos == std::string_view::npos) {
    op_len = 1;
    if ((op_pos = text.find('>')) != std::string_view::npos) {
      op = Condition::Op::Gt;
    } else if ((op_pos = text.find('=')) != std::string_view::npos) {
      op = Condition::Op::Eq;
    } else {
      syntax_error("expected '=', '<=' or '>' in condition '" + std::string(text) + "'", offset);
    }
  }
  std::string_view name = text.substr(0, op_pos);
  std::string_view value = text.substr(op_pos + op_len);
  if (name.empty()) syntax_error("missing attribute name", offset);
  if (value.empty()) syntax_error("missing value", offset + op_pos + op_len);
  auto attr = schema.attribute_index(name);
  if (!attr) throw ValidationError("unknown attribute '" + std::string(name) + "' at column " + std::to_string(offset + 1));
  const auto& a = schema.attributes[*attr];
  if (op == Condition::Op::Eq) {
    if (!a.is_nominal())
      syntax_error("numeric attribute '" + a.name + "' needs '<=' or '>'", offset + op_pos);
    auto vi = a.value_index(value);
    if (!vi)
      throw ValidationError("unknown value '" + std::string(value) + "' for attribute '" + a.name + "'");
    return Condition::nominal_eq(*attr, *vi);
  }
  if (a.is_nominal()) syntax_error("nominal attribute '" + a.name + "' needs '='", offset + op_pos);
  double threshold = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), threshold);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(threshold))
    syntax_error("bad number '" + std::string(value) + "'", offset + op_pos + op_len);
  return op == Condition::Op::Le ? Condition::numeric_le(*attr, threshold)
                                 : Condition::numeric_gt(*attr, threshold);
}

}  // namespace

std::string condition_to_text(const Condition& c, const Schema& schema) {
  if (c.is_label())
    return "label:" + schema.labels.at(c.index) + "=" + (c.value == 1.0 ? "1" : "0");
  const auto& a = schema.attributes.at(c.index);
  switch (c.op) {
    case Condition::Op::Eq:
      return a.name + "=" + a.values.at(static_cast<std::size_t>(c.value));
    case Condition::Op::Le:
      return a.name + "<=" + format_number(c.value);
    case Condition::Op::Gt:
      return a.name + ">" + format_number(c.value);
  }
  return {};
}

std::string head_to_text(const Head& h, const Schema& schema) {
  std::string out;
  for (const auto& [label, value] : h.assignments()) {
    if (!out.empty()) out += ',';
    out += schema.labels.at(label) + "=" + (value ? "1" : "0");
  }
  return out;
}

std::string rule_to_text(const Rule& r, const Schema& schema) {
  std::string out = head_to_text(r.head, schema) + " <- ";
  if (r.body.empty()) {
    out += "true";
  } else {
    for (std::size_t k = 0; k < r.body.conditions.size(); ++k) {
      if (k) out += " & ";
      out += condition_to_text(r.body.conditions[k], schema);
    }
  }
  if (r.full_prediction) out += " [full]";
  return out;
}

Rule parse_rule(std::string_view text, const Schema& schema) {
  Rule r;
  constexpr std::string_view kFull = " [full]";
  if (text.size() >= kFull.size() && text.substr(text.size() - kFull.size()) == kFull) {
    r.full_prediction = true;
    text.remove_suffix(kFull.size());
  }
  constexpr std::string_view kArrow = " <- ";
  auto arrow = text.find(kArrow);
  if (arrow == std::string_view::npos) syntax_error("expected ' <- '", 0);

  std::vector<Assignment> assignments;
  std::string_view head = text.substr(0, arrow);
  std::size_t start = 0;
  while (true) {
    auto comma = head.find(',', start);
    std::string_view item = head.substr(start, comma == std::string_view::npos ? head.npos : comma - start);
    auto eq = item.rfind('=');
    if (item.empty() || eq == std::string_view::npos) syntax_error("expected 'label=0|1' in head", start);
    std::size_t label = lookup_label(schema, item.substr(0, eq), start);
    for (const auto& a : assignments)
      if (a.first == label) syntax_error("label assigned twice in head", start);
    assignments.emplace_back(label, parse_bit(item.substr(eq + 1), start + eq + 1));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  r.head = Head(std::move(assignments));

  std::size_t body_start = arrow + kArrow.size();
  std::string_view body = text.substr(body_start);
  if (body.empty()) syntax_error("missing rule body", body_start);
  if (body != "true") {
    constexpr std::string_view kAnd = " & ";
    std::size_t pos = 0;
    while (true) {
      auto amp = body.find(kAnd, pos);
      std::string_view item = body.substr(pos, amp == std::string_view::npos ? body.npos : amp - pos);
      if (item.empty()) syntax_error("empty condition", body_start + pos);
      r.body.conditions.push_back(parse_condition(item, body_start + pos, schema));
      if (amp == std::string_view::npos) break;
      pos = amp + kAnd.size();
    }
  }
  validate_rule(r, schema);
  return r;
}

std::string model_header(const Schema& schema) {
  std::string out = "mlrule v1; labels=";
  for (std::size_t i = 0; i < schema.labels.size(); ++i) out += (i ? "," : "") + schema.labels[i];
  return out;
}

std::vector<std::string> parse_model_header(std::string_view line) {
  constexpr std::string_view kPrefix = "mlrule v1; labels=";
  if (line.substr(0, kPrefix.size()) != kPrefix) throw ParseError("missing 'mlrule v1; labels=' header", 1);
  std::vector<std::string> labels;
  std::string_view rest = line.substr(kPrefix.size());
  std::size_t start = 0;
  while (true) {
    auto comma = rest.find(',', start);
    labels.emplace_back(rest.substr(start, comma == std::string_view::npos ? rest.npos : comma - start));
    if (labels.back().empty()) throw ParseError("empty label name in header", 1);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return labels;
}

void check_model_labels(const std::vector<std::string>& header_labels, const Schema& schema) {
  if (header_labels == schema.labels) return;
  std::string expected;
  for (const auto& l : header_labels) expected += (expected.empty() ? "" : ",") + l;
  throw ValidationError("model expects " + std::to_string(header_labels.size()) + " labels (" + expected +
                        ") but the data has " + std::to_string(schema.label_count()));
}

void write_rules(std::ostream& out, const std::vector<Rule>& rules, const Schema& schema) {
  for (const auto& r : rules) {
    if (r.stats)
      out << "# rule=" << r.stats->induction_index << " score=" << r.stats->score
          << " covered=" << r.stats->covered << " newly_set=" << r.stats->newly_set << '\n';
    out << rule_to_text(r, schema) << '\n';
  }
}

std::vector<Rule> read_rules(std::span<const std::string> lines, const Schema& schema, std::size_t first_line) {
  std::vector<Rule> rules;
  std::optional<RuleStats> pending;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    std::string_view line = lines[k];
    std::size_t lineno = first_line + k;
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.rfind("# rule=", 0) != 0) continue;
      RuleStats st;
      std::istringstream fields{std::string(line.substr(2))};
      std::string field;
      int seen = 0;
      while (fields >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        try {
          if (key == "rule") st.induction_index = std::stoul(value), ++seen;
          else if (key == "score") st.score = Rational::parse(value), ++seen;
          else if (key == "covered") st.covered = std::stoul(value), ++seen;
          else if (key == "newly_set") st.newly_set = std::stoul(value), ++seen;
        } catch (const std::exception&) {
          throw ParseError("bad rule statistics '" + field + "'", lineno);
        }
      }
      if (seen != 4) throw ParseError("incomplete rule statistics", lineno);
      pending = st;
      continue;
    }
    try {
      Rule r = parse_rule(line, schema);
      r.stats = pending;
      pending.reset();
      rules.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return rules;
}

void write_model(std::ostream& out, const DecisionList& dl) {
  out << model_header(dl.schema) << '\n';
  write_rules(out, dl.rules, dl.schema);
}

DecisionList read_model(std::istream& in, const Schema& schema) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.empty()) throw ParseError("empty model file");
  check_model_labels(parse_model_header(lines[0]), schema);
  for (const auto& l : lines)
    if (l.rfind("## ", 0) == 0)
      throw ParseError("file holds a layered model; load it as a BR/SBR model");
  DecisionList dl;
  dl.schema = schema;
  dl.rules = read_rules(std::span(lines).subspan(1), schema, 2);
  return dl;
}

}  // namespace mlrules
