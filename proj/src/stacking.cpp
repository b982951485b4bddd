#include "mlrules/stacking.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "mlrules/errors.hpp"

namespace mlrules {

Dataset project_label(const Dataset& d, std::size_t target) {
  if (target >= d.label_count()) throw ContractError("project_label: label index out of range");
  Schema s{d.schema().attributes, {d.schema().labels[target]}};
  std::vector<LabelVector> labels;
  labels.reserve(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) labels.push_back({d.labels(j)[target]});
  return Dataset(std::move(s), d.rows(), std::move(labels));
}

Dataset augment_instances(const Dataset& d, std::size_t target, const std::vector<LabelVector>& label_values) {
  if (target >= d.label_count()) throw ContractError("augment_instances: label index out of range");
  if (label_values.size() != d.size()) throw ContractError("augment_instances: label rows do not match the data");
  Schema s{d.schema().attributes, {d.schema().labels[target]}};
  for (std::size_t i = 0; i < d.label_count(); ++i)
    if (i != target) s.attributes.push_back(Attribute::nominal(d.schema().labels[i], {"0", "1"}));
  std::vector<std::vector<double>> rows = d.rows();
  std::vector<LabelVector> labels;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (label_values[j].size() != d.label_count()) throw ContractError("augment_instances: ragged label rows");
    for (std::size_t i = 0; i < d.label_count(); ++i)
      if (i != target) rows[j].push_back(label_values[j][i] ? 1.0 : 0.0);
    labels.push_back({d.labels(j)[target]});
  }
  return Dataset(std::move(s), std::move(rows), std::move(labels));
}

DecisionList lift_list(const DecisionList& projected, const Schema& full, std::size_t target) {
  DecisionList out;
  out.schema = full;
  std::size_t base = full.attributes.size();
  for (const auto& r : projected.rules) {
    Rule lifted = r;
    std::vector<Assignment> head;
    for (const auto& [i, v] : r.head.assignments()) {
      if (i != 0) throw ContractError("lift_list: projected list assigns more than one label");
      head.emplace_back(target, v);
    }
    lifted.head = Head(std::move(head));
    for (auto& c : lifted.body.conditions) {
      if (c.is_label()) throw ContractError("lift_list: projected list already tests labels");
      if (c.index < base) continue;
      std::size_t k = c.index - base;
      std::size_t label = k < target ? k : k + 1;
      c = Condition::label_eq(label, static_cast<std::uint8_t>(c.value));
    }
    out.rules.push_back(std::move(lifted));
  }
  return out;
}

namespace {

SecoConfig single_label(SecoConfig cfg) {
  cfg.head_mode = HeadMode::SingleLabel;
  cfg.allow_label_conditions = false;
  return cfg;
}

}  // namespace

BRModel learn_br(const Dataset& d, const SecoConfig& cfg) {
  BRModel m;
  m.schema = d.schema();
  SecoConfig inner = single_label(cfg);
  for (std::size_t i = 0; i < d.label_count(); ++i)
    m.lists.push_back(lift_list(learn(project_label(d, i), inner), d.schema(), i));
  return m;
}

SBRModel learn_sbr(const Dataset& d, const SecoConfig& cfg, TrainInputs inputs) {
  SBRModel m;
  m.level1 = learn_br(d, cfg);
  std::vector<LabelVector> values = d.label_matrix();
  if (inputs == TrainInputs::Level1Predictions)
    for (std::size_t j = 0; j < d.size(); ++j) values[j] = predict_br(m.level1, d.features(j));
  SecoConfig inner = single_label(cfg);
  for (std::size_t i = 0; i < d.label_count(); ++i)
    m.level2.push_back(lift_list(learn(augment_instances(d, i, values), inner), d.schema(), i));
  return m;
}

LabelVector predict_br(const BRModel& m, std::span<const double> row) {
  LabelVector out(m.lists.size());
  for (std::size_t i = 0; i < m.lists.size(); ++i) out[i] = predict(m.lists[i], row)[i];
  return out;
}

LabelVector predict_sbr(const SBRModel& m, std::span<const double> row) {
  LabelVector first = predict_br(m.level1, row);
  LabelVector out(first.size());
  for (std::size_t i = 0; i < m.level2.size(); ++i) {
    PredictionState state(first.size());
    for (std::size_t k = 0; k < first.size(); ++k)
      if (k != i) state.set_if_unset(k, first[k]);
    state = run_rules(m.level2[i], row, state);
    out[i] = state.is_set(i) ? state.value(i) : 0;
  }
  return out;
}

namespace {

void write_section(std::ostream& out, const DecisionList& dl, std::size_t label, int level) {
  out << "## label " << dl.schema.labels[label] << " level " << level << '\n';
  write_rules(out, dl.rules, dl.schema);
}

}  // namespace

void write_br(std::ostream& out, const BRModel& m) {
  out << model_header(m.schema) << '\n';
  for (std::size_t i = 0; i < m.lists.size(); ++i) write_section(out, m.lists[i], i, 1);
}

void write_sbr(std::ostream& out, const SBRModel& m) {
  write_br(out, m.level1);
  for (std::size_t i = 0; i < m.level2.size(); ++i) write_section(out, m.level2[i], i, 2);
}

LabelVector AnyModel::predict(std::span<const double> row) const {
  switch (kind) {
    case Kind::List: return mlrules::predict(list, row);
    case Kind::BR: return predict_br(sbr.level1, row);
    case Kind::SBR: return predict_sbr(sbr, row);
  }
  return {};
}

std::vector<const DecisionList*> AnyModel::lists() const {
  std::vector<const DecisionList*> out;
  if (kind == Kind::List) {
    out.push_back(&list);
    return out;
  }
  for (const auto& l : sbr.level1.lists) out.push_back(&l);
  for (const auto& l : sbr.level2) out.push_back(&l);
  return out;
}

const Schema& AnyModel::schema() const { return kind == Kind::List ? list.schema : sbr.level1.schema; }

void write_any_model(std::ostream& out, const AnyModel& m) {
  switch (m.kind) {
    case AnyModel::Kind::List: write_model(out, m.list); break;
    case AnyModel::Kind::BR: write_br(out, m.sbr.level1); break;
    case AnyModel::Kind::SBR: write_sbr(out, m.sbr); break;
  }
}

AnyModel read_any_model(std::istream& in, const Schema& schema) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.empty()) throw ParseError("empty model file");
  check_model_labels(parse_model_header(lines[0]), schema);

  AnyModel m;
  bool sectioned = false;
  for (const auto& l : lines) sectioned = sectioned || l.starts_with("## ");
  if (!sectioned) {
    m.list.schema = schema;
    m.list.rules = read_rules(std::span(lines).subspan(1), schema, 2);
    return m;
  }

  struct Section {
    std::size_t label;
    int level;
    std::size_t first;  // index of the first rule line
    std::size_t end;
  };
  std::vector<Section> sections;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (!lines[k].starts_with("## ")) {
      if (sections.empty() && !lines[k].empty() && lines[k][0] != '#')
        throw ParseError("rule outside a '## label' section", k + 1);
      continue;
    }
    std::istringstream fields(lines[k].substr(3));
    std::string kw1, name, kw2;
    int level = 0;
    if (!(fields >> kw1 >> name >> kw2 >> level) || kw1 != "label" || kw2 != "level" || (level != 1 && level != 2))
      throw ParseError("expected '## label <name> level <1|2>'", k + 1);
    auto idx = schema.label_index(name);
    if (!idx) throw ValidationError("line " + std::to_string(k + 1) + ": unknown label '" + name + "'");
    if (!sections.empty()) sections.back().end = k;
    sections.push_back({*idx, level, k + 1, lines.size()});
  }

  std::size_t l = schema.label_count();
  bool has_level2 = sections.size() == 2 * l;
  if (sections.size() != l && !has_level2)
    throw ParseError("expected " + std::to_string(l) + " or " + std::to_string(2 * l) + " sections, found " +
                     std::to_string(sections.size()));
  m.kind = has_level2 ? AnyModel::Kind::SBR : AnyModel::Kind::BR;
  m.sbr.level1.schema = schema;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto& sec = sections[s];
    int want_level = s < l ? 1 : 2;
    std::size_t want_label = s % l;
    if (sec.level != want_level || sec.label != want_label)
      throw ParseError("section " + std::to_string(s + 1) + " should be label " + schema.labels[want_label] +
                       " level " + std::to_string(want_level), sec.first);
    DecisionList dl;
    dl.schema = schema;
    dl.rules = read_rules(std::span(lines).subspan(sec.first, sec.end - sec.first), schema, sec.first + 1);
    for (const auto& r : dl.rules)
      for (const auto& [i, v] : r.head.assignments())
        if (i != sec.label)
          throw ValidationError("a rule in the section for '" + schema.labels[sec.label] + "' assigns '" +
                                schema.labels[i] + "'");
    (want_level == 1 ? m.sbr.level1.lists : m.sbr.level2).push_back(std::move(dl));
  }
  return m;
}

}  // namespace mlrules
