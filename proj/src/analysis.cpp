#include "mlrules/analysis.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "mlrules/errors.hpp"

namespace mlrules {

DependencyClass classify_rule(const Rule& r) {
  DependencyClass c;
  c.head_arity = r.head.size() > 1 ? HeadArity::Multi : HeadArity::Single;
  bool pos = false, neg = false;
  for (const auto& [i, v] : r.head.assignments()) (v ? pos : neg) = true;
  c.head_sign = pos && neg ? HeadSign::Mixed : neg ? HeadSign::Negative : HeadSign::Positive;
  if (!r.body.has_label_conditions()) c.body_class = BodyClass::LabelIndependent;
  else if (r.body.has_feature_conditions()) c.body_class = BodyClass::PartiallyLabelDependent;
  else c.body_class = BodyClass::FullyLabelDependent;
  return c;
}

std::string to_string(HeadArity a) { return a == HeadArity::Single ? "single" : "multi"; }

std::string to_string(HeadSign s) {
  switch (s) {
    case HeadSign::Positive: return "positive";
    case HeadSign::Negative: return "negative";
    case HeadSign::Mixed: return "mixed";
  }
  return {};
}

std::string to_string(BodyClass b) {
  switch (b) {
    case BodyClass::LabelIndependent: return "label-independent";
    case BodyClass::PartiallyLabelDependent: return "partially-label-dependent";
    case BodyClass::FullyLabelDependent: return "fully-label-dependent";
  }
  return {};
}

DependencyMatrix::DependencyMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), global_(labels_.size() * labels_.size()), local_(labels_.size() * labels_.size()) {}

void DependencyMatrix::add(std::size_t head, std::size_t body, bool is_global, std::size_t n) {
  (is_global ? global_ : local_).at(head * size() + body) += n;
}

std::size_t DependencyMatrix::total() const {
  std::size_t t = 0;
  for (std::size_t k = 0; k < global_.size(); ++k) t += global_[k] + local_[k];
  return t;
}

namespace {

std::vector<std::size_t> body_labels(const Body& b) {
  std::set<std::size_t> s;
  for (const auto& c : b.conditions)
    if (c.is_label()) s.insert(c.index);
  return {s.begin(), s.end()};
}

}  // namespace

DependencyMatrix dependency_matrix(const std::vector<const DecisionList*>& lists) {
  if (lists.empty()) return {};
  DependencyMatrix mx(lists.front()->schema.labels);
  for (const auto* dl : lists) {
    if (dl->schema.labels != mx.labels()) throw ContractError("dependency_matrix: lists disagree on the labels");
    for (const auto& r : dl->rules) {
      auto cls = classify_rule(r).body_class;
      if (cls == BodyClass::LabelIndependent) continue;
      for (std::size_t b : body_labels(r.body))
        for (const auto& [h, v] : r.head.assignments()) mx.add(h, b, cls == BodyClass::FullyLabelDependent);
    }
  }
  return mx;
}

DependencyMatrix dependency_matrix(const DecisionList& dl) { return dependency_matrix({&dl}); }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::vector<std::string> csv_fields(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') out.back() += '"', ++k;
      else if (c == '"') quoted = false;
      else out.back() += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

bool plain_dot_id(const std::string& s) {
  if (s.empty() || (s[0] >= '0' && s[0] <= '9')) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return c >= 0x80 || c == '_' || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  });
}

std::string dot_id(const std::string& s) {
  if (plain_dot_id(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string export_matrix(const DependencyMatrix& mx, ExportFormat format) {
  std::ostringstream out;
  std::size_t n = mx.size();
  if (format == ExportFormat::Csv) {
    out << "head\\body";
    for (const auto& l : mx.labels()) out << ',' << csv_field(l);
    out << '\n';
    for (std::size_t h = 0; h < n; ++h) {
      out << csv_field(mx.labels()[h]);
      for (std::size_t b = 0; b < n; ++b) out << ',' << mx.global(h, b) << ':' << mx.local(h, b);
      out << '\n';
    }
    return out.str();
  }
  out << "digraph dependencies {\n";
  for (const auto& l : mx.labels()) out << "  " << dot_id(l) << ";\n";
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t b = 0; b < n; ++b) {
      auto edge = [&](std::size_t count, const char* kind, const char* color) {
        if (!count) return;
        out << "  " << dot_id(mx.labels()[b]) << " -> " << dot_id(mx.labels()[h]) << " [kind=" << kind
            << "][label=\"" << count << "\", color=" << color << "];\n";
      };
      edge(mx.global(h, b), "global", "blue");
      edge(mx.local(h, b), "local", "green");
    }
  out << "}\n";
  return out.str();
}

DependencyMatrix parse_matrix_csv(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
    if (!line.empty() && line != "\r") lines.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.empty()) throw ParseError("empty dependency matrix");
  auto header = csv_fields(lines[0]);
  std::vector<std::string> labels(header.begin() + 1, header.end());
  if (lines.size() != labels.size() + 1)
    throw ParseError("expected " + std::to_string(labels.size()) + " matrix rows");
  DependencyMatrix mx(labels);
  for (std::size_t h = 0; h < labels.size(); ++h) {
    auto cells = csv_fields(lines[h + 1]);
    if (cells.size() != labels.size() + 1 || cells[0] != labels[h])
      throw ParseError("malformed matrix row for '" + labels[h] + "'", h + 2);
    for (std::size_t b = 0; b < labels.size(); ++b) {
      const auto& cell = cells[b + 1];
      auto colon = cell.find(':');
      if (colon == std::string::npos) throw ParseError("cell '" + cell + "' is not 'global:local'", h + 2);
      try {
        mx.add(h, b, true, std::stoul(cell.substr(0, colon)));
        mx.add(h, b, false, std::stoul(cell.substr(colon + 1)));
      } catch (const std::logic_error&) {
        throw ParseError("cell '" + cell + "' is not 'global:local'", h + 2);
      }
    }
  }
  return mx;
}

std::string export_signed_csv(const std::vector<const DecisionList*>& lists) {
  // (head, body, global?, head value, body value) -> count
  std::map<std::tuple<std::size_t, std::size_t, bool, int, int>, std::size_t> counts;
  const std::vector<std::string>* labels = nullptr;
  for (const auto* dl : lists) {
    labels = &dl->schema.labels;
    for (const auto& r : dl->rules) {
      auto cls = classify_rule(r).body_class;
      if (cls == BodyClass::LabelIndependent) continue;
      for (const auto& c : r.body.conditions) {
        if (!c.is_label()) continue;
        for (const auto& [h, v] : r.head.assignments())
          ++counts[{h, c.index, cls == BodyClass::FullyLabelDependent, v, static_cast<int>(c.value)}];
      }
    }
  }
  std::ostringstream out;
  out << "head,body,kind,head_value,body_value,count\n";
  for (const auto& [key, n] : counts) {
    const auto& [h, b, global, hv, bv] = key;
    out << csv_field((*labels)[h]) << ',' << csv_field((*labels)[b]) << ',' << (global ? "global" : "local") << ','
        << hv << ',' << bv << ',' << n << '\n';
  }
  return out.str();
}

}  // namespace mlrules
