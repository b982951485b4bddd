#include "mlrules/headsearch.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <set>

#include "mlrules/errors.hpp"

namespace mlrules {

std::size_t CoverageSplit::label_count() const {
  if (!covered.empty()) return covered[0].size();
  if (!uncovered.empty()) return uncovered[0].size();
  return 0;
}

bool CoverageSplit::available(bool in_covered, std::size_t row, std::size_t label) const {
  const auto& masks = in_covered ? covered_available : uncovered_available;
  return masks.empty() || masks[row][label] != 0;
}

void CoverageSplit::validate() const {
  std::size_t l = label_count();
  auto check = [l](const std::vector<LabelVector>& rows, const std::vector<LabelVector>& masks) {
    for (const auto& y : rows)
      if (y.size() != l) throw ContractError("coverage split has label vectors of different lengths");
    if (masks.empty()) return;
    if (masks.size() != rows.size()) throw ContractError("availability masks do not match the examples");
    for (const auto& mk : masks)
      if (mk.size() != l) throw ContractError("availability mask has the wrong length");
  };
  check(covered, covered_available);
  check(uncovered, uncovered_available);
}

std::vector<std::size_t> eligible_labels(const CoverageSplit& split) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.label_count(); ++i)
    for (std::size_t j = 0; j < split.covered.size(); ++j)
      if (split.available(true, j, i)) {
        out.push_back(i);
        break;
      }
  return out;
}

MetricProperties metric_properties(const Metric& m) {
  m.validate();
  bool partial = m.strategy == EvaluationStrategy::Partial;
  switch (m.kind) {
    case MetricKind::Precision:
    case MetricKind::Hamming:
    case MetricKind::FMeasure:
      return {true, partial};
    case MetricKind::Recall:
      if (m.averaging == Averaging::ExampleBased) return {false, false};
      return {true, partial};
    case MetricKind::SubsetAccuracy:
      return {partial, false};
  }
  throw ValidationError("metric has no known properties");
}

namespace {

Cell head_cell(std::uint8_t truth, std::uint8_t predicted) { return truth == predicted ? Cell::TP : Cell::FP; }
Cell abstain_cell(std::uint8_t truth) { return truth ? Cell::FN : Cell::TN; }

template <typename Visit>
void for_each_cell(const Head& head, const CoverageSplit& split, EvaluationStrategy strategy, Visit&& visit) {
  std::size_t l = split.label_count();
  bool full = strategy == EvaluationStrategy::Full;
  for (std::size_t j = 0; j < split.covered.size(); ++j) {
    const auto& y = split.covered[j];
    if (full) {
      for (std::size_t i = 0; i < l; ++i) {
        if (!split.available(true, j, i)) continue;
        auto v = head.value_of(i);
        visit(j, i, v ? head_cell(y[i], *v) : abstain_cell(y[i]));
      }
    } else {
      for (const auto& [i, v] : head.assignments())
        if (split.available(true, j, i)) visit(j, i, head_cell(y[i], v));
    }
  }
  if (!full) return;
  std::size_t offset = split.covered.size();
  for (std::size_t j = 0; j < split.uncovered.size(); ++j)
    for (std::size_t i = 0; i < l; ++i)
      if (split.available(false, j, i)) visit(offset + j, i, abstain_cell(split.uncovered[j][i]));
}

}  // namespace

CellGrid head_cells(const Head& head, const CoverageSplit& split, EvaluationStrategy strategy) {
  std::size_t rows = split.covered.size() + (strategy == EvaluationStrategy::Full ? split.uncovered.size() : 0);
  CellGrid g(rows, split.label_count());
  for_each_cell(head, split, strategy, [&g](std::size_t r, std::size_t c, Cell v) { g.set(r, c, v); });
  return g;
}

Score score_head(const Head& head, const CoverageSplit& split, const Metric& m) {
  if (head.empty()) throw ContractError("score_head: empty head");
  if (m.averaging == Averaging::Micro && m.kind != MetricKind::SubsetAccuracy) {
    ConfusionMatrix c;
    for_each_cell(head, split, m.strategy, [&c](std::size_t, std::size_t, Cell v) {
      switch (v) {
        case Cell::TP: ++c.tp; break;
        case Cell::FP: ++c.fp; break;
        case Cell::TN: ++c.tn; break;
        case Cell::FN: ++c.fn; break;
        case Cell::None: break;
      }
    });
    return metric_value(m, c);
  }
  return aggregate_cells(m, head_cells(head, split, m.strategy));
}

bool head_precedes(const Head& a, const Rational& sa, const Head& b, const Rational& sb) {
  if (sa != sb) return sa > sb;
  if (a.size() != b.size()) return a.size() > b.size();
  const auto& x = a.assignments();
  const auto& y = b.assignments();
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k].first != y[k].first) return x[k].first < y[k].first;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k].second != y[k].second) return x[k].second > y[k].second;
  return false;
}

namespace {

std::vector<std::uint8_t> polarity_values(Polarity p) {
  return p == Polarity::Both ? std::vector<std::uint8_t>{1, 0} : std::vector<std::uint8_t>{1};
}

std::vector<std::size_t> require_eligible(const CoverageSplit& split) {
  split.validate();
  if (split.covered.empty()) throw ContractError("head search needs at least one covered example");
  auto labels = eligible_labels(split);
  if (labels.empty()) throw ContractError("every label of the covered examples is already predicted");
  return labels;
}

struct Best {
  Head head;
  Score score{Rational(-1), false};
  bool any = false;

  void offer(const Head& h, const Score& s) {
    if (!any || head_precedes(h, s.value, head, score.value)) {
      head = h;
      score = s;
      any = true;
    }
  }
  HeadSearchResult result() const {
    HeadSearchResult r;
    r.head = head;
    r.score = score.value;
    r.degenerate = score.degenerate;
    return r;
  }
};

}  // namespace

HeadSearchResult exhaustive_best_head(const CoverageSplit& split, const Metric& m,
                                      const HeadSearchOptions& options) {
  auto labels = require_eligible(split);
  if (labels.size() > options.oracle_bound)
    throw ValidationError("exhaustive head search is limited to " + std::to_string(options.oracle_bound) +
                          " labels (got " + std::to_string(labels.size()) + "); use the pruned search");
  auto values = polarity_values(options.polarity);
  std::size_t n = labels.size();
  Best best;
  std::size_t evaluated = 0;
  std::vector<SearchNode> trace;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> chosen;
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (1u << k)) chosen.push_back(labels[k]);
    // Odometer over the value choices for the chosen labels.
    std::vector<std::size_t> pick(chosen.size(), 0);
    while (true) {
      std::vector<Assignment> a;
      for (std::size_t k = 0; k < chosen.size(); ++k) a.emplace_back(chosen[k], values[pick[k]]);
      Head h(std::move(a));
      Score s = score_head(h, split, m);
      ++evaluated;
      if (options.record_trace) trace.push_back({h, s.value, std::nullopt, false});
      best.offer(h, s);
      std::size_t k = 0;
      while (k < pick.size() && ++pick[k] == values.size()) pick[k++] = 0;
      if (k == pick.size()) break;
    }
  }
  auto r = best.result();
  r.nodes_evaluated = evaluated;
  r.trace = std::move(trace);
  return r;
}

HeadSearchResult pruned_best_head(const CoverageSplit& split, const Metric& m, const HeadSearchOptions& options) {
  if (options.require_sound && !metric_properties(m).anti_monotonic)
    throw ValidationError("metric " + metric_name(m) + " is not anti-monotonic; pruned search would be unsound");
  auto labels = require_eligible(split);
  auto values = polarity_values(options.polarity);

  std::vector<SearchNode> nodes;
  std::set<std::vector<Assignment>> visited;
  Best best;

  std::vector<std::size_t> frontier;
  for (std::size_t i : labels)
    for (auto v : values) {
      Head h({{i, v}});
      Score s = score_head(h, split, m);
      visited.insert(h.assignments());
      best.offer(h, s);
      nodes.push_back({h, s.value, std::nullopt, true});
      frontier.push_back(nodes.size() - 1);
    }

  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t parent : frontier) {
      for (std::size_t i : labels) {
        if (nodes[parent].head.value_of(i)) continue;
        for (auto v : values) {
          Head h = nodes[parent].head.with(i, v);
          if (!visited.insert(h.assignments()).second) continue;
          Score s = score_head(h, split, m);
          best.offer(h, s);
          bool expand = s.value >= nodes[parent].score;
          nodes.push_back({std::move(h), s.value, parent, expand});
          if (expand) next.push_back(nodes.size() - 1);
        }
      }
    }
    frontier = std::move(next);
  }

  // Heads that were never scored because every node they extend was cut off.
  std::set<std::vector<Assignment>> pruned;
  for (const auto& node : nodes) {
    if (node.expanded) continue;
    for (std::size_t i : labels) {
      if (node.head.value_of(i)) continue;
      for (auto v : values) {
        Head h = node.head.with(i, v);
        if (!visited.count(h.assignments())) pruned.insert(h.assignments());
      }
    }
  }

  auto r = best.result();
  r.nodes_evaluated = nodes.size();
  r.nodes_pruned = pruned.size();
  if (options.record_trace) r.trace = std::move(nodes);
  return r;
}

HeadSearchResult best_single_head(const CoverageSplit& split, const Metric& m, const HeadSearchOptions& options) {
  auto labels = require_eligible(split);
  Best best;
  std::vector<SearchNode> trace;
  for (std::size_t i : labels)
    for (auto v : polarity_values(options.polarity)) {
      Head h({{i, v}});
      Score s = score_head(h, split, m);
      if (options.record_trace) trace.push_back({h, s.value, std::nullopt, false});
      best.offer(h, s);
    }
  auto r = best.result();
  r.nodes_evaluated = labels.size() * polarity_values(options.polarity).size();
  r.trace = std::move(trace);
  return r;
}

HeadSearchResult decomposable_best_head(const CoverageSplit& split, const Metric& m,
                                        const HeadSearchOptions& options) {
  if (options.require_sound && !metric_properties(m).decomposable)
    throw ValidationError("metric " + metric_name(m) + " is not decomposable");
  auto labels = require_eligible(split);
  std::vector<std::pair<Head, Score>> singles;
  for (std::size_t i : labels)
    for (auto v : polarity_values(options.polarity)) {
      Head h({{i, v}});
      singles.emplace_back(h, score_head(h, split, m));
    }
  Rational top = singles.front().second.value;
  for (const auto& [h, s] : singles) top = std::max(top, s.value);
  // Value 1 is offered first, so a label whose two values tie keeps 1.
  std::vector<Assignment> merged;
  for (const auto& [h, s] : singles) {
    if (s.value != top) continue;
    auto a = h.assignments().front();
    if (std::none_of(merged.begin(), merged.end(), [&](const Assignment& x) { return x.first == a.first; }))
      merged.push_back(a);
  }
  HeadSearchResult r;
  r.head = Head(std::move(merged));
  Score s = score_head(r.head, split, m);
  r.score = s.value;
  r.degenerate = s.degenerate;
  r.nodes_evaluated = singles.size();
  if (options.record_trace)
    for (const auto& [h, sc] : singles) r.trace.push_back({h, sc.value, std::nullopt, false});
  return r;
}

HeadSearchResult best_head(const CoverageSplit& split, const Metric& m, const HeadSearchOptions& options) {
  auto props = metric_properties(m);
  if (props.decomposable) return decomposable_best_head(split, m, options);
  if (props.anti_monotonic) return pruned_best_head(split, m, options);
  return exhaustive_best_head(split, m, options);
}

std::string head_set_text(const Head& h, const std::vector<std::string>& label_names) {
  std::string out = "{";
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto& [i, v] = h.assignments()[k];
    if (k) out += ',';
    out += label_names.at(i);
    if (!v) out += "=0";
  }
  return out + "}";
}

CoverageSplit read_coverage_csv(std::istream& in, std::vector<std::string>& label_names) {
  auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };

  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r") == std::string::npos || line[0] == '#') continue;
    header = split_line(line);
    break;
  }
  if (header.empty()) throw ParseError("coverage file has no header");
  auto cov = std::find(header.begin(), header.end(), "covered");
  if (cov == header.end()) throw ParseError("coverage header needs a 'covered' column", lineno);
  std::size_t cov_col = static_cast<std::size_t>(cov - header.begin());
  label_names.clear();
  for (std::size_t k = 0; k < header.size(); ++k)
    if (k != cov_col) label_names.push_back(header[k]);
  if (label_names.empty()) throw ParseError("coverage header lists no labels", lineno);

  CoverageSplit split;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r") == std::string::npos || line[0] == '#') continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " values, found " +
                           std::to_string(cells.size()),
                       lineno);
    LabelVector y;
    bool covered = false;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (cells[k] != "0" && cells[k] != "1")
        throw ValidationError("line " + std::to_string(lineno) + ": expected 0 or 1, found '" + cells[k] + "'");
      if (k == cov_col) covered = cells[k] == "1";
      else y.push_back(cells[k] == "1");
    }
    (covered ? split.covered : split.uncovered).push_back(std::move(y));
  }
  return split;
}

}  // namespace mlrules
