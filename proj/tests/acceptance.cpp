// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit code 0 iff nothing failed.
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "mlrules/eval.hpp"
#include "mlrules/headsearch.hpp"
#include "mlrules/seco.hpp"
#include "mlrules/stacking.hpp"
#include "support.hpp"

using namespace mlrules;
using testing_support::Gen;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict = Verdict::Pass;
  std::string detail;
};

class Collector {
public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ += !ok;
  }
  [[nodiscard]] Outcome outcome(const std::string& summary) const {
    if (!failed_) return {Verdict::Pass, summary};
    std::string d = std::to_string(failed_) + " of " + std::to_string(checks_) + " checks failed";
    for (const auto& f : failures_) d += "; " + f;
    return {Verdict::Fail, d};
  }

private:
  std::size_t checks_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CoverageSplit example_split() {
  CoverageSplit s;
  s.uncovered = {{0, 1, 1, 0}, {1, 1, 1, 1}, {0, 0, 1, 0}};
  s.covered = {{0, 1, 1, 0}, {1, 1, 0, 0}, {1, 0, 0, 0}};
  return s;
}

Outcome example_search_tree() {
  auto t0 = std::chrono::steady_clock::now();
  const std::map<std::vector<std::size_t>, Rational> printed{
      {{1}, {2, 3}},       {{2}, {2, 3}},       {{3}, {1, 3}},       {{4}, {0}},
      {{1, 2}, {2, 3}},    {{1, 3}, {1, 2}},    {{1, 4}, {1, 3}},    {{2, 3}, {1, 2}},
      {{2, 4}, {1, 3}},    {{3, 4}, {1, 6}},    {{1, 2, 3}, {5, 9}}, {{1, 2, 4}, {4, 9}},
      {{1, 3, 4}, {1, 3}}, {{2, 3, 4}, {1, 3}}, {{1, 2, 3, 4}, {5, 12}},
  };
  Collector c;
  CoverageSplit s = example_split();
  for (const auto& [labels, value] : printed) {
    std::vector<Assignment> a;
    for (auto l : labels) a.emplace_back(l - 1, 1);
    Rational got = score_head(Head(a), s, Metric::precision()).value;
    c.check(got == value, "head of size " + std::to_string(labels.size()) + " scored " + got.str());
  }
  HeadSearchOptions o;
  o.polarity = Polarity::PositiveOnly;
  auto r = pruned_best_head(s, Metric::precision(), o);
  c.check(r.head == Head({{0, 1}, {1, 1}}) && r.score == Rational(2, 3), "best head differs");
  double dt = seconds_since(t0);
  c.check(dt < 1.0, "took " + std::to_string(dt) + " s");
  return c.outcome("15 node values exact, best {λ1,λ2}=2/3, " + std::to_string(r.nodes_evaluated) +
                   " evaluated / " + std::to_string(r.nodes_pruned) + " pruned");
}

Outcome contrast() {
  Head h({{0, 1}, {1, 1}});
  std::vector<LabelVector> covered{{0, 1}, {1, 1}, {1, 0}};
  ConfusionMatrix micro;
  CellGrid g(covered.size(), 2);
  for (std::size_t j = 0; j < covered.size(); ++j) {
    micro += selection_confusion(h, covered[j]);
    for (const auto& [i, v] : h.assignments()) g.set(j, i, covered[j][i] == v ? Cell::TP : Cell::FP);
  }
  Rational p = metric_value(Metric::precision(), micro).value;
  Rational sub = aggregate_cells(Metric::subset_accuracy(), g).value;
  Collector c;
  c.check(p == Rational(2, 3), "micro precision " + p.str());
  c.check(sub == Rational(1, 3), "subset confidence " + sub.str());
  return c.outcome("micro precision 2/3, subset-style confidence 1/3");
}

std::vector<Metric> property_table_metrics() {
  std::vector<Metric> out;
  for (auto a : {Averaging::Micro, Averaging::LabelBased, Averaging::ExampleBased, Averaging::Macro})
    for (auto s : {EvaluationStrategy::Partial, EvaluationStrategy::Full})
      for (auto m : {Metric::precision(), Metric::recall(), Metric::hamming(), Metric::f_measure()})
        out.push_back(m.with(a).with(s));
  out.push_back(Metric::subset_accuracy());
  out.push_back(Metric::subset_accuracy().with(EvaluationStrategy::Full));
  return out;
}

Outcome oracle_equivalence() {
  auto t0 = std::chrono::steady_clock::now();
  Gen g(2024);
  Collector c;
  std::size_t pruned = 0, merged = 0;
  auto metrics = property_table_metrics();
  const std::size_t splits = 200;
  for (std::size_t t = 0; t < splits; ++t) {
    CoverageSplit s = testing_support::random_split(g, g.range(2, 6), 20, 8);
    for (const auto& m : metrics) {
      MetricProperties p = metric_properties(m);
      if (!p.anti_monotonic && !p.decomposable) continue;
      for (auto pol : {Polarity::PositiveOnly, Polarity::Both}) {
        HeadSearchOptions o;
        o.polarity = pol;
        auto ex = exhaustive_best_head(s, m, o);
        if (p.anti_monotonic) {
          ++pruned;
          c.check(pruned_best_head(s, m, o).score == ex.score, "pruned differs for " + metric_name(m));
        }
        if (p.decomposable) {
          ++merged;
          c.check(decomposable_best_head(s, m, o).score == ex.score, "decomposable differs for " + metric_name(m));
        }
      }
    }
  }
  double dt = seconds_since(t0);
  c.check(dt < 60.0, "took " + std::to_string(dt) + " s");
  std::ostringstream d;
  d << splits << " splits, " << pruned << " pruned and " << merged << " decomposable comparisons, 0 violations, "
    << static_cast<int>(dt * 10) / 10.0 << " s";
  return c.outcome(d.str());
}

// Every head reachable under `pol` over `l` labels.
std::vector<Head> all_heads(std::size_t l, Polarity pol) {
  std::vector<Head> out;
  std::size_t base = pol == Polarity::Both ? 3 : 2;
  std::size_t total = 1;
  for (std::size_t i = 0; i < l; ++i) total *= base;
  for (std::size_t code = 1; code < total; ++code) {
    std::vector<Assignment> a;
    std::size_t x = code;
    for (std::size_t i = 0; i < l; ++i, x /= base)
      if (x % base) a.emplace_back(i, pol == Polarity::Both ? static_cast<std::uint8_t>(x % base - 1) : 1);
    out.emplace_back(a);
  }
  return out;
}

bool is_extension(const Head& small, const Head& big) {
  if (big.size() != small.size() + 1) return false;
  for (const auto& [i, v] : small.assignments())
    if (big.value_of(i) != std::optional<std::uint8_t>(v)) return false;
  return true;
}

// Looks for h1 ⊂ h2 ⊂ h3 with s(h2) < s(h1) and s(h3) > s(h2): a score that rises
// again after a drop, which breaks pruning at h2.
std::optional<std::string> find_rebound(const Metric& m, std::uint64_t seed, std::size_t tries) {
  Gen g(seed);
  for (std::size_t t = 0; t < tries; ++t) {
    std::size_t l = g.range(2, 4);
    CoverageSplit s = testing_support::random_split(g, l, 8, 6);
    for (auto pol : {Polarity::PositiveOnly, Polarity::Both}) {
      auto heads = all_heads(l, pol);
      std::vector<Score> scores;
      for (const auto& h : heads) scores.push_back(score_head(h, s, m));
      for (std::size_t b = 0; b < heads.size(); ++b) {
        if (scores[b].degenerate) continue;
        for (std::size_t a = 0; a < heads.size(); ++a) {
          if (scores[a].degenerate || !is_extension(heads[a], heads[b]) || !(scores[b].value < scores[a].value))
            continue;
          for (std::size_t c = 0; c < heads.size(); ++c)
            if (!scores[c].degenerate && is_extension(heads[b], heads[c]) && scores[c].value > scores[b].value) {
              std::ostringstream d;
              d << "split #" << t << ": " << scores[a].value << " -> " << scores[b].value << " -> "
                << scores[c].value;
              return d.str();
            }
        }
      }
    }
  }
  return std::nullopt;
}

Outcome non_monotone_counterexamples() {
  const std::vector<Metric> targets{Metric::recall().with(Averaging::ExampleBased),
                                    Metric::subset_accuracy().with(EvaluationStrategy::Full)};
  std::string found, missing;
  for (const auto& m : targets) {
    auto hit = find_rebound(m, 7, 3000);
    if (hit) found += (found.empty() ? "" : "; ") + metric_name(m) + " " + *hit;
    else missing += (missing.empty() ? "" : ", ") + metric_name(m);
  }
  if (missing.empty()) return {Verdict::Pass, found};
  return {Verdict::Fail, "no counterexample for " + missing + (found.empty() ? "" : "; found " + found)};
}

// Plain single-label separate-and-conquer written from scratch: precision of the
// majority value on the covered examples, greedy refinement, remove what is covered.
struct ReferenceStep {
  std::vector<Condition> body;
  std::uint8_t value;
  std::vector<std::size_t> covered;
};

std::pair<Rational, std::uint8_t> majority(const Dataset& d, const std::vector<std::size_t>& rows) {
  std::int64_t pos = 0, n = static_cast<std::int64_t>(rows.size());
  for (auto j : rows) pos += d.labels(j)[0];
  std::uint8_t v = 2 * pos >= n;
  return {Rational(v ? pos : n - pos, n), v};
}

bool holds(const Condition& c, double x) {
  switch (c.op) {
    case Condition::Op::Eq: return x == c.value;
    case Condition::Op::Le: return x <= c.value;
    case Condition::Op::Gt: return x > c.value;
  }
  return false;
}

std::vector<ReferenceStep> reference_covering(const Dataset& d) {
  std::vector<ReferenceStep> steps;
  std::vector<std::size_t> active(d.size());
  for (std::size_t j = 0; j < d.size(); ++j) active[j] = j;
  const auto& attrs = d.schema().attributes;
  while (!active.empty()) {
    ReferenceStep step;
    step.covered = active;
    auto [score, value] = majority(d, active);
    while (true) {
      std::vector<Condition> cands;
      for (std::size_t a = 0; a < attrs.size(); ++a) {
        if (attrs[a].is_nominal()) {
          bool used = false;
          for (const auto& c : step.body) used = used || c.index == a;
          for (std::size_t v = 0; !used && v < attrs[a].values.size(); ++v) cands.push_back(Condition::nominal_eq(a, v));
        } else {
          std::set<double> xs;
          for (auto j : step.covered) xs.insert(d.features(j)[a]);
          for (auto it = xs.begin(); it != xs.end() && std::next(it) != xs.end(); ++it) {
            double t = *it + (*std::next(it) - *it) / 2;
            for (auto c : {Condition::numeric_le(a, t), Condition::numeric_gt(a, t)})
              if (std::find(step.body.begin(), step.body.end(), c) == step.body.end()) cands.push_back(c);
          }
        }
      }
      std::optional<Condition> best;
      std::vector<std::size_t> best_rows;
      Rational best_score;
      std::uint8_t best_value = 0;
      for (const auto& c : cands) {
        std::vector<std::size_t> rows;
        for (auto j : step.covered)
          if (holds(c, d.features(j)[c.index])) rows.push_back(j);
        if (rows.empty()) continue;
        auto [s, v] = majority(d, rows);
        if (!best || s > best_score) best = c, best_rows = rows, best_score = s, best_value = v;
      }
      if (!best || !(best_score > score)) break;
      step.body.push_back(*best);
      step.covered = best_rows;
      score = best_score;
      value = best_value;
    }
    step.value = value;
    std::vector<std::size_t> rest;
    std::set_difference(active.begin(), active.end(), step.covered.begin(), step.covered.end(), std::back_inserter(rest));
    active = rest;
    steps.push_back(std::move(step));
  }
  return steps;
}

void check_covering(Collector& c, const Dataset& d, const std::string& name) {
  LearnResult r = learn_detailed(d, SecoConfig{});
  c.check(!r.truncated && r.model.rules.size() <= d.size() * d.label_count(), name + ": rule bound");
  for (const auto& rule : r.model.rules) c.check(rule.stats && rule.stats->newly_set >= 1, name + ": idle rule");
  for (const auto& p : r.final_predictions) c.check(p.all_set(), name + ": unset training prediction");
  if (d.label_count() != 1) return;
  auto ref = reference_covering(d);
  c.check(ref.size() == r.model.rules.size(), name + ": rule count differs from the reference");
  for (std::size_t k = 0; k < std::min(ref.size(), r.model.rules.size()); ++k) {
    const Rule& rule = r.model.rules[k];
    c.check(rule.body.conditions == ref[k].body && rule.head == Head({{0, ref[k].value}}) &&
                r.trace[k].covered == ref[k].covered && r.trace[k].deactivated == ref[k].covered,
            name + ": step " + std::to_string(k + 1) + " differs from the reference");
  }
}

Outcome covering_soundness() {
  Collector c;
  check_covering(c, builtin_newspapers(), "fixture");
  Gen g(55);
  for (int t = 0; t < 50; ++t)
    check_covering(c, testing_support::random_dataset(g, g.range(1, 50), g.range(1, 5)), "random #" + std::to_string(t));
  std::size_t single = 0;
  for (int t = 0; t < 30; ++t, ++single)
    check_covering(c, testing_support::random_dataset(g, g.range(1, 50), 1), "one-label #" + std::to_string(t));
  Dataset fx = builtin_newspapers();
  for (std::size_t i = 0; i < 4; ++i, ++single) check_covering(c, project_label(fx, i), "fixture label " + std::to_string(i));
  return c.outcome("fixture + 50 random datasets sound; " + std::to_string(single) +
                   " one-label runs match the reference trace");
}

Outcome sbr_structure() {
  Collector c;
  Dataset d = builtin_newspapers();
  SBRModel m = learn_sbr(d, SecoConfig{});
  c.check(m.level1.lists.size() == 4 && m.level2.size() == 4, "list counts");
  for (std::size_t i = 0; i < m.level1.lists.size(); ++i)
    for (const auto& r : m.level1.lists[i].rules) c.check(!r.body.has_label_conditions(), "label test at level 1");
  for (std::size_t i = 0; i < m.level2.size(); ++i)
    for (const auto& r : m.level2[i].rules)
      for (const auto& cond : r.body.conditions) c.check(!(cond.is_label() && cond.index == i), "self test at level 2");

  // λ1 = [f = a], λ2 ≡ λ1, λ3 noise.
  Schema s{{Attribute::nominal("f", {"a", "b"}), Attribute::nominal("g", {"u", "v", "w"})}, {"l1", "l2", "l3"}};
  std::vector<std::vector<double>> rows;
  std::vector<LabelVector> y;
  Gen g(6);
  for (int k = 0; k < 40; ++k) {
    double f = static_cast<double>(g.range(0, 1)), gg = static_cast<double>(g.range(0, 2));
    rows.push_back({f, gg});
    std::uint8_t l1 = f == 0;
    y.push_back({l1, l1, static_cast<std::uint8_t>(g.coin())});
  }
  Dataset syn(s, rows, y);
  SBRModel ms = learn_sbr(syn, SecoConfig{});
  std::size_t right = 0;
  for (std::size_t j = 0; j < syn.size(); ++j) {
    PredictionState st(3);
    st.set_if_unset(0, syn.labels(j)[0]);
    st.set_if_unset(2, syn.labels(j)[2]);
    st = run_rules(ms.level2[1], syn.features(j), st);
    right += (st.is_set(1) ? st.value(1) : 0) == syn.labels(j)[1];
  }
  c.check(right == syn.size(), "level-2 λ2 accuracy " + std::to_string(right) + "/" + std::to_string(syn.size()));
  return c.outcome("fixture 4+4 lists well formed; λ2≡λ1 level-2 training accuracy 1");
}

Outcome metric_identities() {
  Collector c;
  Gen g(77);
  LabelVector y{1, 0, 1, 1, 0};
  c.check(evaluate_predictions({y, y}, {y, y}, Metric::hamming()).value == Rational(1), "Hamming of a perfect prediction");
  auto in_unit = [](double v) { return v >= -1e-12 && v <= 1 + 1e-12; };
  for (int t = 0; t < 1000; ++t) {
    std::vector<ConfusionMatrix> set(g.range(1, 10));
    for (auto& m : set) m = ConfusionMatrix{g.range(0, 20), g.range(0, 20), g.range(0, 20), g.range(0, 20)};
    ConfusionMatrix a = micro_aggregate(set);
    std::shuffle(set.begin(), set.end(), g.rng);
    c.check(micro_aggregate(set) == a, "aggregation depends on order");
    Rational p = metric_value(Metric::precision(), a).value, r = metric_value(Metric::recall(), a).value;
    if (p * r > Rational(0))
      c.check(metric_value(Metric::f_measure(), a).value == Rational(2) * p * r / (p + r), "F1 is not the harmonic mean");
    for (auto m : {Metric::precision(), Metric::recall(), Metric::hamming(), Metric::f_measure(),
                   Metric::f_measure(Rational(1, 3))})
      c.check(in_unit(metric_value(m, a).value.to_double()), metric_name(m) + " outside [0,1]");
  }
  return c.outcome("1000 random matrix sets: order-invariant, F1 identity, scores in [0,1]");
}

Outcome fixture_statistics() {
  // Label columns of the newspaper table, row by row.
  const char* sets[14] = {"0000", "0000", "0100", "1010", "1010", "0100", "1100",
                          "1001", "0110", "1100", "0000", "0000", "1100", "1001"};
  std::int64_t ones = 0;
  std::set<std::string> distinct;
  for (auto* s : sets) {
    for (const char* p = s; *p; ++p) ones += *p == '1';
    distinct.insert(s);
  }
  DatasetStats st = dataset_stats(builtin_newspapers());
  Collector c;
  c.check(ones == 18 && distinct.size() == 6, "oracle count");
  c.check(st.exact_cardinality() == Rational(ones, 14), "cardinality " + st.exact_cardinality().str());
  c.check(st.exact_density() == Rational(ones, 56), "density " + st.exact_density().str());
  c.check(st.distinct_labelsets == distinct.size(), "distinct labelsets");
  return c.outcome("cardinality 18/14, density 18/56, 6 distinct labelsets");
}

Outcome serialization() {
  Collector c;
  Gen g(99);
  for (int t = 0; t < 1000; ++t) {
    Dataset d = testing_support::random_dataset(g, g.range(0, 12), g.range(1, 5));
    DecisionList dl{d.schema(), {}};
    std::size_t n = g.range(0, 4);
    for (std::size_t k = 0; k < n; ++k) dl.rules.push_back(testing_support::random_rule(g, d.schema()));
    std::ostringstream mo;
    write_model(mo, dl);
    std::istringstream mi(mo.str());
    c.check(read_model(mi, d.schema()) == dl, "model #" + std::to_string(t));
    std::ostringstream dout;
    write_csv(dout, d);
    std::istringstream din(dout.str());
    c.check(parse_csv(din, d.label_count()) == d, "dataset #" + std::to_string(t));
  }
  return c.outcome("1000 models and 1000 datasets round-trip unchanged");
}

Outcome emotions_table3() {
  const char* path = std::getenv("MLRULES_EMOTIONS_ARFF");
  if (!path || !*path) return {Verdict::Skip, "set MLRULES_EMOTIONS_ARFF to the MULAN emotions.arff"};
  Dataset d = load_dataset(path, DataFormat::Arff, std::size_t{6});
  DatasetStats s = dataset_stats(d);
  Collector c;
  c.check(s.instances == 593, "instances " + std::to_string(s.instances));
  c.check(s.nominal_count + s.numeric_count == 72, "attributes");
  c.check(s.label_count == 6, "labels");
  c.check(std::abs(s.cardinality - 1.869) < 5e-4, "cardinality " + std::to_string(s.cardinality));
  c.check(std::abs(s.density - 0.311) < 5e-4, "density " + std::to_string(s.density));
  c.check(s.distinct_labelsets == 27, "distinct labelsets " + std::to_string(s.distinct_labelsets));
  return c.outcome("593/72/6/1.869/0.311/27");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"search tree of the example split", example_search_tree},
      {"micro precision vs subset confidence", contrast},
      {"pruned/decomposable search equals exhaustive", oracle_equivalence},
      {"metrics without anti-monotonicity have counterexamples", non_monotone_counterexamples},
      {"covering soundness", covering_soundness},
      {"SBR structure", sbr_structure},
      {"metric identities", metric_identities},
      {"fixture statistics", fixture_statistics},
      {"serialization round trips", serialization},
      {"emotions statistics (optional)", emotions_table3},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.verdict == Verdict::Pass ? "[PASS]" : o.verdict == Verdict::Fail ? "[FAIL]" : "[SKIP]";
    failed += o.verdict == Verdict::Fail;
    std::cout << tag << ' ' << (k + 1) << ". " << criteria[k].first << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << '/' << criteria.size()
            << " criteria not failing" << std::endl;
  return failed ? 1 : 0;
}
