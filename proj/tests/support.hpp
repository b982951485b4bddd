// Shared helpers for the test binaries: seeded generators and small oracles that
// recompute library results from first principles.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mlrules/data.hpp"
#include "mlrules/headsearch.hpp"
#include "mlrules/rulemodel.hpp"

namespace testing_support {

using namespace mlrules;

inline std::string data_path(const std::string& name) { return std::string(MLRULES_DATA_DIR) + "/" + name; }

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::size_t range(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng); }
  LabelVector labels(std::size_t l, double p = 0.5) {
    LabelVector y(l);
    for (auto& v : y) v = coin(p);
    return y;
  }
};

/// Random split. Label vectors are drawn from a small pool so that duplicates and
/// correlated labels are common, which is where head search gets interesting.
inline CoverageSplit random_split(Gen& g, std::size_t l, std::size_t max_covered = 20, std::size_t max_uncovered = 8) {
  std::vector<LabelVector> pool;
  std::size_t pool_size = g.range(2, 6);
  for (std::size_t k = 0; k < pool_size; ++k) pool.push_back(g.labels(l, 0.2 + 0.6 * g.coin()));
  CoverageSplit s;
  std::size_t c = g.range(1, max_covered), u = g.range(0, max_uncovered);
  for (std::size_t k = 0; k < c; ++k) s.covered.push_back(g.coin(0.7) ? pool[g.range(0, pool_size - 1)] : g.labels(l));
  for (std::size_t k = 0; k < u; ++k) s.uncovered.push_back(g.coin(0.7) ? pool[g.range(0, pool_size - 1)] : g.labels(l));
  return s;
}

/// Random dataset with nominal and numeric attributes; labels depend loosely on
/// the first attributes so that rules have something to find.
inline Dataset random_dataset(Gen& g, std::size_t m, std::size_t l) {
  Schema s;
  std::size_t nominal = g.range(1, 3), numeric = g.range(0, 2);
  for (std::size_t a = 0; a < nominal; ++a) {
    std::vector<std::string> values;
    std::size_t k = g.range(2, 3);
    for (std::size_t v = 0; v < k; ++v) values.push_back("v" + std::to_string(v));
    s.attributes.push_back(Attribute::nominal("n" + std::to_string(a), values));
  }
  for (std::size_t a = 0; a < numeric; ++a) s.attributes.push_back(Attribute::numeric("x" + std::to_string(a)));
  for (std::size_t i = 0; i < l; ++i) s.labels.push_back("y" + std::to_string(i));
  std::vector<std::vector<double>> rows;
  std::vector<LabelVector> labels;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> row;
    for (std::size_t a = 0; a < nominal; ++a)
      row.push_back(static_cast<double>(g.range(0, s.attributes[a].values.size() - 1)));
    for (std::size_t a = 0; a < numeric; ++a) row.push_back(static_cast<double>(g.range(0, 8)) / 4.0);
    LabelVector y(l);
    for (std::size_t i = 0; i < l; ++i) y[i] = g.coin(0.8) ? (row[i % nominal] == 0.0) : g.coin();
    rows.push_back(std::move(row));
    labels.push_back(std::move(y));
  }
  return Dataset(std::move(s), std::move(rows), std::move(labels));
}

/// Random rule over `s`: conditions in canonical order, at most one test per
/// nominal attribute and label, a non-empty head.
inline Rule random_rule(Gen& g, const Schema& s) {
  std::vector<Condition> conds;
  for (std::size_t a = 0; a < s.attributes.size(); ++a) {
    const auto& attr = s.attributes[a];
    if (attr.is_nominal()) {
      if (g.coin(0.4)) conds.push_back(Condition::nominal_eq(a, g.range(0, attr.values.size() - 1)));
    } else {
      double t = std::uniform_real_distribution<double>(-100, 100)(g.rng);
      if (g.coin(0.3)) conds.push_back(Condition::numeric_le(a, t));
      if (g.coin(0.3)) conds.push_back(Condition::numeric_gt(a, t - 1.5));
    }
  }
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    if (g.coin(0.2)) conds.push_back(Condition::label_eq(i, g.coin()));
  std::sort(conds.begin(), conds.end());
  std::vector<Assignment> head;
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    if (g.coin(0.4)) head.emplace_back(i, g.coin());
  if (head.empty()) head.emplace_back(g.range(0, s.labels.size() - 1), g.coin());
  return Rule{Body{conds}, Head(head), g.coin(0.3), {}};
}

/// Micro precision of a head over the covered vectors, counted by hand: every
/// assignment is right or wrong, abstentions are ignored.
inline Rational oracle_micro_precision(const std::vector<std::pair<std::size_t, int>>& head,
                                       const std::vector<LabelVector>& covered) {
  std::int64_t right = 0, total = 0;
  for (const auto& y : covered)
    for (const auto& [i, v] : head) {
      ++total;
      right += y[i] == v;
    }
  return total ? Rational(right, total) : Rational(0);
}

}  // namespace testing_support
