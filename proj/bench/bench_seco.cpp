// Serial versus OpenMP candidate scoring in the covering learner.
#include <chrono>
#include <cstdio>
#include <random>

#include "mlrules/seco.hpp"

using namespace mlrules;

namespace {

Dataset synthetic(std::size_t m, std::size_t numeric, std::size_t labels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Schema s;
  for (std::size_t a = 0; a < numeric; ++a) s.attributes.push_back(Attribute::numeric("x" + std::to_string(a)));
  s.attributes.push_back(Attribute::nominal("color", {"red", "green", "blue"}));
  for (std::size_t i = 0; i < labels; ++i) s.labels.push_back("y" + std::to_string(i));
  std::vector<std::vector<double>> rows;
  std::vector<LabelVector> ys;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> row;
    for (std::size_t a = 0; a < numeric; ++a) row.push_back(std::round(u(rng) * 100) / 100);
    row.push_back(static_cast<double>(rng() % 3));
    LabelVector y(labels);
    for (std::size_t i = 0; i < labels; ++i) {
      double p = 0.2 + 0.6 * row[i % numeric];
      y[i] = u(rng) < p;
    }
    rows.push_back(std::move(row));
    ys.push_back(std::move(y));
  }
  return Dataset(std::move(s), std::move(rows), std::move(ys));
}

double run(const Dataset& d, bool parallel, DecisionList& out) {
  SecoConfig cfg;
  cfg.parallel = parallel;
  auto t0 = std::chrono::steady_clock::now();
  out = learn(d, cfg);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t m = argc > 1 ? std::stoul(argv[1]) : 150;
  Dataset d = synthetic(m, 8, 4, 42);
  DecisionList serial, parallel;
  double ts = run(d, false, serial);
  double tp = run(d, true, parallel);
  std::printf("instances %zu, rules %zu\n", d.size(), serial.rules.size());
  std::printf("serial   %.3f s\n", ts);
  std::printf("parallel %.3f s  (speedup %.2fx)\n", tp, ts / tp);
  std::printf("models identical: %s\n", serial == parallel ? "yes" : "no");
  return serial == parallel ? 0 : 1;
}
