#include "mlrules/seco.hpp"

#include <algorithm>
#include <exception>

#include "mlrules/errors.hpp"

namespace mlrules {

void SecoConfig::validate() const {
  metric.validate();
  if (full_prediction_threshold < Rational(0) || full_prediction_threshold > Rational(1))
    throw ValidationError("full-prediction threshold must lie in [0,1]");
}

TrainingState TrainingState::start(const Dataset& d) {
  TrainingState s;
  s.data = &d;
  s.predictions.assign(d.size(), PredictionState(d.label_count()));
  s.active.assign(d.size(), 1);
  return s;
}

std::size_t TrainingState::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
}

std::size_t TrainingState::unset_total() const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < active.size(); ++j)
    if (active[j]) n += predictions[j].unset_count();
  return n;
}

std::vector<std::size_t> TrainingState::covered_by(const Body& body) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < active.size(); ++j)
    if (active[j] && covers(body, data->features(j), predictions[j])) out.push_back(j);
  return out;
}

CoverageSplit TrainingState::split(const std::vector<std::size_t>& covered) const {
  CoverageSplit s;
  std::size_t l = data->label_count();
  auto mask = [l](const PredictionState& p) {
    LabelVector m(l);
    for (std::size_t i = 0; i < l; ++i) m[i] = !p.is_set(i);
    return m;
  };
  std::size_t k = 0;
  for (std::size_t j = 0; j < active.size(); ++j) {
    if (!active[j]) continue;
    bool in = k < covered.size() && covered[k] == j;
    if (in) ++k;
    (in ? s.covered : s.uncovered).push_back(data->labels(j));
    (in ? s.covered_available : s.uncovered_available).push_back(mask(predictions[j]));
  }
  return s;
}

std::vector<Condition> candidate_conditions(const TrainingState& state, const Body& body, const SecoConfig& cfg) {
  const Schema& schema = state.data->schema();
  std::vector<Condition> out;
  std::vector<std::size_t> covered = state.covered_by(body);
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    const auto& attr = schema.attributes[a];
    if (attr.is_nominal()) {
      bool tested = std::any_of(body.conditions.begin(), body.conditions.end(),
                                [a](const Condition& c) { return !c.is_label() && c.index == a; });
      if (tested) continue;
      for (std::size_t v = 0; v < attr.values.size(); ++v) out.push_back(Condition::nominal_eq(a, v));
      continue;
    }
    std::vector<double> values;
    for (std::size_t j : covered) values.push_back(state.data->features(j)[a]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      double t = values[k] + (values[k + 1] - values[k]) / 2;
      for (auto c : {Condition::numeric_le(a, t), Condition::numeric_gt(a, t)})
        if (!body.contains(c)) out.push_back(c);
    }
  }
  if (cfg.allow_label_conditions) {
    for (std::size_t i = 0; i < schema.label_count(); ++i) {
      bool tested = std::any_of(body.conditions.begin(), body.conditions.end(),
                                [i](const Condition& c) { return c.is_label() && c.index == i; });
      if (tested) continue;
      out.push_back(Condition::label_eq(i, 0));
      out.push_back(Condition::label_eq(i, 1));
    }
  }
  return out;
}

std::optional<HeadSearchResult> head_for(const TrainingState& state, const std::vector<std::size_t>& covered,
                                         const SecoConfig& cfg) {
  if (covered.empty()) return std::nullopt;
  CoverageSplit s = state.split(covered);
  if (eligible_labels(s).empty()) return std::nullopt;
  HeadSearchOptions opt;
  opt.polarity = cfg.polarity;
  if (cfg.head_mode == HeadMode::SingleLabel) return best_single_head(s, cfg.metric, opt);
  return best_head(s, cfg.metric, opt);
}

namespace {

struct Candidate {
  std::optional<HeadSearchResult> head;
  std::vector<std::size_t> covered;
};

Candidate evaluate_candidate(const TrainingState& state, const Body& body, const SecoConfig& cfg) {
  Candidate c;
  c.covered = state.covered_by(body);
  c.head = head_for(state, c.covered, cfg);
  return c;
}

std::vector<Candidate> evaluate_all(const TrainingState& state, const Body& body,
                                    const std::vector<Condition>& conditions, const SecoConfig& cfg) {
  std::vector<Candidate> out(conditions.size());
  auto one = [&](std::size_t k) {
    Body b = body;
    b.conditions.push_back(conditions[k]);
    out[k] = evaluate_candidate(state, b, cfg);
  };
#ifdef MLRULES_HAVE_OPENMP
  if (cfg.parallel && conditions.size() > 1) {
    std::exception_ptr failure;
    const auto n = static_cast<std::int64_t>(conditions.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t k = 0; k < n; ++k) {
      try {
        one(static_cast<std::size_t>(k));
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
  }
#endif
  for (std::size_t k = 0; k < conditions.size(); ++k) one(k);
  return out;
}

}  // namespace

ScoredRule find_best_rule(const TrainingState& state, const SecoConfig& cfg) {
  if (state.active_count() == 0) throw ContractError("find_best_rule: no active examples");
  Body body;
  Candidate current = evaluate_candidate(state, body, cfg);
  if (!current.head) throw ContractError("find_best_rule: active examples have no unset labels");

  while (true) {
    auto conditions = candidate_conditions(state, body, cfg);
    auto results = evaluate_all(state, body, conditions, cfg);
    // First strictly better candidate in canonical order wins ties.
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < results.size(); ++k) {
      if (!results[k].head) continue;
      if (!pick || results[k].head->score > results[*pick].head->score) pick = k;
    }
    if (!pick || !(results[*pick].head->score > current.head->score)) break;
    body.conditions.push_back(conditions[*pick]);
    current = std::move(results[*pick]);
  }

  ScoredRule out;
  out.rule.body = std::move(body);
  out.rule.head = current.head->head;
  out.score = current.head->score;
  out.covered = std::move(current.covered);
  return out;
}

ApplyStats apply_rule(TrainingState& state, Rule& rule, const SecoConfig& cfg) {
  ApplyStats st;
  auto covered = state.covered_by(rule.body);
  st.covered = covered.size();
  for (std::size_t j : covered) {
    st.newly_set += apply_head_in_place(rule.head, state.predictions[j]);
    st.fully_labeled += state.predictions[j].all_set();
  }
  const Rational& tau = cfg.full_prediction_threshold;
  st.full_prediction = st.covered > 0 && Rational(static_cast<std::int64_t>(st.fully_labeled),
                                                  static_cast<std::int64_t>(st.covered)) >= tau;
  rule.full_prediction = st.full_prediction;
  for (std::size_t j : covered) {
    if (st.full_prediction || state.predictions[j].all_set()) {
      state.active[j] = 0;
      st.deactivated.push_back(j);
    }
  }
  return st;
}

LearnResult learn_detailed(const Dataset& d, const SecoConfig& cfg) {
  cfg.validate();
  LearnResult result;
  result.model.schema = d.schema();
  TrainingState state = TrainingState::start(d);
  std::size_t limit = cfg.max_rules ? cfg.max_rules : d.size() * d.label_count();
  while (state.active_count() > 0 && result.model.rules.size() < limit) {
    ScoredRule best = find_best_rule(state, cfg);
    Rule rule = std::move(best.rule);
    ApplyStats st = apply_rule(state, rule, cfg);
    if (st.newly_set == 0) throw std::logic_error("covering loop accepted a rule that sets no label");
    rule.stats = RuleStats{result.model.rules.size() + 1, best.score, st.covered, st.newly_set};
    result.trace.push_back({std::move(best.covered), std::move(st.deactivated)});
    result.model.rules.push_back(std::move(rule));
  }
  result.truncated = state.active_count() > 0;
  result.final_predictions = std::move(state.predictions);
  return result;
}

DecisionList learn(const Dataset& d, const SecoConfig& cfg) { return learn_detailed(d, cfg).model; }

}  // namespace mlrules
