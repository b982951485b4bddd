#include "mlrules/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mlrules/analysis.hpp"
#include "mlrules/data.hpp"
#include "mlrules/errors.hpp"
#include "mlrules/eval.hpp"
#include "mlrules/headsearch.hpp"
#include "mlrules/seco.hpp"
#include "mlrules/stacking.hpp"

namespace mlrules {

namespace {

struct DataOptions {
  std::string path;
  std::string format;
  std::size_t label_count = 0;
  std::string label_names;

  void add_to(CLI::App* cmd, const std::string& format_flag = "--format") {
    cmd->add_option("--data", path, "Dataset file (.arff or .csv), or 'newspapers' for the built-in example")
        ->required();
    cmd->add_option(format_flag, format, "arff or csv (default: from the extension)")
        ->check(CLI::IsMember({"arff", "csv"}));
    cmd->add_option("--labels", label_count, "Number of trailing columns that are labels");
    cmd->add_option("--label-names", label_names, "Comma-separated names of the label columns");
  }

  [[nodiscard]] Dataset load() const {
    if (path == "newspapers") return builtin_newspapers();
    if (!std::filesystem::exists(path)) throw ValidationError("cannot open '" + path + "'");
    LabelSpec spec;
    if (!label_names.empty()) {
      std::vector<std::string> names;
      std::stringstream ss(label_names);
      for (std::string n; std::getline(ss, n, ',');) names.push_back(n);
      spec = names;
    } else if (label_count) {
      spec = label_count;
    } else {
      throw ValidationError("say which columns are labels with --labels N or --label-names a,b,...");
    }
    DataFormat f = format.empty() ? format_from_path(path) : format == "arff" ? DataFormat::Arff : DataFormat::Csv;
    return load_dataset(path, f, spec);
  }
};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  return f;
}

AnyModel load_model(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model '" + path + "'");
  AnyModel m = read_any_model(in, schema);
  // Attribute names and domains must also agree; label names were checked above.
  for (const auto* dl : m.lists())
    for (const auto& r : dl->rules) validate_rule(r, schema);
  return m;
}

Polarity parse_polarity(const std::string& s) { return s == "positive" ? Polarity::PositiveOnly : Polarity::Both; }

struct TrainOptions {
  DataOptions data;
  std::string learner = "seco";
  std::string heuristic = "precision";
  std::string head_mode = "multi";
  std::string polarity = "both";
  std::string tau = "1";
  std::string train_inputs = "truth";
  bool label_conditions = false;
  std::size_t max_rules = 0;
  std::uint64_t seed = 0;
  bool serial = false;
  std::string out;
};

void print_rules(std::ostream& out, const DecisionList& dl, const std::string& indent) {
  for (const auto& r : dl.rules) {
    out << indent << r.stats->induction_index << ": " << rule_to_text(r, dl.schema) << "  score="
        << r.stats->score << " (" << fixed6(r.stats->score.to_double()) << ") covered=" << r.stats->covered
        << " newly_set=" << r.stats->newly_set << '\n';
  }
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
  SecoConfig cfg;
  cfg.metric = parse_metric(o.heuristic);
  cfg.head_mode = o.head_mode == "single" ? HeadMode::SingleLabel : HeadMode::MultiLabel;
  cfg.polarity = parse_polarity(o.polarity);
  try {
    cfg.full_prediction_threshold = Rational::parse(o.tau);
  } catch (const std::exception&) {
    throw ValidationError("--tau expects a number in [0,1], got '" + o.tau + "'");
  }
  cfg.allow_label_conditions = o.label_conditions;
  cfg.max_rules = o.max_rules;
  cfg.seed = o.seed;
  cfg.parallel = !o.serial;
  cfg.validate();
  if (o.learner != "sbr" && o.train_inputs != "truth")
    throw ValidationError("--train-inputs only applies to --learner sbr");
  if (o.learner != "seco" && o.label_conditions)
    throw ValidationError("--label-conditions only applies to --learner seco");

  Dataset d = o.data.load();
  auto t0 = std::chrono::steady_clock::now();
  std::ofstream file = open_out(o.out);
  if (o.learner == "seco") {
    LearnResult r = learn_detailed(d, cfg);
    write_model(file, r.model);
    out << "rules: " << r.model.rules.size() << '\n';
    print_rules(out, r.model, "  ");
    if (r.truncated) out << "warning: stopped at the rule limit with examples left\n";
  } else if (o.learner == "br") {
    BRModel m = learn_br(d, cfg);
    write_br(file, m);
    for (const auto& dl : m.lists) {
      out << "label " << dl.schema.labels[&dl - m.lists.data()] << " level 1: " << dl.rules.size() << " rules\n";
      print_rules(out, dl, "  ");
    }
  } else {
    SBRModel m = learn_sbr(d, cfg, o.train_inputs == "level1" ? TrainInputs::Level1Predictions : TrainInputs::TrueLabels);
    write_sbr(file, m);
    for (int level = 1; level <= 2; ++level) {
      const auto& lists = level == 1 ? m.level1.lists : m.level2;
      for (std::size_t i = 0; i < lists.size(); ++i) {
        out << "label " << d.schema().labels[i] << " level " << level << ": " << lists[i].rules.size() << " rules\n";
        print_rules(out, lists[i], "  ");
      }
    }
  }
  std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  out << "time: " << fixed6(dt.count()) << " s\n";
  return 0;
}

void write_predictions(std::ostream& out, const Schema& schema, const std::vector<LabelVector>& rows) {
  for (std::size_t i = 0; i < schema.labels.size(); ++i) out << (i ? "," : "") << schema.labels[i];
  out << '\n';
  for (const auto& y : rows) {
    for (std::size_t i = 0; i < y.size(); ++i) out << (i ? "," : "") << int(y[i]);
    out << '\n';
  }
}

std::vector<LabelVector> predict_all(const AnyModel& m, const Dataset& d) {
  std::vector<LabelVector> out;
  for (std::size_t j = 0; j < d.size(); ++j) out.push_back(m.predict(d.features(j)));
  return out;
}

std::vector<LabelVector> read_predictions(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open predictions '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  std::vector<LabelVector> rows;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (header) {
      if (cells != schema.labels)
        throw ValidationError("predictions header does not match the " + std::to_string(schema.label_count()) +
                              " labels of the data");
      header = false;
      continue;
    }
    if (cells.size() != schema.label_count())
      throw ParseError("expected " + std::to_string(schema.label_count()) + " values", lineno);
    LabelVector y;
    for (const auto& c : cells) {
      if (c != "0" && c != "1") throw ValidationError("line " + std::to_string(lineno) + ": value '" + c + "' is not 0/1");
      y.push_back(c == "1");
    }
    rows.push_back(std::move(y));
  }
  if (header) throw ParseError("predictions file is empty");
  return rows;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-label rule learning: separate-and-conquer, stacking, head search"};
  app.name("mlrules");
  app.require_subcommand(1);

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Learn a rule model");
  train.data.add_to(c_train);
  c_train->add_option("--learner", train.learner, "seco, br or sbr")->check(CLI::IsMember({"seco", "br", "sbr"}));
  c_train->add_option("--heuristic", train.heuristic, "Rule selection metric: " + valid_metric_names());
  c_train->add_option("--head-mode", train.head_mode, "multi or single")->check(CLI::IsMember({"multi", "single"}));
  c_train->add_option("--polarity", train.polarity, "both or positive")->check(CLI::IsMember({"both", "positive"}));
  c_train->add_option("--tau", train.tau, "Full-prediction threshold in [0,1]");
  c_train->add_option("--train-inputs", train.train_inputs, "sbr level-2 inputs: truth or level1")
      ->check(CLI::IsMember({"truth", "level1"}));
  c_train->add_flag("--label-conditions", train.label_conditions, "Let rule bodies test labels (seco only)");
  c_train->add_option("--max-rules", train.max_rules, "Rule limit (default m*l)");
  c_train->add_option("--seed", train.seed, "Random seed (the learners are deterministic)");
  c_train->add_flag("--serial", train.serial, "Score candidates on one thread");
  c_train->add_option("-o,--out", train.out, "Model file to write")->required();

  DataOptions pdata;
  std::string p_model, p_out;
  auto* c_predict = app.add_subcommand("predict", "Predict label vectors");
  pdata.add_to(c_predict);
  c_predict->add_option("--model", p_model, "Model file")->required();
  c_predict->add_option("-o,--out", p_out, "Predictions CSV (default: standard output)");

  DataOptions edata;
  std::string e_model, e_predictions;
  std::vector<std::string> e_metrics;
  auto* c_eval = app.add_subcommand("evaluate", "Score predictions against the data's labels");
  edata.add_to(c_eval);
  auto* e_model_opt = c_eval->add_option("--model", e_model, "Model file");
  auto* e_pred_opt = c_eval->add_option("--predictions", e_predictions, "Predictions CSV");
  e_model_opt->excludes(e_pred_opt);
  c_eval->add_option("--metric", e_metrics, "Metric name, repeatable (default: hamming, subset-accuracy, precision, recall, f1)");

  std::string b_coverage, b_heuristic = "precision", b_polarity = "both", b_search = "pruned";
  bool b_tree = false;
  auto* c_head = app.add_subcommand("best-head", "Search the best head for a covered/uncovered split");
  c_head->add_option("--coverage", b_coverage, "CSV of label vectors with a 'covered' column")->required();
  c_head->add_option("--heuristic", b_heuristic, "Metric: " + valid_metric_names());
  c_head->add_option("--polarity", b_polarity, "both or positive")->check(CLI::IsMember({"both", "positive"}));
  c_head->add_option("--search", b_search, "pruned, exhaustive, decomposable or auto")
      ->check(CLI::IsMember({"pruned", "exhaustive", "decomposable", "auto"}));
  c_head->add_flag("--tree", b_tree, "Print every scored head");

  DataOptions sdata;
  auto* c_stats = app.add_subcommand("stats", "Dataset statistics");
  sdata.add_to(c_stats);

  DataOptions ddata;
  std::string d_model, d_format = "csv", d_out;
  bool d_signed = false;
  auto* c_deps = app.add_subcommand("deps", "Export label dependencies found in a model");
  ddata.add_to(c_deps, "--data-format");
  c_deps->add_option("--model", d_model, "Model file")->required();
  c_deps->add_option("--format", d_format, "csv or dot")->check(CLI::IsMember({"csv", "dot"}));
  c_deps->add_flag("--signed", d_signed, "Long-format csv with head and condition values");
  c_deps->add_option("-o,--out", d_out, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (c_train->parsed()) return cmd_train(train, out);

    if (c_predict->parsed()) {
      Dataset d = pdata.load();
      AnyModel m = load_model(p_model, d.schema());
      check_schema_match(m.schema(), d.schema());
      auto rows = predict_all(m, d);
      if (p_out.empty()) {
        write_predictions(out, d.schema(), rows);
      } else {
        std::ofstream f = open_out(p_out);
        write_predictions(f, d.schema(), rows);
      }
      return 0;
    }

    if (c_eval->parsed()) {
      Dataset d = edata.load();
      std::vector<LabelVector> predicted;
      if (!e_model.empty()) predicted = predict_all(load_model(e_model, d.schema()), d);
      else if (!e_predictions.empty()) predicted = read_predictions(e_predictions, d.schema());
      else throw ValidationError("evaluate needs --model or --predictions");
      if (predicted.size() != d.size())
        throw ValidationError("predictions have " + std::to_string(predicted.size()) + " rows, data has " +
                              std::to_string(d.size()));
      if (e_metrics.empty()) e_metrics = {"hamming", "subset-accuracy", "precision", "recall", "f1"};
      std::vector<Metric> metrics;
      for (const auto& name : e_metrics) metrics.push_back(parse_metric(name));
      for (std::size_t k = 0; k < metrics.size(); ++k) {
        Score s = evaluate_predictions(d.label_matrix(), predicted, metrics[k]);
        out << e_metrics[k] << ' ' << fixed6(s.value.to_double()) << (s.degenerate ? " (undefined)" : "") << '\n';
      }
      return 0;
    }

    if (c_head->parsed()) {
      std::ifstream in(b_coverage);
      if (!in) throw ValidationError("cannot open '" + b_coverage + "'");
      std::vector<std::string> names;
      CoverageSplit split = read_coverage_csv(in, names);
      Metric m = parse_metric(b_heuristic);
      HeadSearchOptions opt;
      opt.polarity = parse_polarity(b_polarity);
      opt.record_trace = b_tree;
      HeadSearchResult r = b_search == "pruned"       ? pruned_best_head(split, m, opt)
                           : b_search == "exhaustive" ? exhaustive_best_head(split, m, opt)
                           : b_search == "decomposable" ? decomposable_best_head(split, m, opt)
                                                        : best_head(split, m, opt);
      out << "best head: " << head_set_text(r.head, names) << ' ' << r.score << '\n';
      out << "score: " << fixed6(r.score.to_double()) << '\n';
      out << "nodes evaluated: " << r.nodes_evaluated << '\n';
      out << "nodes pruned: " << r.nodes_pruned << '\n';
      if (b_tree) {
        out << "tree:\n";
        for (const auto& n : r.trace) {
          out << std::string(2 * n.head.size(), ' ') << head_set_text(n.head, names) << ' ' << n.score;
          if (n.parent) out << (n.expanded ? "" : "  (not expanded)");
          out << '\n';
        }
      }
      return 0;
    }

    if (c_stats->parsed()) {
      DatasetStats s = dataset_stats(sdata.load());
      out << "instances: " << s.instances << '\n'
          << "nominal attributes: " << s.nominal_count << '\n'
          << "numeric attributes: " << s.numeric_count << '\n'
          << "labels: " << s.label_count << '\n'
          << "cardinality: " << fixed6(s.cardinality) << " (" << s.exact_cardinality() << ")\n"
          << "density: " << fixed6(s.density) << " (" << s.exact_density() << ")\n"
          << "distinct labelsets: " << s.distinct_labelsets << '\n';
      if (s.degenerate) out << "warning: no instances\n";
      return 0;
    }

    if (c_deps->parsed()) {
      Dataset d = ddata.load();
      AnyModel m = load_model(d_model, d.schema());
      std::string text = d_signed ? export_signed_csv(m.lists())
                                  : export_matrix(dependency_matrix(m.lists()),
                                                  d_format == "dot" ? ExportFormat::Dot : ExportFormat::Csv);
      if (d_out.empty()) {
        out << text;
      } else {
        std::ofstream f = open_out(d_out);
        f << text;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mlrules
