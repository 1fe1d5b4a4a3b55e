#include "tad/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "tad/baselines.hpp"
#include "tad/engine.hpp"
#include "tad/errors.hpp"
#include "tad/evaluation.hpp"
#include "tad/io.hpp"
#include "tad/quality.hpp"
#include "tad/regressor.hpp"
#include "tad/synthetic.hpp"
#include "tad/targets.hpp"
#include "tad/trace.hpp"

namespace tad::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(v >= 0.0)) {
      throw ValidationError("--grid: invalid lambda '" + item + "'");
    }
    grid.push_back(v);
  }
  if (grid.empty()) throw ValidationError("--grid: no lambda values");
  return grid;
}

std::pair<int, int> parse_len(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ValidationError("--len: expected A..B, got '" + text + "'");
  }
}

TraceDataset load_all(const std::vector<std::string>& paths) {
  std::vector<TraceDataset> parts;
  for (const auto& p : paths) parts.push_back(read_traces(p));
  return parts.size() == 1 ? std::move(parts.front()) : concat_datasets(parts);
}

std::string resolve_metric(const TraceDataset& d, const std::string& requested) {
  std::string metric = requested;
  if (metric.empty() || metric == "auto") {
    metric = has_quality(d, "alignscore") ? "alignscore" : "rougeL";
  }
  for (const auto& t : d.traces) resolve_quality(t, metric);
  return metric;
}

struct SynthArgs {
  std::string out, oracle_out, len = "16..64", scenario = "linear";
  int n = 100, layers = 2, heads = 4;
  std::uint64_t seed = 0;
  double noise_sd = 0.0;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  auto spec = synth::default_spec(synth::parse_scenario(a.scenario), a.layers, a.heads);
  spec.n_traces = a.n;
  spec.len_range = parse_len(a.len);
  spec.seed = a.seed;
  spec.noise_sd = a.noise_sd;
  const auto result = synth::generate(spec);
  const std::string oracle_path = a.oracle_out.empty() ? a.out + ".oracle" : a.oracle_out;
  write_traces(result.dataset, a.out);
  synth::write_oracle_tables(result.oracle, oracle_path);
  out << "wrote " << result.dataset.size() << " traces to " << a.out << " (oracle: "
      << oracle_path << ")\n";
  return 0;
}

struct TrainArgs {
  std::vector<std::string> traces, oracle;
  std::string strategy = "binary", features = "attn_probs";
  std::string grid = "10,1,0.1,0.01,0.001,0.0001";
  int folds = 5;
  std::string select_metric = "auto", agg = "mean", out, dump_examples;
  double eps = 1e-6, std_floor = 1e-8, conf_floor = kDefaultConfFloor;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto strategy = parse_target_strategy(a.strategy);
  const auto config = parse_feature_config(a.features);
  const auto agg = parse_aggregation(a.agg);
  const auto grid = parse_grid(a.grid);
  if (!(a.eps > 0.0)) throw ValidationError("--eps must be > 0");

  const TraceDataset data = load_all(a.traces);
  const std::string metric = resolve_metric(data, a.select_metric);

  std::vector<TrainingExample> examples;
  if (!a.oracle.empty()) {
    if (strategy == TargetStrategy::Direct) {
      throw ValidationError("--oracle targets are dependency targets; use binary or blended");
    }
    std::vector<synth::OracleTable> tables;
    for (const auto& p : a.oracle) {
      auto part = synth::read_oracle_tables(p);
      tables.insert(tables.end(), part.begin(), part.end());
    }
    examples = synth::oracle_training_set(data, tables, config);
  } else {
    examples = build_training_set(data, {strategy, config, a.eps});
  }
  if (examples.empty()) throw DegenerateError("no training examples after target construction");

  std::map<std::string, const GenerationTrace*> by_id;
  for (const auto& t : data.traces) by_id.emplace(t.id, &t);
  const FoldScorer scorer = [&](const TadModel& model, std::span<const std::string> ids) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(ids.size()));
    Eigen::VectorXd q(u.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const GenerationTrace& t = *by_id.at(ids[k]);
      u(static_cast<Eigen::Index>(k)) =
          uncertainty(aggregate(propagate(t, model, a.conf_floor), agg));
      q(static_cast<Eigen::Index>(k)) = resolve_quality(t, metric);
    }
    return prr(u, q).prr;
  };

  FitOptions fit;
  fit.std_floor = a.std_floor;
  fit.feature_config = config;
  fit.target_strategy = strategy;
  const CvReport cv = cross_validate(examples, grid, a.folds, scorer, fit);
  fit.lambda = cv.chosen_lambda;
  const TadModel model = fit_ridge(examples, fit);

  if (!a.dump_examples.empty()) {
    io::write_file_atomic(a.dump_examples, format_training_set(examples));
  }
  save_model(model, a.out, &cv);

  out << "examples: " << examples.size() << " from " << data.size() << " traces\n";
  out << "cv (" << cv.folds << " folds, PRR-" << metric << "):\n";
  for (std::size_t k = 0; k < cv.grid.size(); ++k) {
    out << "  lambda=" << io::format_double(cv.grid[k])
        << " mean_prr=" << io::format_double(cv.mean_score[k]) << '\n';
  }
  out << "chosen lambda: " << io::format_double(cv.chosen_lambda) << '\n';
  return 0;
}

struct ScoreArgs {
  std::string traces, model, agg = "mean", out;
  double conf_floor = kDefaultConfFloor;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const auto agg = parse_aggregation(a.agg);
  const TraceDataset data = read_traces(a.traces);
  const TadModel model = load_model(a.model);
  const auto rows = score_dataset(data, model, agg, a.conf_floor);
  io::write_file_atomic(a.out, format_score_table(rows));
  out << "scored " << rows.size() << " traces\n";
  return 0;
}

struct BaselineArgs {
  std::string traces, method, out;
};

int cmd_baseline(const BaselineArgs& a, std::ostream& out) {
  const auto method = parse_baseline(a.method);
  const TraceDataset data = read_traces(a.traces);
  const auto rows = score_baseline(data, method);
  io::write_file_atomic(a.out, format_score_table(rows));
  out << "scored " << rows.size() << " traces with " << baseline_name(method) << '\n';
  return 0;
}

struct EvalArgs {
  std::string traces, metric = "auto", out, curves;
  std::vector<std::string> scores;
};

std::string curves_path(const std::string& base, const std::string& method, bool single) {
  if (single) return base;
  const std::filesystem::path p(base);
  return (p.parent_path() / (p.stem().string() + "." + method + p.extension().string()))
      .string();
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const TraceDataset data = read_traces(a.traces);
  const std::string metric = resolve_metric(data, a.metric);
  ScoreTables tables;
  std::vector<std::string> files;
  for (const auto& s : a.scores) {
    for (auto& f : split_list(s)) files.push_back(std::move(f));
  }
  if (files.empty()) throw ValidationError("--scores: no score files given");
  for (const auto& f : files) {
    const std::string method = std::filesystem::path(f).stem().string();
    if (tables.count(method)) {
      throw ValidationError("--scores: two score files map to method '" + method + "'");
    }
    tables.emplace(method, to_score_map(read_score_table(f), method));
  }
  const auto results = evaluate_methods(data, tables, metric);
  const std::string report = format_report(results);
  if (!a.curves.empty()) {
    for (const auto& r : results) {
      io::write_file_atomic(curves_path(a.curves, r.method, results.size() == 1),
                            format_curves(r.report));
    }
  }
  io::write_file_atomic(a.out, report);
  out << report;
  return 0;
}

int dispatch(CLI::App& app, int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate synthetic traces with exact oracles");
  synth->add_option("--out", synth_args.out, "trace file")->required();
  synth->add_option("--oracle-out", synth_args.oracle_out, "oracle sidecar (default <out>.oracle)");
  synth->add_option("--n", synth_args.n, "number of traces");
  synth->add_option("--len", synth_args.len, "length range A..B");
  synth->add_option("--layers", synth_args.layers);
  synth->add_option("--heads", synth_args.heads);
  synth->add_option("--seed", synth_args.seed);
  synth->add_option("--scenario", synth_args.scenario)
      ->check(CLI::IsMember({"linear", "fig1", "misspec"}));
  synth->add_option("--noise-sd", synth_args.noise_sd, "target observation noise");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit the dependency model with cross-validation");
  train->add_option("--traces", train_args.traces, "trace file(s), concatenated")->required();
  train->add_option("--oracle", train_args.oracle, "synthetic oracle sidecar(s)");
  train->add_option("--strategy", train_args.strategy)
      ->check(CLI::IsMember({"binary", "blended", "direct"}));
  train->add_option("--features", train_args.features)
      ->check(CLI::IsMember({"attn_probs", "attn_only", "probs_only"}));
  train->add_option("--grid", train_args.grid, "comma-separated L2 strengths");
  train->add_option("--folds", train_args.folds);
  train->add_option("--select-metric", train_args.select_metric);
  train->add_option("--agg", train_args.agg, "aggregation used for CV scoring")
      ->check(CLI::IsMember({"mean", "sumlog"}));
  train->add_option("--eps", train_args.eps);
  train->add_option("--std-floor", train_args.std_floor);
  train->add_option("--conf-floor", train_args.conf_floor);
  train->add_option("--dump-examples", train_args.dump_examples, "write training examples");
  train->add_option("--out", train_args.out, "model file")->required();

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "score traces with a trained model");
  score->add_option("--traces", score_args.traces)->required();
  score->add_option("--model", score_args.model)->required();
  score->add_option("--agg", score_args.agg)->check(CLI::IsMember({"mean", "sumlog"}));
  score->add_option("--conf-floor", score_args.conf_floor);
  score->add_option("--out", score_args.out)->required();

  BaselineArgs base_args;
  auto* baseline = app.add_subcommand("baseline", "score traces with a baseline method");
  baseline->add_option("--traces", base_args.traces)->required();
  baseline->add_option("--method", base_args.method)
      ->required()
      ->check(CLI::IsMember({"msp", "ppl", "entropy"}));
  baseline->add_option("--out", base_args.out)->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "prediction rejection ratio of score tables");
  eval->add_option("--traces", eval_args.traces)->required();
  eval->add_option("--scores", eval_args.scores, "score file(s), comma-separated")->required();
  eval->add_option("--metric", eval_args.metric);
  eval->add_option("--out", eval_args.out)->required();
  eval->add_option("--curves", eval_args.curves);

  std::string diag_traces;
  auto* diag = app.add_subcommand("diag", "diagnostics");
  auto* attn_frac = diag->add_subcommand("attn-frac", "share of steps attending most to the previous token");
  attn_frac->add_option("--traces", diag_traces)->required();
  diag->require_subcommand(1);

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  if (synth->parsed()) return cmd_synth(synth_args, out);
  if (train->parsed()) return cmd_train(train_args, out);
  if (score->parsed()) return cmd_score(score_args, out);
  if (baseline->parsed()) return cmd_baseline(base_args, out);
  if (eval->parsed()) return cmd_eval(eval_args, out);
  if (attn_frac->parsed()) {
    out << io::format_double(prev_token_attention_fraction(read_traces(diag_traces))) << '\n';
    return 0;
  }
  return 2;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"tad"};
  for (const auto& a : args) argv.push_back(a.c_str());
  CLI::App app{"Attention-based dependency uncertainty scoring for generation traces"};
  app.name("tad");
  try {
    return dispatch(app, static_cast<int>(argv.size()), argv.data(), out, err);
  } catch (const IoError& e) {
    err << "error [io]: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    err << "error [parse]: " << e.what() << '\n';
    return 4;
  } catch (const ValidationError& e) {
    err << "error [validation]: " << e.what() << '\n';
    return 5;
  } catch (const DegenerateError& e) {
    err << "error [degenerate]: " << e.what() << '\n';
    return 6;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tad::cli
