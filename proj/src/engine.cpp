#include "tad/engine.hpp"

#include <charconv>
#include <sstream>

#include "tad/io.hpp"
#include "tad/targets.hpp"

namespace tad {

std::string to_string(Aggregation a) { return a == Aggregation::Mean ? "mean" : "sumlog"; }

Aggregation parse_aggregation(std::string_view name) {
  if (name == "mean") return Aggregation::Mean;
  if (name == "sumlog") return Aggregation::SumLog;
  throw ValidationError("unknown aggregation '" + std::string(name) + "'");
}

Eigen::VectorXd conditional_probs(const GenerationTrace& trace) {
  Eigen::VectorXd cond(static_cast<Eigen::Index>(trace.steps.size()));
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    cond(static_cast<Eigen::Index>(i)) = trace.steps[i].cond_prob;
  }
  return cond;
}

ConfidenceSeries propagate(const GenerationTrace& trace, const TadModel& model,
                           double conf_floor) {
  const auto expected = feature_dimension(model.feature_config, trace.attention_width());
  if (expected != model.dimension()) {
    throw ValidationError("trace '" + trace.id + "': model expects " +
                          std::to_string(model.dimension()) + " features, trace shape gives " +
                          std::to_string(expected));
  }
  const auto& steps = trace.steps;
  if (model.target_strategy == TargetStrategy::Direct) {
    // conf_i is predicted directly; only the first step comes from the LM.
    ConfidenceSeries s{trace.id, Eigen::VectorXd(static_cast<Eigen::Index>(steps.size()))};
    s.conf(0) = std::clamp(steps[0].cond_prob, conf_floor, 1.0);
    for (std::size_t i = 1; i < steps.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const double p = predict_g(
          model, features(steps[i], steps[i - 1], s.conf(k - 1), model.feature_config));
      s.conf(k) = std::clamp(p, conf_floor, 1.0);
    }
    return s;
  }
  return propagate_with(
      trace,
      [&](Eigen::Index i, double prev_conf) {
        const auto k = static_cast<std::size_t>(i);
        return predict_g(model,
                         features(steps[k], steps[k - 1], prev_conf, model.feature_config));
      },
      conf_floor);
}

double aggregate(const ConfidenceSeries& series, Aggregation agg) {
  if (series.conf.size() == 0) {
    throw ValidationError("aggregate: empty confidence series for '" + series.trace_id + "'");
  }
  if (agg == Aggregation::Mean) return series.conf.mean();
  if (!(series.conf.array() > 0.0).all()) {
    throw ValidationError("aggregate: non-positive confidence in '" + series.trace_id + "'");
  }
  return series.conf.array().log().sum();
}

std::vector<ScoreRow> score_dataset(const TraceDataset& dataset, const TadModel& model,
                                    Aggregation agg, double conf_floor) {
  std::vector<ScoreRow> rows;
  rows.reserve(dataset.size());
  for (const auto& t : dataset.traces) {
    const double score = aggregate(propagate(t, model, conf_floor), agg);
    rows.push_back({t.id, uncertainty(score), score, t.steps.size()});
  }
  return rows;
}

std::string format_score_table(std::span<const ScoreRow> rows) {
  std::string out = "id,uncertainty,confidence_agg,n_tokens\n";
  for (const auto& r : rows) {
    if (r.id.find_first_of(",\n\r\"") != std::string::npos) {
      throw ValidationError("trace id '" + r.id + "' cannot be written to a score table");
    }
    out += r.id;
    out += ',';
    out += io::format_double(r.uncertainty);
    out += ',';
    out += io::format_double(r.confidence_agg);
    out += ',';
    out += std::to_string(r.n_tokens);
    out += '\n';
  }
  return out;
}

namespace {

double parse_number(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(where + ": invalid number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<ScoreRow> parse_score_table(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::vector<ScoreRow> rows;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = origin + ":" + std::to_string(n);
    if (n == 1) {
      if (line != "id,uncertainty,confidence_agg,n_tokens") {
        throw ParseError(where + ": unexpected score table header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cols.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols.size() != 4) throw ParseError(where + ": expected 4 columns");
    ScoreRow r;
    r.id = std::string(cols[0]);
    r.uncertainty = parse_number(cols[1], where);
    r.confidence_agg = parse_number(cols[2], where);
    r.n_tokens = static_cast<std::size_t>(parse_number(cols[3], where));
    rows.push_back(std::move(r));
  }
  if (n == 0) throw ParseError(origin + ": empty score table");
  return rows;
}

std::vector<ScoreRow> read_score_table(const std::string& path) {
  std::string text;
  for (const auto& l : io::read_lines(path)) {
    text += l;
    text += '\n';
  }
  return parse_score_table(text, path);
}

}  // namespace tad
