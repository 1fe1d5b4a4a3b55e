#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tad/errors.hpp"
#include "tad/regressor.hpp"
#include "tad/trace.hpp"

namespace tad {

struct ConfidenceSeries {
  std::string trace_id;
  Eigen::VectorXd conf;  // one per token, within [conf_floor, 1]
};

enum class Aggregation { Mean, SumLog };

std::string to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view name);

inline constexpr double kDefaultConfFloor = 1e-6;

// Confidence recurrence over one chain:
//   conf_0 = clamp(cond_0)
//   conf_i = clamp(cond_i * conf_{i-1} + g_i * (1 - conf_{i-1}))
// where g_i = dependency(i, conf_{i-1}) and clamp maps into [floor, 1].
template <typename Scalar, typename Dependency>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> forward_confidence(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& cond,
    Dependency&& dependency, Scalar floor) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> conf(cond.size());
  if (cond.size() == 0) return conf;
  conf(0) = std::clamp(cond(0), floor, Scalar(1));
  for (Eigen::Index i = 1; i < cond.size(); ++i) {
    const Scalar prev = conf(i - 1);
    const Scalar g = dependency(i, prev);
    conf(i) = std::clamp(cond(i) * prev + g * (Scalar(1) - prev), floor, Scalar(1));
  }
  return conf;
}

Eigen::VectorXd conditional_probs(const GenerationTrace& trace);

// Runs the recurrence with a caller-supplied dependency g(i, prev_conf),
// i being the zero-based step index (>= 1).
template <typename Dependency>
ConfidenceSeries propagate_with(const GenerationTrace& trace, Dependency&& dependency,
                                double conf_floor = kDefaultConfFloor) {
  const Eigen::VectorXd cond = conditional_probs(trace);
  return {trace.id, forward_confidence<double>(cond, std::forward<Dependency>(dependency),
                                               conf_floor)};
}

// Runs the recurrence with G predicted by `model` from features of each step;
// the propagated confidence feeds the next step's features. Models trained
// on direct targets predict the confidence itself instead.
ConfidenceSeries propagate(const GenerationTrace& trace, const TadModel& model,
                           double conf_floor = kDefaultConfFloor);

double aggregate(const ConfidenceSeries& series, Aggregation agg);

// Higher uncertainty is rejected first. Written as 0 - score to avoid -0.
inline double uncertainty(double score) { return 0.0 - score; }

struct ScoreRow {
  std::string id;
  double uncertainty = 0.0;
  double confidence_agg = 0.0;
  std::size_t n_tokens = 0;
};

std::vector<ScoreRow> score_dataset(const TraceDataset& dataset, const TadModel& model,
                                    Aggregation agg, double conf_floor = kDefaultConfFloor);

// CSV with header "id,uncertainty,confidence_agg,n_tokens".
std::string format_score_table(std::span<const ScoreRow> rows);
std::vector<ScoreRow> parse_score_table(const std::string& text, const std::string& origin);
std::vector<ScoreRow> read_score_table(const std::string& path);

}  // namespace tad
