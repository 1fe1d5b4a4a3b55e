#include "tad/baselines.hpp"

#include <cmath>

#include "tad/errors.hpp"

namespace tad {

double msp(const GenerationTrace& trace) {
  double s = 0.0;
  for (const auto& step : trace.steps) s -= std::log(step.cond_prob);
  return s;
}

double perplexity(const GenerationTrace& trace) {
  if (trace.steps.empty()) return 0.0;
  return msp(trace) / static_cast<double>(trace.steps.size());
}

double mean_token_entropy(const GenerationTrace& trace) {
  if (trace.steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& step : trace.steps) s += step.entropy;
  return s / static_cast<double>(trace.steps.size());
}

BaselineMethod parse_baseline(std::string_view name) {
  if (name == "msp") return BaselineMethod::Msp;
  if (name == "ppl") return BaselineMethod::Perplexity;
  if (name == "entropy") return BaselineMethod::Entropy;
  throw ValidationError("unknown baseline method '" + std::string(name) + "'");
}

std::string_view baseline_name(BaselineMethod method) {
  switch (method) {
    case BaselineMethod::Msp: return "msp";
    case BaselineMethod::Perplexity: return "ppl";
    case BaselineMethod::Entropy: return "entropy";
  }
  return "msp";
}

std::vector<ScoreRow> score_baseline(const TraceDataset& dataset, BaselineMethod method) {
  std::vector<ScoreRow> rows;
  rows.reserve(dataset.size());
  for (const auto& t : dataset.traces) {
    double u = 0.0;
    switch (method) {
      case BaselineMethod::Msp: u = msp(t); break;
      case BaselineMethod::Perplexity: u = perplexity(t); break;
      case BaselineMethod::Entropy: u = mean_token_entropy(t); break;
    }
    rows.push_back({t.id, u, 0.0 - u, t.steps.size()});
  }
  return rows;
}

}  // namespace tad
