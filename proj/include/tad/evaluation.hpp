#pragma once

#include <map>
#include <string>
#include <vector>

#include "tad/engine.hpp"
#include "tad/prr.hpp"
#include "tad/trace.hpp"

namespace tad {

struct MethodResult {
  std::string method;
  std::string quality_metric;
  PrrReport report;
};

// method -> (trace id -> uncertainty)
using ScoreTables = std::map<std::string, std::map<std::string, double>>;

ScoreTables::mapped_type to_score_map(const std::vector<ScoreRow>& rows,
                                      const std::string& method);

// One PRR per method, rows in method-name order. Uncertainties are aligned to
// the dataset's trace order, so the result does not depend on score-table
// row order.
std::vector<MethodResult> evaluate_methods(const TraceDataset& dataset, const ScoreTables& scores,
                                           const std::string& quality_metric);

// "method,quality_metric,prr,auc_unc,auc_oracle,auc_random,n"
std::string format_report(const std::vector<MethodResult>& results);

// "k,retained_mean_unc,retained_mean_oracle"
std::string format_curves(const PrrReport& report);

// Mean of per-step prev_is_argmax flags over the dataset. Throws
// DegenerateError when any step lacks the flag.
double prev_token_attention_fraction(const TraceDataset& dataset);

}  // namespace tad
