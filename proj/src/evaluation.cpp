#include "tad/evaluation.hpp"

#include "tad/errors.hpp"
#include "tad/io.hpp"
#include "tad/quality.hpp"

namespace tad {

ScoreTables::mapped_type to_score_map(const std::vector<ScoreRow>& rows,
                                      const std::string& method) {
  ScoreTables::mapped_type out;
  for (const auto& r : rows) {
    if (!out.emplace(r.id, r.uncertainty).second) {
      throw ValidationError("method '" + method + "': duplicate score for trace '" + r.id + "'");
    }
  }
  return out;
}

std::vector<MethodResult> evaluate_methods(const TraceDataset& dataset, const ScoreTables& scores,
                                           const std::string& quality_metric) {
  const auto n = static_cast<Eigen::Index>(dataset.size());
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q(i) = resolve_quality(dataset.traces[static_cast<std::size_t>(i)], quality_metric);
  }
  std::vector<MethodResult> results;
  for (const auto& [method, table] : scores) {
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& id = dataset.traces[static_cast<std::size_t>(i)].id;
      auto it = table.find(id);
      if (it == table.end()) {
        throw ValidationError("method '" + method + "': no score for trace '" + id + "'");
      }
      u(i) = it->second;
    }
    results.push_back({method, quality_metric, prr(u, q)});
  }
  return results;
}

std::string format_report(const std::vector<MethodResult>& results) {
  std::string out = "method,quality_metric,prr,auc_unc,auc_oracle,auc_random,n\n";
  for (const auto& r : results) {
    out += r.method + ',' + r.quality_metric + ',' + io::format_double(r.report.prr) + ',' +
           io::format_double(r.report.auc_unc) + ',' + io::format_double(r.report.auc_oracle) +
           ',' + io::format_double(r.report.auc_random) + ',' + std::to_string(r.report.n) +
           '\n';
  }
  return out;
}

std::string format_curves(const PrrReport& report) {
  std::string out = "k,retained_mean_unc,retained_mean_oracle\n";
  for (Eigen::Index k = 0; k < report.n; ++k) {
    out += std::to_string(k) + ',' + io::format_double(report.curve_unc(k)) + ',' +
           io::format_double(report.curve_oracle(k)) + '\n';
  }
  return out;
}

double prev_token_attention_fraction(const TraceDataset& dataset) {
  std::size_t total = 0, hits = 0;
  for (const auto& t : dataset.traces) {
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const auto& flag = t.steps[i].prev_is_argmax;
      if (!flag) {
        throw DegenerateError("attention diagnostic unavailable: trace '" + t.id + "' step " +
                              std::to_string(i) + " has no prev_is_argmax flag");
      }
      ++total;
      hits += *flag ? 1 : 0;
    }
  }
  if (total == 0) throw DegenerateError("attention diagnostic unavailable: no steps");
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace tad
