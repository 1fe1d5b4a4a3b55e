#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tad/trace.hpp"

namespace tad {

enum class TargetStrategy { Binary, Blended, Direct };
enum class FeatureConfig { AttnProbs, AttnOnly, ProbsOnly };

std::string to_string(TargetStrategy s);
std::string to_string(FeatureConfig f);
TargetStrategy parse_target_strategy(std::string_view name);
FeatureConfig parse_feature_config(std::string_view name);

// attn_probs -> L*H + 2, attn_only -> L*H, probs_only -> 3.
Eigen::Index feature_dimension(FeatureConfig config, std::size_t attention_width);

struct TrainingExample {
  Eigen::VectorXd features;
  double target = 0.0;
  std::string trace_id;
  int position = 2;  // 1-based token index, >= 2
};

// Case-folded token with surrounding whitespace and tokenizer word-start
// markers ("▁", "Ġ", "##") removed.
std::string normalize_token(std::string_view token);

// Token membership in the reference: substring test on normalized text.
bool token_in_reference(std::string_view token, std::string_view reference);

double surrogate_binary(std::string_view token, std::string_view reference);
double surrogate_blended(std::string_view token, std::string_view reference, double sim);

// Conditional probability of a correct token after an incorrect one,
// recovered from the law of total probability. Not clipped.
inline double g_target(double p_i, double cond_i, double p_prev, double eps) {
  const double denom = std::max(1.0 - p_prev, eps);
  return (p_i - cond_i * p_prev) / denom;
}

// Feature vector for step i given its predecessor. Ordering:
//   attn_probs: [attn_prev(i)..., prev_conf, cond(i)]
//   attn_only:  [attn_prev(i)...]
//   probs_only: [cond(i), cond(i-1), prev_conf]
Eigen::VectorXd features(const StepRecord& step, const StepRecord& prev, double prev_conf,
                         FeatureConfig config);

struct TargetOptions {
  TargetStrategy strategy = TargetStrategy::Binary;
  FeatureConfig features = FeatureConfig::AttnProbs;
  double eps = 1e-6;
};

// Per-token surrogate chain for one trace under `strategy`.
std::vector<double> surrogates(const GenerationTrace& trace, TargetStrategy strategy);

// Training examples for every trace in order. Positions whose previous
// surrogate leaves 1 - p_prev < eps are skipped for binary/blended targets.
std::vector<TrainingExample> build_training_set(const TraceDataset& dataset,
                                                const TargetOptions& options);

// One line per example: {"trace_id", "position", "features", "target"}.
std::string format_training_set(std::span<const TrainingExample> examples);

}  // namespace tad
