#include "tad/targets.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"
#include "tad/errors.hpp"
#include "tad/quality.hpp"

namespace tad {

std::string to_string(TargetStrategy s) {
  switch (s) {
    case TargetStrategy::Binary: return "binary";
    case TargetStrategy::Blended: return "blended";
    case TargetStrategy::Direct: return "direct";
  }
  return "binary";
}

std::string to_string(FeatureConfig f) {
  switch (f) {
    case FeatureConfig::AttnProbs: return "attn_probs";
    case FeatureConfig::AttnOnly: return "attn_only";
    case FeatureConfig::ProbsOnly: return "probs_only";
  }
  return "attn_probs";
}

TargetStrategy parse_target_strategy(std::string_view name) {
  if (name == "binary") return TargetStrategy::Binary;
  if (name == "blended") return TargetStrategy::Blended;
  if (name == "direct") return TargetStrategy::Direct;
  throw ValidationError("unknown target strategy '" + std::string(name) + "'");
}

FeatureConfig parse_feature_config(std::string_view name) {
  if (name == "attn_probs") return FeatureConfig::AttnProbs;
  if (name == "attn_only") return FeatureConfig::AttnOnly;
  if (name == "probs_only") return FeatureConfig::ProbsOnly;
  throw ValidationError("unknown feature config '" + std::string(name) + "'");
}

Eigen::Index feature_dimension(FeatureConfig config, std::size_t attention_width) {
  const auto w = static_cast<Eigen::Index>(attention_width);
  switch (config) {
    case FeatureConfig::AttnProbs: return w + 2;
    case FeatureConfig::AttnOnly: return w;
    case FeatureConfig::ProbsOnly: return 3;
  }
  return w + 2;
}

std::string normalize_token(std::string_view token) {
  static constexpr std::string_view kMarkers[] = {"\xE2\x96\x81", "\xC4\xA0", "##"};
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  bool changed = true;
  while (changed) {
    changed = false;
    while (!token.empty() && is_space(token.front())) {
      token.remove_prefix(1);
      changed = true;
    }
    while (!token.empty() && is_space(token.back())) {
      token.remove_suffix(1);
      changed = true;
    }
    for (auto m : kMarkers) {
      if (token.starts_with(m)) {
        token.remove_prefix(m.size());
        changed = true;
      }
    }
  }
  return casefold(token);
}

bool token_in_reference(std::string_view token, std::string_view reference) {
  const std::string t = normalize_token(token);
  if (t.empty()) return false;
  return casefold(reference).find(t) != std::string::npos;
}

double surrogate_binary(std::string_view token, std::string_view reference) {
  return token_in_reference(token, reference) ? 1.0 : 0.0;
}

double surrogate_blended(std::string_view token, std::string_view reference, double sim) {
  if (!(sim >= 0.0 && sim <= 1.0)) {
    throw ValidationError("similarity " + std::to_string(sim) + " outside [0, 1]");
  }
  return token_in_reference(token, reference) ? (1.0 + sim) / 2.0 : sim;
}

Eigen::VectorXd features(const StepRecord& step, const StepRecord& prev, double prev_conf,
                         FeatureConfig config) {
  if (step.attn_prev.size() != prev.attn_prev.size()) {
    throw ValidationError("feature extraction: attention shape mismatch between steps (" +
                          std::to_string(step.attn_prev.size()) + " vs " +
                          std::to_string(prev.attn_prev.size()) + ")");
  }
  const auto w = static_cast<Eigen::Index>(step.attn_prev.size());
  const Eigen::Map<const Eigen::VectorXd> attn(step.attn_prev.data(), w);
  Eigen::VectorXd x(feature_dimension(config, step.attn_prev.size()));
  switch (config) {
    case FeatureConfig::AttnProbs:
      x << attn, prev_conf, step.cond_prob;
      break;
    case FeatureConfig::AttnOnly:
      x = attn;
      break;
    case FeatureConfig::ProbsOnly:
      x << step.cond_prob, prev.cond_prob, prev_conf;
      break;
  }
  return x;
}

std::vector<double> surrogates(const GenerationTrace& trace, TargetStrategy strategy) {
  if (trace.reference.empty()) {
    throw ValidationError("trace '" + trace.id + "': missing reference text for targets");
  }
  double sim = 0.0;
  if (strategy == TargetStrategy::Blended) {
    std::optional<double> external;
    if (auto it = trace.quality.find("alignscore"); it != trace.quality.end()) {
      external = it->second;
    }
    sim = similarity(trace.generated, trace.reference, external);
  }
  std::vector<double> p;
  p.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    p.push_back(strategy == TargetStrategy::Blended
                    ? surrogate_blended(s.token, trace.reference, sim)
                    : surrogate_binary(s.token, trace.reference));
  }
  return p;
}

std::vector<TrainingExample> build_training_set(const TraceDataset& dataset,
                                                const TargetOptions& options) {
  std::vector<TrainingExample> out;
  for (const auto& trace : dataset.traces) {
    const auto p = surrogates(trace, options.strategy);
    for (std::size_t i = 1; i < trace.steps.size(); ++i) {
      const double p_prev = p[i - 1];
      double target;
      if (options.strategy == TargetStrategy::Direct) {
        target = p[i];
      } else {
        if (1.0 - p_prev < options.eps) continue;
        target = g_target(p[i], trace.steps[i].cond_prob, p_prev, options.eps);
      }
      out.push_back({features(trace.steps[i], trace.steps[i - 1], p_prev, options.features),
                     target, trace.id, static_cast<int>(i + 1)});
    }
  }
  return out;
}

std::string format_training_set(std::span<const TrainingExample> examples) {
  std::string out;
  for (const auto& e : examples) {
    nlohmann::json j = {{"trace_id", e.trace_id},
                        {"position", e.position},
                        {"features", std::vector<double>(e.features.begin(), e.features.end())},
                        {"target", e.target}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace tad
