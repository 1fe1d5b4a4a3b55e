#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tad/targets.hpp"
#include "tad/trace.hpp"

namespace tad::synth {

// How the true dependency g is produced from the step features.
//   Linear:  g = clip(w . x + b)
//   Fig1:    Linear, but the first `early_steps` tokens draw cond from the
//            wide range and later tokens from `late_cond_range`, so an early
//            miss keeps the chain false while the LM stays confident.
//   Misspec: g = lo + (hi - lo) * sigmoid(steepness * (w . x + b - 1/2))
enum class Scenario { Linear, Fig1, Misspec };

Scenario parse_scenario(std::string_view name);
std::string to_string(Scenario s);

struct SynthSpec {
  int n_traces = 100;
  std::pair<int, int> len_range{16, 64};
  int layers = 2;
  int heads = 4;
  std::uint64_t seed = 0;
  Scenario scenario = Scenario::Linear;
  Eigen::VectorXd true_weights;  // length layers*heads + 2, over [attn, p_prev, cond]
  double true_bias = 0.0;
  std::pair<double, double> cond_range{0.05, 0.95};
  std::pair<double, double> late_cond_range{0.95, 0.999};  // Fig1 only
  int early_steps = 2;                                        // Fig1 only
  std::pair<double, double> g_range{0.05, 0.95};
  double misspec_steepness = 6.0;
  double noise_sd = 0.0;
  std::string id_prefix = "syn";
};

// SynthSpec with the scenario's built-in weights for the given shape.
SynthSpec default_spec(Scenario scenario, int layers, int heads);

void validate(const SynthSpec& spec);

// Exact per-step quantities of one synthetic chain. g[0] is unused (0).
struct OracleTable {
  std::string id;
  std::vector<double> g;
  std::vector<double> p;
  std::vector<double> noise;  // empty when noise_sd is 0
};

struct SynthResult {
  TraceDataset dataset;
  std::vector<OracleTable> oracle;
};

// Deterministic in spec.seed; trace k draws from its own (seed, k) stream.
SynthResult generate(const SynthSpec& spec);

// True g for a feature vector [attn, p_prev, cond].
double true_g(const SynthSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);

// Targets from exact marginals (plus any recorded noise), at positions with
// 1 - p_prev >= min_gap.
std::vector<TrainingExample> oracle_training_set(const TraceDataset& dataset,
                                                 const std::vector<OracleTable>& oracle,
                                                 FeatureConfig config, double min_gap = 1e-9);

// Sidecar format: one {"id", "g", "p"[, "noise"]} record per line.
void write_oracle_tables(const std::vector<OracleTable>& tables, const std::string& path);
std::vector<OracleTable> read_oracle_tables(const std::string& path);

}  // namespace tad::synth
