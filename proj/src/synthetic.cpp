#include "tad/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "json.hpp"
#include "tad/errors.hpp"
#include "tad/io.hpp"

namespace tad::synth {

using nlohmann::json;

Scenario parse_scenario(std::string_view name) {
  if (name == "linear") return Scenario::Linear;
  if (name == "fig1") return Scenario::Fig1;
  if (name == "misspec") return Scenario::Misspec;
  throw ValidationError("unknown scenario '" + std::string(name) + "'");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Linear: return "linear";
    case Scenario::Fig1: return "fig1";
    case Scenario::Misspec: return "misspec";
  }
  return "linear";
}

SynthSpec default_spec(Scenario scenario, int layers, int heads) {
  SynthSpec spec;
  spec.scenario = scenario;
  spec.layers = layers;
  spec.heads = heads;
  const int width = std::max(layers, 0) * std::max(heads, 0);
  spec.true_weights = Eigen::VectorXd::Zero(width + 2);
  const double scale = width > 0 ? 1.0 / std::sqrt(static_cast<double>(width)) : 0.0;
  // Alternating signs keep the attention contribution centred near zero.
  double attn_amp = 0.6, w_prev = 0.2, w_cond = 0.25;
  spec.true_bias = 0.225;
  if (scenario == Scenario::Fig1) {
    attn_amp = 0.2;
    w_prev = 0.0;
    w_cond = 0.05;
    spec.true_bias = 0.03;
  }
  for (int j = 0; j < width; ++j) {
    spec.true_weights(j) = (j % 2 == 0 ? attn_amp : -attn_amp) * scale;
  }
  spec.true_weights(width) = w_prev;
  spec.true_weights(width + 1) = w_cond;
  return spec;
}

namespace {

bool valid_range(std::pair<double, double> r, double lo, double hi) {
  return r.first >= lo && r.second <= hi && r.first <= r.second;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string token_name(int position, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "w%0*d", width, position);
  return buf;
}

// Two-outcome entropy (nats) of the step's top probability.
double binary_entropy(double c) {
  double h = 0.0;
  if (c > 0.0) h -= c * std::log(c);
  if (c < 1.0) h -= (1.0 - c) * std::log(1.0 - c);
  return std::max(h, 0.0);
}

}  // namespace

void validate(const SynthSpec& s) {
  if (s.n_traces < 0) throw ValidationError("synth: n_traces must be >= 0");
  if (s.len_range.first < 1 || s.len_range.second < s.len_range.first) {
    throw ValidationError("synth: length range must satisfy 1 <= min <= max");
  }
  if (s.len_range.second > 99999) throw ValidationError("synth: traces longer than 99999 tokens");
  if (s.layers < 1 || s.heads < 1) throw ValidationError("synth: layers and heads must be >= 1");
  if (s.true_weights.size() != static_cast<Eigen::Index>(s.layers) * s.heads + 2) {
    throw ValidationError("synth: true_weights length must equal layers*heads + 2");
  }
  if (!valid_range(s.cond_range, 0.0, 1.0) || s.cond_range.first <= 0.0) {
    throw ValidationError("synth: cond_range must lie within (0, 1]");
  }
  if (s.scenario == Scenario::Fig1 &&
      (!valid_range(s.late_cond_range, 0.0, 1.0) || s.late_cond_range.first <= 0.0)) {
    throw ValidationError("synth: late_cond_range must lie within (0, 1]");
  }
  if (!valid_range(s.g_range, 0.0, 1.0)) {
    throw ValidationError("synth: g_range must lie within [0, 1]");
  }
  if (!(s.noise_sd >= 0.0)) throw ValidationError("synth: noise_sd must be >= 0");
  if (!s.true_weights.allFinite() || !std::isfinite(s.true_bias)) {
    throw ValidationError("synth: non-finite true weights");
  }
}

double true_g(const SynthSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double lin = spec.true_weights.dot(x) + spec.true_bias;
  const auto [lo, hi] = spec.g_range;
  if (spec.scenario == Scenario::Misspec) {
    return lo + (hi - lo) * sigmoid(spec.misspec_steepness * (lin - 0.5));
  }
  return std::clamp(lin, lo, hi);
}

SynthResult generate(const SynthSpec& spec) {
  validate(spec);
  SynthResult out;
  out.dataset.provenance.push_back("synthetic:" + to_string(spec.scenario) +
                                   ":seed=" + std::to_string(spec.seed));
  const int width = spec.layers * spec.heads;
  const int digits = static_cast<int>(std::to_string(spec.len_range.second).size());
  const auto seed_lo = static_cast<std::uint32_t>(spec.seed & 0xffffffffu);
  const auto seed_hi = static_cast<std::uint32_t>(spec.seed >> 32);

  for (int k = 0; k < spec.n_traces; ++k) {
    std::seed_seq seq{seed_lo, seed_hi, static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](std::pair<double, double> r) {
      return r.first + (r.second - r.first) * unit(rng);
    };
    std::uniform_int_distribution<int> len_dist(spec.len_range.first, spec.len_range.second);
    std::normal_distribution<double> noise(0.0, spec.noise_sd > 0.0 ? spec.noise_sd : 1.0);

    const int n = len_dist(rng);
    GenerationTrace t;
    char id[32];
    std::snprintf(id, sizeof(id), "%s-%06d", spec.id_prefix.c_str(), k);
    t.id = id;
    t.prompt = "synthetic prompt " + std::to_string(k);
    t.layers = spec.layers;
    t.heads = spec.heads;
    OracleTable table{t.id, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), {}};
    if (spec.noise_sd > 0.0) table.noise.assign(n, 0.0);

    std::string reference = "ref";
    bool state = false;
    Eigen::VectorXd x(width + 2);
    for (int i = 0; i < n; ++i) {
      StepRecord s;
      s.attn_prev.resize(width);
      for (auto& a : s.attn_prev) a = unit(rng);
      const bool late = spec.scenario == Scenario::Fig1 && i >= spec.early_steps;
      s.cond_prob = uniform(late ? spec.late_cond_range : spec.cond_range);
      s.entropy = binary_entropy(s.cond_prob);
      s.token = (i == 0 ? "" : " ") + token_name(i + 1, digits);
      s.prev_is_argmax = unit(rng) < 0.75;

      double g_true = 0.0;
      if (i == 0) {
        table.p[0] = s.cond_prob;
        state = unit(rng) < s.cond_prob;
      } else {
        const double p_prev = table.p[i - 1];
        for (int j = 0; j < width; ++j) x(j) = s.attn_prev[j];
        x(width) = p_prev;
        x(width + 1) = s.cond_prob;
        g_true = true_g(spec, x);
        table.g[i] = g_true;
        table.p[i] = s.cond_prob * p_prev + g_true * (1.0 - p_prev);
        state = unit(rng) < (state ? s.cond_prob : g_true);
      }
      if (!table.noise.empty() && i > 0) table.noise[i] = noise(rng);
      if (state) reference += " " + token_name(i + 1, digits);
      t.generated += s.token;
      t.steps.push_back(std::move(s));
    }
    t.reference = reference;
    double mean_p = 0.0;
    for (double p : table.p) mean_p += p;
    t.quality["marginal"] = mean_p / n;
    out.dataset.traces.push_back(std::move(t));
    out.oracle.push_back(std::move(table));
  }
  return out;
}

std::vector<TrainingExample> oracle_training_set(const TraceDataset& dataset,
                                                 const std::vector<OracleTable>& oracle,
                                                 FeatureConfig config, double min_gap) {
  std::map<std::string, const OracleTable*> by_id;
  for (const auto& o : oracle) by_id.emplace(o.id, &o);
  std::vector<TrainingExample> out;
  for (const auto& t : dataset.traces) {
    auto it = by_id.find(t.id);
    if (it == by_id.end()) {
      throw ValidationError("trace '" + t.id + "': no oracle table");
    }
    const OracleTable& o = *it->second;
    if (o.p.size() != t.steps.size() || o.g.size() != t.steps.size()) {
      throw ValidationError("trace '" + t.id + "': oracle table length mismatch");
    }
    for (std::size_t i = 1; i < t.steps.size(); ++i) {
      const double p_prev = o.p[i - 1];
      if (1.0 - p_prev < min_gap) continue;
      double target = g_target(o.p[i], t.steps[i].cond_prob, p_prev, min_gap);
      if (!o.noise.empty()) target += o.noise[i];
      out.push_back({features(t.steps[i], t.steps[i - 1], p_prev, config), target, t.id,
                     static_cast<int>(i + 1)});
    }
  }
  return out;
}

void write_oracle_tables(const std::vector<OracleTable>& tables, const std::string& path) {
  std::string out;
  for (const auto& o : tables) {
    json j = {{"id", o.id}, {"g", o.g}, {"p", o.p}};
    if (!o.noise.empty()) j["noise"] = o.noise;
    out += j.dump();
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

std::vector<OracleTable> read_oracle_tables(const std::string& path) {
  std::vector<OracleTable> out;
  const auto lines = io::read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    try {
      const json j = json::parse(lines[n]);
      OracleTable o;
      o.id = j.at("id").get<std::string>();
      o.g = j.at("g").get<std::vector<double>>();
      o.p = j.at("p").get<std::vector<double>>();
      if (j.contains("noise")) o.noise = j.at("noise").get<std::vector<double>>();
      out.push_back(std::move(o));
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tad::synth
