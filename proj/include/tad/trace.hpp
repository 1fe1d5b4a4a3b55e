#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tad {

// One generated token.
struct StepRecord {
  std::string token;
  double cond_prob = 1.0;   // p(t_i | t_<i), in (0, 1]
  double entropy = 0.0;     // nats
  std::vector<double> attn_prev;  // layer-major, head-minor; size layers * heads
  std::optional<bool> prev_is_argmax;  // extractor diagnostic, optional
};

struct GenerationTrace {
  std::string id;
  std::string prompt;
  std::string generated;
  std::string reference;
  std::map<std::string, double> quality;
  int layers = 1;
  int heads = 1;
  std::vector<StepRecord> steps;

  std::size_t attention_width() const {
    return static_cast<std::size_t>(layers) * static_cast<std::size_t>(heads);
  }
};

struct TraceDataset {
  std::vector<GenerationTrace> traces;
  std::vector<std::string> provenance;

  bool empty() const { return traces.empty(); }
  std::size_t size() const { return traces.size(); }
};

// Throws ValidationError naming the trace id and offending field.
void validate(const GenerationTrace& trace);

// Validates every trace and the shared (layers, heads) shape.
void validate(const TraceDataset& dataset);

// Reads one trace per line. Blank lines are skipped.
TraceDataset read_traces(const std::string& path);

void write_traces(const TraceDataset& dataset, const std::string& path);

TraceDataset concat_datasets(const std::vector<TraceDataset>& parts);

// Single-line codec used by read_traces/write_traces.
GenerationTrace parse_trace_line(const std::string& line);
std::string format_trace_line(const GenerationTrace& trace);

}  // namespace tad
