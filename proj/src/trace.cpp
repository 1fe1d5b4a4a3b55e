#include "tad/trace.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tad/errors.hpp"
#include "tad/io.hpp"

namespace tad {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const GenerationTrace& t, const std::string& field,
                       const std::string& what) {
  throw ValidationError("trace '" + t.id + "': field '" + field + "' " + what);
}

template <typename T>
T required(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

StepRecord step_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("step is not an object");
  StepRecord s;
  s.token = required<std::string>(j, "token");
  s.cond_prob = required<double>(j, "cond_prob");
  s.entropy = required<double>(j, "entropy");
  s.attn_prev = required<std::vector<double>>(j, "attn_prev");
  if (auto it = j.find("prev_is_argmax"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw ParseError("field 'prev_is_argmax' has the wrong type");
    s.prev_is_argmax = it->get<bool>();
  }
  return s;
}

}  // namespace

void validate(const GenerationTrace& t) {
  if (t.id.empty()) {
    throw ValidationError("trace with empty 'id'");
  }
  if (t.layers <= 0) fail(t, "layers", "must be positive");
  if (t.heads <= 0) fail(t, "heads", "must be positive");
  if (t.steps.empty()) fail(t, "steps", "must be non-empty");
  for (const auto& [name, value] : t.quality) {
    if (!(value >= 0.0 && value <= 1.0)) {
      fail(t, "quality." + name, "must lie in [0, 1]");
    }
  }
  const std::size_t width = t.attention_width();
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const StepRecord& s = t.steps[i];
    const std::string where = "steps[" + std::to_string(i) + "].";
    if (!(s.cond_prob > 0.0 && s.cond_prob <= 1.0)) {
      fail(t, where + "cond_prob", "must lie in (0, 1]");
    }
    if (!(s.entropy >= 0.0) || !std::isfinite(s.entropy)) {
      fail(t, where + "entropy", "must be finite and >= 0");
    }
    if (s.attn_prev.size() != width) {
      fail(t, where + "attn_prev", "length " + std::to_string(s.attn_prev.size()) +
                                       " != layers*heads " + std::to_string(width));
    }
    for (double a : s.attn_prev) {
      if (!(a >= 0.0 && a <= 1.0)) fail(t, where + "attn_prev", "values must lie in [0, 1]");
    }
  }
}

void validate(const TraceDataset& d) {
  std::set<std::string> seen;
  for (const auto& t : d.traces) {
    validate(t);
    if (!seen.insert(t.id).second) {
      throw ValidationError("duplicate trace id '" + t.id + "'");
    }
    const auto& first = d.traces.front();
    if (t.layers != first.layers || t.heads != first.heads) {
      throw ValidationError("trace '" + t.id + "': attention shape " +
                            std::to_string(t.layers) + "x" + std::to_string(t.heads) +
                            " differs from dataset shape " + std::to_string(first.layers) +
                            "x" + std::to_string(first.heads));
    }
  }
}

GenerationTrace parse_trace_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("record is not an object");
  GenerationTrace t;
  t.id = required<std::string>(j, "id");
  t.prompt = required<std::string>(j, "prompt");
  t.generated = required<std::string>(j, "generated");
  t.reference = required<std::string>(j, "reference");
  t.quality = required<std::map<std::string, double>>(j, "quality");
  t.layers = required<int>(j, "layers");
  t.heads = required<int>(j, "heads");
  const json steps = required<json>(j, "steps");
  if (!steps.is_array()) throw ParseError("field 'steps' has the wrong type");
  t.steps.reserve(steps.size());
  for (const auto& s : steps) t.steps.push_back(step_from_json(s));
  return t;
}

std::string format_trace_line(const GenerationTrace& t) {
  json steps = json::array();
  for (const auto& s : t.steps) {
    json js = {{"token", s.token},
               {"cond_prob", s.cond_prob},
               {"entropy", s.entropy},
               {"attn_prev", s.attn_prev}};
    if (s.prev_is_argmax) js["prev_is_argmax"] = *s.prev_is_argmax;
    steps.push_back(std::move(js));
  }
  json j = {{"id", t.id},           {"prompt", t.prompt}, {"generated", t.generated},
            {"reference", t.reference}, {"quality", t.quality}, {"layers", t.layers},
            {"heads", t.heads},     {"steps", std::move(steps)}};
  return j.dump();
}

TraceDataset read_traces(const std::string& path) {
  TraceDataset d;
  d.provenance.push_back(path);
  const auto lines = io::read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].find_first_not_of(" \t") == std::string::npos) continue;
    try {
      d.traces.push_back(parse_trace_line(lines[n]));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(n + 1) + ": " + e.what());
    }
  }
  validate(d);
  return d;
}

void write_traces(const TraceDataset& d, const std::string& path) {
  validate(d);
  std::string out;
  for (const auto& t : d.traces) {
    out += format_trace_line(t);
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

TraceDataset concat_datasets(const std::vector<TraceDataset>& parts) {
  TraceDataset out;
  for (const auto& p : parts) {
    out.traces.insert(out.traces.end(), p.traces.begin(), p.traces.end());
    out.provenance.insert(out.provenance.end(), p.provenance.begin(), p.provenance.end());
  }
  validate(out);
  return out;
}

}  // namespace tad
