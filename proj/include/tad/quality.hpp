#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tad/trace.hpp"

namespace tad {

// ASCII case fold. Bytes >= 0x80 pass through unchanged.
std::string casefold(std::string_view text);

// Case-folded whitespace tokens.
std::vector<std::string> word_tokens(std::string_view text);

// ROUGE-L F1 over case-folded whitespace tokens; 0 when either side is empty.
double rouge_l(std::string_view candidate, std::string_view reference);

// Exact match after trimming and case folding; 1.0 or 0.0.
double accuracy(std::string_view candidate, std::string_view reference);

// External similarity when supplied, otherwise rouge_l as a stand-in.
double similarity(std::string_view generated, std::string_view reference,
                  std::optional<double> external = std::nullopt);

// Resolves a quality metric for a trace. "rougeL" and "accuracy" use the
// stored value when present and are computed from generated/reference
// otherwise; any other name must be present in the trace's quality map.
double resolve_quality(const GenerationTrace& trace, const std::string& metric);

// True when every trace carries `metric` in its quality map.
bool has_quality(const TraceDataset& dataset, const std::string& metric);

}  // namespace tad
