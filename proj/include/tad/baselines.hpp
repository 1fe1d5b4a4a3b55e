#pragma once

#include <string_view>
#include <vector>

#include "tad/engine.hpp"
#include "tad/trace.hpp"

namespace tad {

// Maximum sequence probability as -sum(log p); higher means more uncertain.
double msp(const GenerationTrace& trace);

// -mean(log p).
double perplexity(const GenerationTrace& trace);

double mean_token_entropy(const GenerationTrace& trace);

enum class BaselineMethod { Msp, Perplexity, Entropy };

BaselineMethod parse_baseline(std::string_view name);
std::string_view baseline_name(BaselineMethod method);

// Score table rows; confidence_agg is the negated uncertainty.
std::vector<ScoreRow> score_baseline(const TraceDataset& dataset, BaselineMethod method);

}  // namespace tad
