#include "tad/quality.hpp"

#include <algorithm>
#include <cctype>

#include "tad/errors.hpp"

namespace tad {

std::string casefold(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokens.push_back(casefold(text.substr(i, j - i)));
    i = j;
  }
  return tokens;
}

namespace {

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  // Two-row DP over b.
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (const auto& x : a) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = (x == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = word_tokens(candidate);
  const auto r = word_tokens(reference);
  if (c.empty() || r.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_length(c, r));
  if (lcs == 0.0) return 0.0;
  const double precision = lcs / static_cast<double>(c.size());
  const double recall = lcs / static_cast<double>(r.size());
  return 2.0 * precision * recall / (precision + recall);
}

double accuracy(std::string_view candidate, std::string_view reference) {
  return casefold(trim(candidate)) == casefold(trim(reference)) ? 1.0 : 0.0;
}

double similarity(std::string_view generated, std::string_view reference,
                  std::optional<double> external) {
  if (external) {
    if (!(*external >= 0.0 && *external <= 1.0)) {
      throw ValidationError("external similarity " + std::to_string(*external) +
                            " outside [0, 1]");
    }
    return *external;
  }
  return rouge_l(generated, reference);
}

double resolve_quality(const GenerationTrace& trace, const std::string& metric) {
  if (auto it = trace.quality.find(metric); it != trace.quality.end()) {
    return it->second;
  }
  if (metric == "rougeL") return rouge_l(trace.generated, trace.reference);
  if (metric == "accuracy") return accuracy(trace.generated, trace.reference);
  throw ValidationError("trace '" + trace.id + "': quality metric '" + metric +
                        "' is not present");
}

bool has_quality(const TraceDataset& dataset, const std::string& metric) {
  return !dataset.empty() &&
         std::all_of(dataset.traces.begin(), dataset.traces.end(),
                     [&](const GenerationTrace& t) { return t.quality.count(metric) > 0; });
}

}  // namespace tad
