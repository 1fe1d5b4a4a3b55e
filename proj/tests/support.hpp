#pragma once

// Shared test helpers: random valid traces, scratch directories, and
// independent brute-force oracles that do not reuse library code paths.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tad/trace.hpp"

namespace tad::test {

class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tad-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline GenerationTrace random_trace(std::mt19937_64& rng, const std::string& id, int layers,
                                    int heads, int max_len = 12) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, max_len);
  GenerationTrace t;
  t.id = id;
  t.prompt = "prompt \"quoted\" \\ " + id;
  t.reference = "ref ünï " + id;
  t.layers = layers;
  t.heads = heads;
  t.quality["rougeL"] = unit(rng);
  if (unit(rng) < 0.5) t.quality["alignscore"] = unit(rng);
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    StepRecord s;
    s.token = " tok" + std::to_string(i);
    s.cond_prob = 1.0 - unit(rng);  // (0, 1]
    s.entropy = -std::log(unit(rng) + 1e-300) * unit(rng);
    for (int k = 0; k < layers * heads; ++k) s.attn_prev.push_back(unit(rng));
    if (unit(rng) < 0.3) s.prev_is_argmax = unit(rng) < 0.5;
    t.generated += s.token;
    t.steps.push_back(std::move(s));
  }
  return t;
}

inline TraceDataset random_dataset(std::mt19937_64& rng, int n, int layers, int heads) {
  TraceDataset d;
  for (int i = 0; i < n; ++i) {
    d.traces.push_back(random_trace(rng, "t" + std::to_string(i), layers, heads));
  }
  return d;
}

// LCS by enumerating every subsequence of `a` (|a| <= ~16) and testing it
// against `b` greedily.
inline std::size_t brute_lcs(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
  std::size_t best = 0;
  const std::size_t subsets = std::size_t{1} << a.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::size_t len = 0, j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask >> i & 1)) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else { ++j; ++len; }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

// PRR recomputed by explicitly building each retained set. Rejection order is
// a full sort of (key, index) pairs; the retained set after k rejections is
// materialized as a std::set of indices.
struct BrutePrr {
  double auc_unc, auc_oracle, auc_random, prr;
};

inline BrutePrr brute_prr(const std::vector<double>& u, const std::vector<double>& q) {
  const std::size_t n = q.size();
  auto area = [&](const std::vector<std::pair<double, std::size_t>>& keyed) {
    // keyed sorted so that the first element is rejected first
    long double total = 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::set<std::size_t> retained;
      for (std::size_t i = 0; i < n; ++i) retained.insert(i);
      for (std::size_t r = 0; r < k; ++r) retained.erase(keyed[r].second);
      long double s = 0;
      for (auto i : retained) s += q[i];
      total += s / static_cast<long double>(retained.size());
    }
    return total / static_cast<long double>(n);
  };
  std::vector<std::pair<double, std::size_t>> by_unc, by_q;
  for (std::size_t i = 0; i < n; ++i) {
    by_unc.push_back({u[i], i});
    by_q.push_back({q[i], i});
  }
  // Highest uncertainty first; ties by lower index.
  std::sort(by_unc.begin(), by_unc.end(), [](auto a, auto b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  // Lowest quality first; ties by lower index.
  std::sort(by_q.begin(), by_q.end(), [](auto a, auto b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  long double mean = 0;
  for (double v : q) mean += v;
  mean /= static_cast<long double>(n);
  const long double unc = area(by_unc), oracle = area(by_q);
  BrutePrr r;
  r.auc_unc = static_cast<double>(unc);
  r.auc_oracle = static_cast<double>(oracle);
  r.auc_random = static_cast<double>(mean);
  r.prr = static_cast<double>((unc - mean) / (oracle - mean));
  return r;
}

// Dense ridge oracle: explicit standardization, augmented design [1, Z] with
// penalty diag(0, lambda, ..., lambda), solved by Gauss-Jordan elimination
// with partial pivoting in long double.
struct DenseRidge {
  std::vector<double> weights;
  double bias;
};

inline DenseRidge dense_ridge(const std::vector<std::vector<double>>& X,
                              const std::vector<double>& y, double lambda) {
  using LD = long double;
  const std::size_t n = X.size(), d = X.front().size();
  std::vector<LD> mean(d, 0), sd(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) mean[j] += X[i][j];
    mean[j] /= n;
    for (std::size_t i = 0; i < n; ++i) sd[j] += (X[i][j] - mean[j]) * (X[i][j] - mean[j]);
    sd[j] = std::sqrt(sd[j] / n);
  }
  const std::size_t m = d + 1;
  std::vector<std::vector<LD>> A(m, std::vector<LD>(m + 1, 0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<LD> row(m);
    row[0] = 1;
    for (std::size_t j = 0; j < d; ++j) row[j + 1] = (X[i][j] - mean[j]) / sd[j];
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) A[a][b] += row[a] * row[b];
      A[a][m] += row[a] * y[i];
    }
  }
  for (std::size_t a = 1; a < m; ++a) A[a][a] += lambda;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r) {
      if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
    }
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c) continue;
      const LD f = A[r][c] / A[c][c];
      for (std::size_t k = c; k <= m; ++k) A[r][k] -= f * A[c][k];
    }
  }
  DenseRidge out;
  out.bias = static_cast<double>(A[0][m] / A[0][0]);
  for (std::size_t a = 1; a < m; ++a) out.weights.push_back(static_cast<double>(A[a][m] / A[a][a]));
  return out;
}

}  // namespace tad::test
