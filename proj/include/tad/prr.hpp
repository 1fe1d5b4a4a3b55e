#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tad/errors.hpp"

namespace tad {

template <typename Scalar>
struct PrrReportT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Eigen::Index n = 0;
  Vector curve_unc;     // curve_unc(k): mean quality retained after k rejections
  Vector curve_oracle;
  Scalar auc_unc = 0;
  Scalar auc_oracle = 0;
  Scalar auc_random = 0;
  Scalar prr = 0;
};

using PrrReport = PrrReportT<double>;

// Rejection order: indices sorted by descending key, ties by ascending index.
template <typename Derived>
std::vector<Eigen::Index> rejection_order(const Eigen::MatrixBase<Derived>& key) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(key.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return key(a) > key(b); });
  return order;
}

// Mean quality of the instances still retained after rejecting the first k
// entries of `order`, for k = 0..n-1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> rejection_curve(
    const Eigen::MatrixBase<Derived>& quality, const std::vector<Eigen::Index>& order) {
  using Scalar = typename Derived::Scalar;
  const auto n = quality.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> curve(n);
  Scalar suffix = 0;
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    suffix += quality(order[static_cast<std::size_t>(k)]);
    curve(k) = suffix / static_cast<Scalar>(n - k);
  }
  return curve;
}

// Prediction rejection ratio of `uncertainty` against `quality`. The areas
// are rectangle sums over rejection counts 0..n-1 divided by n; the random
// baseline is the flat mean quality.
template <typename DerivedU, typename DerivedQ>
PrrReportT<typename DerivedQ::Scalar> prr(const Eigen::MatrixBase<DerivedU>& uncertainty,
                                          const Eigen::MatrixBase<DerivedQ>& quality) {
  using Scalar = typename DerivedQ::Scalar;
  if (uncertainty.size() != quality.size()) {
    throw ValidationError("prr: " + std::to_string(uncertainty.size()) + " uncertainties vs " +
                          std::to_string(quality.size()) + " qualities");
  }
  const Eigen::Index n = quality.size();
  if (n < 2) throw ValidationError("prr: need at least 2 instances");
  if (!uncertainty.allFinite() || !quality.allFinite()) {
    throw ValidationError("prr: non-finite input");
  }
  if ((quality.array() == quality(0)).all()) {
    throw DegenerateError("prr: all qualities are equal; the oracle area is degenerate");
  }

  PrrReportT<Scalar> r;
  r.n = n;
  r.curve_unc = rejection_curve(quality, rejection_order(uncertainty));
  // Oracle rejects lowest quality first: descending order of -quality.
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> neg_q = -quality;
  r.curve_oracle = rejection_curve(quality, rejection_order(neg_q));
  r.auc_unc = r.curve_unc.mean();
  r.auc_oracle = r.curve_oracle.mean();
  r.auc_random = quality.mean();
  const Scalar denom = r.auc_oracle - r.auc_random;
  if (!(denom > 0)) {
    throw DegenerateError("prr: oracle area does not exceed the random baseline");
  }
  r.prr = (r.auc_unc - r.auc_random) / denom;
  return r;
}

}  // namespace tad
