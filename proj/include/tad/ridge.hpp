#pragma once

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

namespace tad {

template <typename Scalar>
struct RidgeSolution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector weights;   // on standardized features
  Scalar bias = 0;  // unpenalized intercept
  Vector mean;
  Vector scale;     // per-column std, clamped below by std_floor
  Eigen::Index rank_deficient_columns = 0;
};

// Column means and population standard deviations; columns whose spread is
// below `std_floor` are flagged constant and their scale is set to std_floor.
template <typename Derived>
void column_moments(const Eigen::MatrixBase<Derived>& X, typename Derived::Scalar std_floor,
                    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>& mean,
                    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>& scale,
                    Eigen::Array<bool, Eigen::Dynamic, 1>& constant) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<Scalar>(X.rows());
  mean = X.colwise().sum().transpose() / n;
  scale.resize(X.cols());
  constant.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Scalar sd = std::sqrt((X.col(j).array() - mean(j)).square().sum() / n);
    constant(j) = !(sd >= std_floor);
    scale(j) = constant(j) ? std_floor : sd;
  }
}

// Penalized least squares on standardized columns:
//   minimize ||y - b - Z w||^2 + lambda ||w||^2,   Z = (X - mean) / scale.
// Constant columns standardize to exact zeros. lambda == 0 falls back to the
// minimum-norm solution so rank-deficient designs stay well defined.
template <typename DerivedX, typename DerivedY>
RidgeSolution<typename DerivedX::Scalar> ridge_fit(const Eigen::MatrixBase<DerivedX>& X,
                                                   const Eigen::MatrixBase<DerivedY>& y,
                                                   typename DerivedX::Scalar lambda,
                                                   typename DerivedX::Scalar std_floor) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  RidgeSolution<Scalar> sol;
  Eigen::Array<bool, Eigen::Dynamic, 1> constant;
  column_moments(X, std_floor, sol.mean, sol.scale, constant);

  Matrix Z = (X.rowwise() - sol.mean.transpose()).array().rowwise() /
             sol.scale.transpose().array();
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    if (constant(j)) Z.col(j).setZero();
  }
  sol.rank_deficient_columns = constant.count();

  const Scalar y_mean = y.mean();
  const Vector yc = y.array() - y_mean;

  Matrix gram = Matrix::Zero(Z.cols(), Z.cols());
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
  gram.template triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  gram.diagonal().array() += lambda;
  const Vector rhs = Z.transpose() * yc;

  if (lambda > 0) {
    sol.weights = gram.ldlt().solve(rhs);
  } else {
    sol.weights = gram.completeOrthogonalDecomposition().solve(rhs);
  }
  sol.bias = y_mean;
  return sol;
}

// Linear response of a fitted ridge solution on a raw feature vector.
template <typename Scalar, typename Derived>
Scalar ridge_response(const RidgeSolution<Scalar>& sol, const Eigen::MatrixBase<Derived>& x) {
  return sol.bias +
         ((x.array() - sol.mean.array()) / sol.scale.array()).matrix().dot(sol.weights);
}

}  // namespace tad
