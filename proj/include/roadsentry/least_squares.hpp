#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <optional>

namespace roadsentry {

template <typename Scalar>
struct QuadraticLsResult {
  /// Coefficients of v = c(0) t^2 + c(1) t + c(2).
  Eigen::Matrix<Scalar, 3, 1> coeffs;
  /// Reciprocal-condition based estimate of the solved (scaled) system.
  Scalar condition;
};

/// Degree-2 least squares of v on t through the normal equations. The
/// abscissa is standardized (zero mean, unit variance) before the solve and
/// the coefficients are mapped back afterwards, which keeps the 3x3 system
/// well conditioned for pixel rows or areas up to ~1e6. Returns nullopt when
/// t has zero spread. Caller guarantees t.size() == v.size() >= 3.
template <typename DerivedT, typename DerivedV>
std::optional<QuadraticLsResult<typename DerivedT::Scalar>> fit_quadratic_ls(const Eigen::MatrixBase<DerivedT>& t,
                                                                             const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedT::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

  const Eigen::Index n = t.size();
  const Scalar mean = t.mean();
  const Scalar sigma = std::sqrt((t.array() - mean).square().sum() / Scalar(n));
  if (!(sigma > Scalar(0))) return std::nullopt;

  const Vec z = (t.array() - mean) / sigma;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> design(n, 3);
  design.col(0) = z.array().square();
  design.col(1) = z;
  design.col(2).setOnes();

  const Mat3 normal = design.transpose() * design;
  const Vec3 rhs = design.transpose() * v.derived().template cast<Scalar>();
  const Eigen::PartialPivLU<Mat3> lu(normal);
  const Vec3 g = lu.solve(rhs);
  const Scalar rcond = lu.rcond();

  // v = g0 z^2 + g1 z + g2 with z = (t - mean) / sigma.
  const Scalar s2 = sigma * sigma;
  QuadraticLsResult<Scalar> out;
  out.coeffs(0) = g(0) / s2;
  out.coeffs(1) = g(1) / sigma - Scalar(2) * g(0) * mean / s2;
  out.coeffs(2) = g(0) * mean * mean / s2 - g(1) * mean / sigma + g(2);
  out.condition = rcond > Scalar(0) ? Scalar(1) / rcond : std::numeric_limits<Scalar>::infinity();
  return out;
}

}  // namespace roadsentry
