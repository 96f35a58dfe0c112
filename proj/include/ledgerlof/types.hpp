#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace ledgerlof {

using Index = Eigen::Index;
using NodeId = std::uint64_t;

/// Points are stored one per row so a row is contiguous in memory.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar> using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RowMatrixXd = RowMatrix<double>;

/// Squared Euclidean distance between two rows, summed in column order. The
/// fixed summation order keeps distances bit-identical no matter which search
/// structure produced the pair.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar squared_distance(Eigen::MatrixBase<DerivedA> const &a, Eigen::MatrixBase<DerivedB> const &b)
{
  using Scalar = typename DerivedA::Scalar;
  Scalar acc{0};
  for (Index j = 0; j < a.size(); ++j) {
    Scalar const diff = a(j) - b(j);
    acc += diff * diff;
  }
  return acc;
}

} // namespace ledgerlof
