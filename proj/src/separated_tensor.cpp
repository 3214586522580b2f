// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/separated_tensor.hpp"

#include <algorithm>

namespace pgdir
{

namespace
{

bool SamePattern(const SparseMatrix &a, const SparseMatrix &b)
{
  if (!a.isCompressed() || !b.isCompressed() || a.rows() != b.rows() ||
      a.cols() != b.cols() || a.nonZeros() != b.nonZeros())
  {
    return false;
  }
  if (a.outerIndexPtr() == b.outerIndexPtr() && a.innerIndexPtr() == b.innerIndexPtr())
  {
    return true;
  }
  return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1,
                    b.outerIndexPtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

}  // namespace

double SpatialDot(const SparseMatrix &a, const SparseMatrix &b)
{
  if (SamePattern(a, b))
  {
    return Eigen::Map<const Eigen::VectorXd>(a.valuePtr(), a.nonZeros())
        .dot(Eigen::Map<const Eigen::VectorXd>(b.valuePtr(), b.nonZeros()));
  }
  return a.cwiseProduct(b).sum();
}

void SpatialAxpy(SparseMatrix &acc, double c, const SparseMatrix &x)
{
  if (acc.nonZeros() == 0)
  {
    acc = c * x;
    acc.makeCompressed();
  }
  else if (SamePattern(acc, x))
  {
    Eigen::Map<Eigen::VectorXd>(acc.valuePtr(), acc.nonZeros()) +=
        c * Eigen::Map<const Eigen::VectorXd>(x.valuePtr(), x.nonZeros());
  }
  else
  {
    SparseMatrix sum = acc + c * x;
    acc = std::move(sum);
    acc.makeCompressed();
  }
}

std::string KindName(SpatialKind kind)
{
  switch (kind)
  {
    case SpatialKind::Vector:
      return "vector";
    case SpatialKind::SparseMatrix:
      return "sparse_matrix";
    case SpatialKind::DenseMatrix:
      return "dense_matrix";
  }
  return "unknown";
}

}  // namespace pgdir
