// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_MATRIX_MARKET_HPP
#define PGDIR_MATRIX_MARKET_HPP

#include <filesystem>
#include <Eigen/Core>
#include "pgdir/fem.hpp"

namespace pgdir
{

enum class MatrixSymmetry
{
  General,
  Symmetric
};

struct MatrixMarketInfo
{
  Index rows = 0;
  Index cols = 0;
  Index entries = 0;
  MatrixSymmetry symmetry = MatrixSymmetry::General;
};

// Writes "%%MatrixMarket matrix coordinate real symmetric" with the lower triangle only,
// 1-based indices and 17 significant digits (lossless for IEEE doubles). Throws
// ShapeError if the matrix is not exactly symmetric.
void WriteMatrixMarket(const SparseMatrix &A, const std::filesystem::path &path);

// Reads coordinate real/integer matrices, general or symmetric. Symmetric storage is
// expanded to both triangles; duplicate entries are summed. Errors carry file and line.
SparseMatrix ReadMatrixMarket(const std::filesystem::path &path,
                              MatrixMarketInfo *info = nullptr);

// Dense column vectors use the "array real general" variant.
void WriteMatrixMarketVector(const Eigen::VectorXd &v, const std::filesystem::path &path);
Eigen::VectorXd ReadMatrixMarketVector(const std::filesystem::path &path);

bool IsExactlySymmetric(const SparseMatrix &A);

}  // namespace pgdir

#endif  // PGDIR_MATRIX_MARKET_HPP
