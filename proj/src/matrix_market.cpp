// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include "pgdir/error.hpp"

namespace pgdir
{

namespace
{

[[noreturn]] void Fail(const std::filesystem::path &path, long lineno, const std::string &what)
{
  throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + what);
}

std::string Lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Banner
{
  std::string format;  // coordinate | array
  std::string field;   // real | integer
  MatrixSymmetry symmetry = MatrixSymmetry::General;
};

Banner ReadBanner(std::istream &in, const std::filesystem::path &path, long &lineno)
{
  std::string line;
  if (!std::getline(in, line))
  {
    Fail(path, 1, "empty file");
  }
  lineno = 1;
  std::istringstream ss(line);
  std::string tag, object, format, field, symmetry;
  if (!(ss >> tag >> object >> format >> field >> symmetry) || tag != "%%MatrixMarket")
  {
    Fail(path, lineno, "missing or malformed %%MatrixMarket banner");
  }
  Banner b;
  if (Lower(object) != "matrix")
  {
    Fail(path, lineno, "unsupported object '" + object + "'");
  }
  b.format = Lower(format);
  if (b.format != "coordinate" && b.format != "array")
  {
    Fail(path, lineno, "unsupported format '" + format + "'");
  }
  b.field = Lower(field);
  if (b.field != "real" && b.field != "integer" && b.field != "double")
  {
    Fail(path, lineno, "unsupported field '" + field + "' (real or integer expected)");
  }
  const std::string sym = Lower(symmetry);
  if (sym == "general")
  {
    b.symmetry = MatrixSymmetry::General;
  }
  else if (sym == "symmetric")
  {
    b.symmetry = MatrixSymmetry::Symmetric;
  }
  else
  {
    Fail(path, lineno, "unsupported symmetry '" + symmetry + "'");
  }
  return b;
}

// Next line that is neither blank nor a '%' comment.
bool NextDataLine(std::istream &in, std::string &line, long &lineno)
{
  while (std::getline(in, line))
  {
    lineno++;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%')
    {
      continue;
    }
    return true;
  }
  return false;
}

void WriteDouble(std::FILE *f, double v)
{
  std::fprintf(f, "%.17g", v);
}

}  // namespace

bool IsExactlySymmetric(const SparseMatrix &A)
{
  if (A.rows() != A.cols())
  {
    return false;
  }
  const SparseMatrix At = A.transpose();
  if (At.nonZeros() != A.nonZeros())
  {
    return false;
  }
  for (Index k = 0; k < A.outerSize(); k++)
  {
    SparseMatrix::InnerIterator a(A, k), b(At, k);
    for (; a && b; ++a, ++b)
    {
      if (a.index() != b.index() || a.value() != b.value())
      {
        return false;
      }
    }
    if (a || b)
    {
      return false;
    }
  }
  return true;
}

void WriteMatrixMarket(const SparseMatrix &A, const std::filesystem::path &path)
{
  if (!IsExactlySymmetric(A))
  {
    throw ShapeError("Matrix Market export expects an exactly symmetric matrix: " +
                     path.string());
  }
  Index lower = 0;
  for (Index j = 0; j < A.outerSize(); j++)
  {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it)
    {
      lower += (it.row() >= j) ? 1 : 0;
    }
  }
  std::FILE *f = std::fopen(path.string().c_str(), "w");
  if (!f)
  {
    throw Error("cannot write " + path.string());
  }
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate real symmetric\n");
  std::fprintf(f, "%lld %lld %lld\n", static_cast<long long>(A.rows()),
               static_cast<long long>(A.cols()), static_cast<long long>(lower));
  for (Index j = 0; j < A.outerSize(); j++)
  {
    for (SparseMatrix::InnerIterator it(A, j); it; ++it)
    {
      if (it.row() >= j)
      {
        std::fprintf(f, "%lld %lld ", static_cast<long long>(it.row() + 1),
                     static_cast<long long>(j + 1));
        WriteDouble(f, it.value());
        std::fputc('\n', f);
      }
    }
  }
  if (std::fclose(f) != 0)
  {
    throw Error("error while writing " + path.string());
  }
}

SparseMatrix ReadMatrixMarket(const std::filesystem::path &path, MatrixMarketInfo *info)
{
  std::ifstream in(path);
  if (!in)
  {
    throw MissingInput("cannot open Matrix Market file " + path.string());
  }
  long lineno = 0;
  const Banner banner = ReadBanner(in, path, lineno);
  if (banner.format != "coordinate")
  {
    Fail(path, lineno, "expected coordinate format for a sparse matrix");
  }

  std::string line;
  if (!NextDataLine(in, line, lineno))
  {
    Fail(path, lineno, "missing size line");
  }
  long long rows = -1, cols = -1, nnz = -1;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
    {
      Fail(path, lineno, "malformed size line, expected 'rows cols entries'");
    }
  }
  if (banner.symmetry == MatrixSymmetry::Symmetric && rows != cols)
  {
    Fail(path, lineno, "symmetric matrix must be square");
  }

  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz) *
                   (banner.symmetry == MatrixSymmetry::Symmetric ? 2 : 1));
  for (long long k = 0; k < nnz; k++)
  {
    if (!NextDataLine(in, line, lineno))
    {
      Fail(path, lineno,
           "unexpected end of file after " + std::to_string(k) + " of " +
               std::to_string(nnz) + " entries");
    }
    std::istringstream ss(line);
    long long i, j;
    double v;
    if (!(ss >> i >> j >> v))
    {
      Fail(path, lineno, "malformed entry, expected 'row col value'");
    }
    if (i < 1 || i > rows || j < 1 || j > cols)
    {
      Fail(path, lineno, "entry index out of range");
    }
    if (banner.symmetry == MatrixSymmetry::Symmetric && i < j)
    {
      Fail(path, lineno, "symmetric storage must list the lower triangle only");
    }
    triplets.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
    if (banner.symmetry == MatrixSymmetry::Symmetric && i != j)
    {
      triplets.emplace_back(static_cast<Index>(j - 1), static_cast<Index>(i - 1), v);
    }
  }
  if (NextDataLine(in, line, lineno))
  {
    Fail(path, lineno, "trailing data after " + std::to_string(nnz) + " entries");
  }

  SparseMatrix A(static_cast<Index>(rows), static_cast<Index>(cols));
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  if (info)
  {
    info->rows = A.rows();
    info->cols = A.cols();
    info->entries = static_cast<Index>(nnz);
    info->symmetry = banner.symmetry;
  }
  return A;
}

void WriteMatrixMarketVector(const Eigen::VectorXd &v, const std::filesystem::path &path)
{
  std::FILE *f = std::fopen(path.string().c_str(), "w");
  if (!f)
  {
    throw Error("cannot write " + path.string());
  }
  std::fprintf(f, "%%%%MatrixMarket matrix array real general\n");
  std::fprintf(f, "%lld 1\n", static_cast<long long>(v.size()));
  for (Index i = 0; i < v.size(); i++)
  {
    WriteDouble(f, v(i));
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0)
  {
    throw Error("error while writing " + path.string());
  }
}

Eigen::VectorXd ReadMatrixMarketVector(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw MissingInput("cannot open Matrix Market file " + path.string());
  }
  long lineno = 0;
  const Banner banner = ReadBanner(in, path, lineno);
  if (banner.format != "array" || banner.symmetry != MatrixSymmetry::General)
  {
    Fail(path, lineno, "expected 'array ... general' format for a vector");
  }
  std::string line;
  if (!NextDataLine(in, line, lineno))
  {
    Fail(path, lineno, "missing size line");
  }
  long long rows = -1, cols = -1;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols) || rows < 0 || cols != 1)
    {
      Fail(path, lineno, "expected 'rows 1' size line for a vector");
    }
  }
  Eigen::VectorXd v(static_cast<Index>(rows));
  for (long long k = 0; k < rows; k++)
  {
    if (!NextDataLine(in, line, lineno))
    {
      Fail(path, lineno, "unexpected end of file in vector data");
    }
    std::istringstream ss(line);
    if (!(ss >> v(static_cast<Index>(k))))
    {
      Fail(path, lineno, "malformed value");
    }
  }
  return v;
}

}  // namespace pgdir
