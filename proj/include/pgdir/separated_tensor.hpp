// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_SEPARATED_TENSOR_HPP
#define PGDIR_SEPARATED_TENSOR_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>
#include <Eigen/Core>
#include <Eigen/SparseCore>
#include "pgdir/error.hpp"
#include "pgdir/fem.hpp"
#include "pgdir/parametric_grid.hpp"

namespace pgdir
{

using GridPtr = std::shared_ptr<const ParametricGrid>;

enum class SpatialKind
{
  Vector,
  SparseMatrix,
  DenseMatrix
};

//
// Operations on spatial factors, overloaded for the three supported storage kinds.
//

inline Index SpatialRows(const Eigen::VectorXd &x) { return x.size(); }
inline Index SpatialCols(const Eigen::VectorXd &) { return 1; }
inline Index SpatialRows(const Eigen::MatrixXd &x) { return x.rows(); }
inline Index SpatialCols(const Eigen::MatrixXd &x) { return x.cols(); }
inline Index SpatialRows(const SparseMatrix &x) { return x.rows(); }
inline Index SpatialCols(const SparseMatrix &x) { return x.cols(); }

inline double SpatialDot(const Eigen::VectorXd &a, const Eigen::VectorXd &b)
{
  return a.dot(b);
}
inline double SpatialDot(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b)
{
  return a.cwiseProduct(b).sum();
}
double SpatialDot(const SparseMatrix &a, const SparseMatrix &b);

inline double SpatialNorm(const Eigen::VectorXd &a) { return a.norm(); }
inline double SpatialNorm(const Eigen::MatrixXd &a) { return a.norm(); }
inline double SpatialNorm(const SparseMatrix &a) { return a.norm(); }

template <typename S>
S SpatialZero(Index rows, Index cols);
template <>
inline Eigen::VectorXd SpatialZero<Eigen::VectorXd>(Index rows, Index)
{
  return Eigen::VectorXd::Zero(rows);
}
template <>
inline Eigen::MatrixXd SpatialZero<Eigen::MatrixXd>(Index rows, Index cols)
{
  return Eigen::MatrixXd::Zero(rows, cols);
}
template <>
inline SparseMatrix SpatialZero<SparseMatrix>(Index rows, Index cols)
{
  return SparseMatrix(rows, cols);
}

// acc += c * x. Sparse accumulation keeps the union of patterns.
inline void SpatialAxpy(Eigen::VectorXd &acc, double c, const Eigen::VectorXd &x)
{
  acc += c * x;
}
inline void SpatialAxpy(Eigen::MatrixXd &acc, double c, const Eigen::MatrixXd &x)
{
  acc += c * x;
}
void SpatialAxpy(SparseMatrix &acc, double c, const SparseMatrix &x);

template <typename S>
constexpr SpatialKind KindOf();
template <>
constexpr SpatialKind KindOf<Eigen::VectorXd>() { return SpatialKind::Vector; }
template <>
constexpr SpatialKind KindOf<SparseMatrix>() { return SpatialKind::SparseMatrix; }
template <>
constexpr SpatialKind KindOf<Eigen::MatrixXd>() { return SpatialKind::DenseMatrix; }

std::string KindName(SpatialKind kind);

template <typename S>
struct SeparatedTerm
{
  double amplitude = 1.0;
  S spatial;
  std::vector<Eigen::VectorXd> factors;  // one nodal vector per parameter
};

//
// Sum of rank-one terms  sum_i beta_i * S_i * prod_j f_ij(mu_j)  over a shared parametric
// grid. Values are immutable in spirit: operations return new tensors; AddTerm() is the
// only mutator and is meant for construction.
//
template <typename S>
class SeparatedTensor
{
public:
  using Spatial = S;
  using Term = SeparatedTerm<S>;

  SeparatedTensor() = default;
  SeparatedTensor(GridPtr grid, Index rows, Index cols = 1)
    : grid_(std::move(grid)), rows_(rows), cols_(cols)
  {
    if (!grid_)
    {
      throw ShapeError("separated tensor needs a parametric grid");
    }
  }

  const GridPtr &Grid() const { return grid_; }
  Index Rows() const { return rows_; }
  Index Cols() const { return cols_; }
  int NumParams() const { return grid_->NumParams(); }
  Index NumTerms() const { return static_cast<Index>(terms_.size()); }
  const std::vector<Term> &Terms() const { return terms_; }
  const Term &GetTerm(Index i) const { return terms_[static_cast<std::size_t>(i)]; }

  void AddTerm(double amplitude, S spatial, std::vector<Eigen::VectorXd> factors)
  {
    if (SpatialRows(spatial) != rows_ || SpatialCols(spatial) != cols_)
    {
      throw ShapeError("separated term has spatial shape " +
                       std::to_string(SpatialRows(spatial)) + "x" +
                       std::to_string(SpatialCols(spatial)) + ", tensor is " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    if (static_cast<int>(factors.size()) != NumParams())
    {
      throw ShapeError("separated term has " + std::to_string(factors.size()) +
                       " parametric factors, grid has " + std::to_string(NumParams()));
    }
    for (int j = 0; j < NumParams(); j++)
    {
      if (factors[static_cast<std::size_t>(j)].size() != grid_->Size(j))
      {
        throw ShapeError("parametric factor " + std::to_string(j) + " has length " +
                         std::to_string(factors[static_cast<std::size_t>(j)].size()) +
                         ", grid axis has " + std::to_string(grid_->Size(j)) + " nodes");
      }
    }
    terms_.push_back(Term{amplitude, std::move(spatial), std::move(factors)});
  }

  void AddTerm(Term term)
  {
    AddTerm(term.amplitude, std::move(term.spatial), std::move(term.factors));
  }

  // Product of the parametric factors of term i at a node (0-based multi-index).
  double ParametricWeight(Index i, std::span<const Index> node) const
  {
    double w = 1.0;
    const auto &f = terms_[static_cast<std::size_t>(i)].factors;
    for (std::size_t j = 0; j < f.size(); j++)
    {
      w *= f[j](node[j]);
    }
    return w;
  }

  // Terms with a zero parametric product are skipped, so a delta-separated tensor
  // replays its snapshot exactly.
  S Evaluate(std::span<const Index> node) const
  {
    grid_->CheckNode(node);
    S out = SpatialZero<S>(rows_, cols_);
    for (Index i = 0; i < NumTerms(); i++)
    {
      const double w = ParametricWeight(i, node);
      if (w != 0.0)
      {
        SpatialAxpy(out, terms_[static_cast<std::size_t>(i)].amplitude * w,
                    terms_[static_cast<std::size_t>(i)].spatial);
      }
    }
    return out;
  }

  // Piecewise-linear interpolation of the parametric factors between grid nodes.
  S EvaluateAt(std::span<const double> values) const
  {
    grid_->CheckValues(values);
    std::vector<AxisLocation> loc;
    for (int j = 0; j < NumParams(); j++)
    {
      loc.push_back(grid_->Locate(j, values[static_cast<std::size_t>(j)]));
    }
    S out = SpatialZero<S>(rows_, cols_);
    for (const auto &t : terms_)
    {
      double w = t.amplitude;
      for (int j = 0; j < NumParams(); j++)
      {
        w *= Interpolate(t.factors[static_cast<std::size_t>(j)],
                         loc[static_cast<std::size_t>(j)]);
      }
      if (w != 0.0)
      {
        SpatialAxpy(out, w, t.spatial);
      }
    }
    return out;
  }

  // First n terms.
  SeparatedTensor Truncated(Index n) const
  {
    SeparatedTensor out(grid_, rows_, cols_);
    for (Index i = 0; i < std::min(n, NumTerms()); i++)
    {
      out.terms_.push_back(terms_[static_cast<std::size_t>(i)]);
    }
    return out;
  }

  SeparatedTensor Scaled(double c) const
  {
    SeparatedTensor out = *this;
    for (auto &t : out.terms_)
    {
      t.amplitude *= c;
    }
    return out;
  }

  // Unit-norm spatial and parametric factors, amplitudes carrying the magnitude (made
  // non-negative), terms sorted by non-increasing amplitude, zero terms dropped.
  SeparatedTensor Normalized() const
  {
    SeparatedTensor out(grid_, rows_, cols_);
    for (const auto &t : terms_)
    {
      Term n = t;
      double scale = SpatialNorm(n.spatial);
      for (auto &f : n.factors)
      {
        scale *= f.norm();
      }
      if (!(scale > 0.0) || t.amplitude == 0.0)
      {
        continue;
      }
      const double ns = SpatialNorm(n.spatial);
      n.spatial = (1.0 / ns) * n.spatial;
      for (auto &f : n.factors)
      {
        f /= f.norm();
      }
      n.amplitude = t.amplitude * scale;
      if (n.amplitude < 0.0)
      {
        n.amplitude = -n.amplitude;
        n.spatial = -1.0 * n.spatial;
      }
      out.terms_.push_back(std::move(n));
    }
    std::stable_sort(out.terms_.begin(), out.terms_.end(),
                     [](const Term &a, const Term &b) { return a.amplitude > b.amplitude; });
    return out;
  }

  // Same shape and grid (grid compared by value).
  bool Compatible(const SeparatedTensor &other) const
  {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           (grid_ == other.grid_ || *grid_ == *other.grid_);
  }

private:
  GridPtr grid_;
  Index rows_ = 0;
  Index cols_ = 1;
  std::vector<Term> terms_;
};

using SepVector = SeparatedTensor<Eigen::VectorXd>;
using SepSparse = SeparatedTensor<SparseMatrix>;
using SepDense = SeparatedTensor<Eigen::MatrixXd>;

// Term-list concatenation.
template <typename S>
SeparatedTensor<S> SepAdd(const SeparatedTensor<S> &x, const SeparatedTensor<S> &y)
{
  if (!x.Compatible(y))
  {
    throw ShapeError("sep_add: operands differ in shape or parametric grid");
  }
  SeparatedTensor<S> out = x;
  for (const auto &t : y.Terms())
  {
    out.AddTerm(t);
  }
  return out;
}

// Applies a spatial map to every term, keeping amplitudes and parametric factors.
template <typename S, typename Fn>
auto MapSpatial(const SeparatedTensor<S> &x, Fn &&fn)
{
  using R = std::decay_t<decltype(fn(std::declval<const S &>()))>;
  Index rows = 0, cols = 1;
  std::vector<R> mapped;
  for (const auto &t : x.Terms())
  {
    mapped.push_back(fn(t.spatial));
  }
  if (!mapped.empty())
  {
    rows = SpatialRows(mapped.front());
    cols = SpatialCols(mapped.front());
  }
  else
  {
    const R probe = fn(SpatialZero<S>(x.Rows(), x.Cols()));
    rows = SpatialRows(probe);
    cols = SpatialCols(probe);
  }
  SeparatedTensor<R> out(x.Grid(), rows, cols);
  for (std::size_t i = 0; i < mapped.size(); i++)
  {
    out.AddTerm(x.Terms()[i].amplitude, std::move(mapped[i]), x.Terms()[i].factors);
  }
  return out;
}

// Pairwise product of every term of x with every term of y: spatial op(x_i, y_k),
// parametric factors multiplied entrywise, amplitudes multiplied.
template <typename SX, typename SY, typename Op>
auto SepProduct(const SeparatedTensor<SX> &x, const SeparatedTensor<SY> &y, Index rows,
                Index cols, Op &&op)
{
  using R = std::decay_t<decltype(op(std::declval<const SX &>(), std::declval<const SY &>()))>;
  if (!(x.Grid() == y.Grid() || *x.Grid() == *y.Grid()))
  {
    throw ShapeError("separated product: operands live on different parametric grids");
  }
  SeparatedTensor<R> out(x.Grid(), rows, cols);
  for (const auto &a : x.Terms())
  {
    for (const auto &b : y.Terms())
    {
      std::vector<Eigen::VectorXd> f(a.factors.size());
      for (std::size_t j = 0; j < f.size(); j++)
      {
        f[j] = a.factors[j].cwiseProduct(b.factors[j]);
      }
      out.AddTerm(a.amplitude * b.amplitude, op(a.spatial, b.spatial), std::move(f));
    }
  }
  return out;
}

// A(mu) x(mu) for a separated sparse or dense matrix and a separated vector.
template <typename M>
SepVector SepMatVec(const SeparatedTensor<M> &A, const SepVector &x)
{
  if (A.Cols() != x.Rows())
  {
    throw ShapeError("sep_matvec: matrix has " + std::to_string(A.Cols()) +
                     " columns, vector has " + std::to_string(x.Rows()) + " rows");
  }
  return SepProduct(A, x, A.Rows(), 1,
                    [](const M &a, const Eigen::VectorXd &v) -> Eigen::VectorXd
                    { return a * v; });
}

// A(mu) X(mu) with a dense separated right factor.
template <typename M>
SepDense SepMatMul(const SeparatedTensor<M> &A, const SepDense &X)
{
  if (A.Cols() != X.Rows())
  {
    throw ShapeError("sep_matmul: inner dimensions differ");
  }
  return SepProduct(A, X, A.Rows(), X.Cols(),
                    [](const M &a, const Eigen::MatrixXd &b) -> Eigen::MatrixXd
                    { return a * b; });
}

// X(mu)^T Y(mu).
inline SepDense SepTransposeMatMul(const SepDense &X, const SepDense &Y)
{
  if (X.Rows() != Y.Rows())
  {
    throw ShapeError("sep_transpose_matmul: row counts differ");
  }
  return SepProduct(X, Y, X.Cols(), Y.Cols(),
                    [](const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) -> Eigen::MatrixXd
                    { return a.transpose() * b; });
}

// X(mu)^T v(mu).
inline SepVector SepTransposeMatVec(const SepDense &X, const SepVector &v)
{
  if (X.Rows() != v.Rows())
  {
    throw ShapeError("sep_transpose_matvec: row counts differ");
  }
  return SepProduct(X, v, X.Cols(), 1,
                    [](const Eigen::MatrixXd &a, const Eigen::VectorXd &b) -> Eigen::VectorXd
                    { return a.transpose() * b; });
}

// Discrete L2 inner product over the full grid, from factor-wise inner products.
template <typename S>
double SepInner(const SeparatedTensor<S> &x, const SeparatedTensor<S> &y)
{
  if (!x.Compatible(y))
  {
    throw ShapeError("sep_inner: operands differ in shape or parametric grid");
  }
  double sum = 0.0;
  for (const auto &a : x.Terms())
  {
    for (const auto &b : y.Terms())
    {
      double w = a.amplitude * b.amplitude;
      for (std::size_t j = 0; j < a.factors.size() && w != 0.0; j++)
      {
        w *= a.factors[j].dot(b.factors[j]);
      }
      if (w != 0.0)
      {
        sum += w * SpatialDot(a.spatial, b.spatial);
      }
    }
  }
  return sum;
}

template <typename S>
double SepNorm(const SeparatedTensor<S> &x)
{
  return std::sqrt(std::max(0.0, SepInner(x, x)));
}

// Rank-one tensor with constant (all-ones) parametric factors.
template <typename S>
SeparatedTensor<S> SepConstant(const GridPtr &grid, S spatial)
{
  const Index rows = SpatialRows(spatial), cols = SpatialCols(spatial);
  SeparatedTensor<S> out(grid, rows, cols);
  std::vector<Eigen::VectorXd> f;
  for (int j = 0; j < grid->NumParams(); j++)
  {
    f.push_back(Eigen::VectorXd::Ones(grid->Size(j)));
  }
  out.AddTerm(1.0, std::move(spatial), std::move(f));
  return out;
}

}  // namespace pgdir

#endif  // PGDIR_SEPARATED_TENSOR_HPP
