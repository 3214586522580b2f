// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/compression.hpp"

#include <cmath>
#include <random>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace pgdir
{

namespace
{

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Tensor in coefficient form over the input spatial factors S_i: term t has spatial
// factor sum_i A(i, t) S_i and parametric factor j equal to F[j].col(t).
struct Coefficients
{
  MatrixXd A;
  std::vector<MatrixXd> F;
};

// B * M^{-1} for a small symmetric positive semi-definite M, with a relative ridge so
// that duplicated or vanishing terms do not break the solve.
MatrixXd RightSolve(const MatrixXd &M, const MatrixXd &B)
{
  const double scale = std::max(M.diagonal().cwiseAbs().maxCoeff(), 1.0e-300);
  MatrixXd Mr = M;
  Mr.diagonal().array() += 1.0e-14 * scale;
  Eigen::LDLT<MatrixXd> ldlt(Mr);
  return ldlt.solve(B.transpose()).transpose();
}

Coefficients Append(const Coefficients &a, const Coefficients &b, double sign_b)
{
  Coefficients out;
  out.A.resize(a.A.rows(), a.A.cols() + b.A.cols());
  out.A << a.A, sign_b * b.A;
  for (std::size_t j = 0; j < a.F.size(); j++)
  {
    MatrixXd f(a.F[j].rows(), a.F[j].cols() + b.F[j].cols());
    f << a.F[j], b.F[j];
    out.F.push_back(std::move(f));
  }
  return out;
}

class AlternatingLeastSquares
{
public:
  AlternatingLeastSquares(const MatrixXd &gram, std::mt19937 &rng) : gram_(gram), rng_(rng) {}

  // Enables exact residuals below `switch2` (absolute, squared): the expanded form
  // ||x||^2 - 2<x,y> + ||y||^2 cannot resolve relative residuals much below 1e-8.
  void EnableExact(double switch2)
  {
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram_);
    // Eigenvalues at round-off level are null directions of the spatial factors.
    const double cut = 1.0e-15 * static_cast<double>(gram_.rows()) *
                       std::max(eig.eigenvalues().maxCoeff(), 0.0);
    const VectorXd root = (eig.eigenvalues().array() > cut)
                              .select(eig.eigenvalues().cwiseMax(0.0).cwiseSqrt(), 0.0);
    whiten_ = root.asDiagonal() * eig.eigenvectors().transpose();
    switch2_ = switch2;
  }
  bool Exact() const { return whiten_.size() > 0; }

  // Squared discrete-L2 norm of a coefficient-form tensor.
  double Norm2(const Coefficients &x) const
  {
    MatrixXd P = x.A.transpose() * gram_ * x.A;
    for (const auto &f : x.F)
    {
      P = P.cwiseProduct(f.transpose() * f);
    }
    return P.sum();
  }

  // ||target - fit||^2 given ||target||^2.
  double Residual2(const Coefficients &target, double target_norm2, const Coefficients &fit) const
  {
    MatrixXd cross = target.A.transpose() * gram_ * fit.A;
    for (std::size_t j = 0; j < fit.F.size(); j++)
    {
      cross = cross.cwiseProduct(target.F[j].transpose() * fit.F[j]);
    }
    const double r2 = target_norm2 - 2.0 * cross.sum() + Norm2(fit);
    return Exact() && r2 <= switch2_ ? DenseResidual2(target, fit) : r2;
  }

  // Same quantity from the dense residual core in whitened spatial coordinates.
  double DenseResidual2(const Coefficients &target, const Coefficients &fit) const
  {
    const Coefficients d = Append(target, fit, -1.0);
    MatrixXd K = d.F[0];
    for (std::size_t j = 1; j < d.F.size(); j++)
    {
      MatrixXd next(K.rows() * d.F[j].rows(), K.cols());
      for (Index p = 0; p < d.F[j].rows(); p++)
      {
        next.middleRows(p * K.rows(), K.rows()) = K * d.F[j].row(p).asDiagonal();
      }
      K = std::move(next);
    }
    return ((whiten_ * d.A) * K.transpose()).squaredNorm();
  }

  void Sweep(const Coefficients &target, Coefficients &fit) const
  {
    const Index T = target.A.cols(), R = fit.A.cols();
    const std::size_t np = fit.F.size();

    // Spatial step: fit.A = A P Gamma^{-1}.
    MatrixXd P = MatrixXd::Ones(T, R), Gamma = MatrixXd::Ones(R, R);
    for (std::size_t j = 0; j < np; j++)
    {
      P = P.cwiseProduct(target.F[j].transpose() * fit.F[j]);
      Gamma = Gamma.cwiseProduct(fit.F[j].transpose() * fit.F[j]);
    }
    fit.A = RightSolve(Gamma, target.A * P);

    // One parametric dimension at a time, the others held fixed.
    for (std::size_t j = 0; j < np; j++)
    {
      const MatrixXd GC = gram_ * fit.A;
      MatrixXd W = target.A.transpose() * GC;
      MatrixXd H = fit.A.transpose() * GC;
      for (std::size_t l = 0; l < np; l++)
      {
        if (l != j)
        {
          W = W.cwiseProduct(target.F[l].transpose() * fit.F[l]);
          H = H.cwiseProduct(fit.F[l].transpose() * fit.F[l]);
        }
      }
      fit.F[j] = RightSolve(H, target.F[j] * W);
      for (Index r = 0; r < R; r++)
      {
        const double n = fit.F[j].col(r).norm();
        if (n > 0.0 && std::isfinite(n))
        {
          fit.F[j].col(r) /= n;
          fit.A.col(r) *= n;
        }
        else
        {
          fit.F[j].col(r) = RandomUnit(fit.F[j].rows());
        }
      }
    }
  }

  VectorXd RandomUnit(Index n) const
  {
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd v(n);
    for (Index k = 0; k < n; k++)
    {
      v(k) = normal(rng_);
    }
    return v / v.norm();
  }

private:
  const MatrixXd &gram_;
  std::mt19937 &rng_;
  MatrixXd whiten_;
  double switch2_ = 0.0;
};


}  // namespace

template <typename S>
SeparatedTensor<S> SepCompress(const SeparatedTensor<S> &x, const CompressionOptions &options,
                               CompressionReport *report)
{
  CompressionReport local;
  CompressionReport &rep = report ? *report : local;
  rep = CompressionReport{};
  rep.input_terms = x.NumTerms();

  // Drop terms that contribute nothing.
  std::vector<const SeparatedTerm<S> *> terms;
  for (const auto &t : x.Terms())
  {
    double w = t.amplitude;
    for (const auto &f : t.factors)
    {
      w *= f.norm();
    }
    if (w != 0.0 && SpatialNorm(t.spatial) > 0.0)
    {
      terms.push_back(&t);
    }
  }
  const Index N = static_cast<Index>(terms.size());
  const int np = x.NumParams();
  if (N <= 1)
  {
    SeparatedTensor<S> out = x.Normalized();
    rep.output_terms = out.NumTerms();
    return out;
  }

  MatrixXd gram(N, N);
  for (Index i = 0; i < N; i++)
  {
    for (Index k = 0; k <= i; k++)
    {
      gram(i, k) = gram(k, i) = SpatialDot(terms[static_cast<std::size_t>(i)]->spatial,
                                           terms[static_cast<std::size_t>(k)]->spatial);
    }
  }

  Coefficients target;
  target.A = MatrixXd::Zero(N, N);
  for (Index i = 0; i < N; i++)
  {
    target.A(i, i) = terms[static_cast<std::size_t>(i)]->amplitude;
  }
  for (int j = 0; j < np; j++)
  {
    MatrixXd f(x.Grid()->Size(j), N);
    for (Index i = 0; i < N; i++)
    {
      f.col(i) = terms[static_cast<std::size_t>(i)]->factors[static_cast<std::size_t>(j)];
    }
    target.F.push_back(std::move(f));
  }

  std::mt19937 rng(options.seed);
  AlternatingLeastSquares als(gram, rng);
  const double xnorm2 = als.Norm2(target);
  if (!(xnorm2 > 0.0))
  {
    rep.output_terms = 0;
    return SeparatedTensor<S>(x.Grid(), x.Rows(), x.Cols());
  }
  // Dense residual cores cost N * nodes * terms flops per evaluation.
  const double dense_cost = static_cast<double>(N) * static_cast<double>(x.Grid()->TotalNodes()) *
                            static_cast<double>(N + std::min<Index>(N, options.max_terms));
  if (dense_cost <= 2.0e8)
  {
    als.EnableExact(1.0e-8 * xnorm2);
  }
  const double floor2 = (als.Exact() ? 1.0e-30 : 1.0e-15) * xnorm2;
  const double tol2 = options.tol * options.tol * xnorm2;

  Coefficients fit;
  fit.A.resize(N, 0);
  fit.F.assign(static_cast<std::size_t>(np), MatrixXd());
  for (int j = 0; j < np; j++)
  {
    fit.F[static_cast<std::size_t>(j)].resize(x.Grid()->Size(j), 0);
  }
  double res2 = xnorm2;
  bool reduced = true;

  while (res2 > tol2)
  {
    const Index R = fit.A.cols();
    if (R + 1 >= N)
    {
      reduced = false;
      break;
    }
    if (R >= options.max_terms)
    {
      rep.converged = false;
      break;
    }

    // New term: rank-one fit of the current residual.
    const Coefficients residual = Append(target, fit, -1.0);
    Coefficients term;
    for (int attempt = 0; attempt < 2; attempt++)
    {
      term.A = MatrixXd::Zero(N, 1);
      term.F.clear();
      for (int j = 0; j < np; j++)
      {
        const Index n = x.Grid()->Size(j);
        term.F.push_back(attempt == 0
                             ? MatrixXd(VectorXd::Constant(n, 1.0 / std::sqrt(double(n))))
                             : MatrixXd(als.RandomUnit(n)));
      }
      double prev = res2;
      for (int s = 0; s < options.max_sweeps; s++)
      {
        als.Sweep(residual, term);
        rep.sweeps++;
        const double cur = als.Residual2(residual, res2, term);
        if (prev - cur <= options.sweep_tol * prev || cur <= floor2)
        {
          prev = cur;
          break;
        }
        prev = cur;
      }
      if (res2 - prev > 1.0e-10 * res2)
      {
        break;
      }
    }
    fit = Append(fit, term, 1.0);

    // Joint refinement of all terms against the original tensor.
    double prev = als.Residual2(target, xnorm2, fit);
    for (int s = 0; s < options.max_sweeps && prev > floor2; s++)
    {
      Coefficients trial = fit;
      als.Sweep(target, trial);
      rep.sweeps++;
      const double cur = als.Residual2(target, xnorm2, trial);
      if (!(cur <= prev))
      {
        break;
      }
      fit = std::move(trial);
      const bool stalled = prev - cur <= options.sweep_tol * prev;
      prev = cur;
      if (stalled)
      {
        break;
      }
    }
    res2 = prev;
  }

  if (!reduced)
  {
    SeparatedTensor<S> out = x.Normalized();
    rep.output_terms = out.NumTerms();
    rep.relative_residual = 0.0;
    rep.converged = true;
    return out;
  }

  SeparatedTensor<S> out(x.Grid(), x.Rows(), x.Cols());
  for (Index r = 0; r < fit.A.cols(); r++)
  {
    S spatial = SpatialZero<S>(x.Rows(), x.Cols());
    for (Index i = 0; i < N; i++)
    {
      if (fit.A(i, r) != 0.0)
      {
        SpatialAxpy(spatial, fit.A(i, r), terms[static_cast<std::size_t>(i)]->spatial);
      }
    }
    std::vector<VectorXd> factors;
    for (int j = 0; j < np; j++)
    {
      factors.push_back(fit.F[static_cast<std::size_t>(j)].col(r));
    }
    out.AddTerm(1.0, std::move(spatial), std::move(factors));
  }
  out = out.Normalized();
  rep.output_terms = out.NumTerms();
  rep.relative_residual = std::sqrt(std::max(res2, 0.0) / xnorm2);
  return out;
}

template SepVector SepCompress(const SepVector &, const CompressionOptions &,
                               CompressionReport *);
template SepSparse SepCompress(const SepSparse &, const CompressionOptions &,
                               CompressionReport *);
template SepDense SepCompress(const SepDense &, const CompressionOptions &,
                              CompressionReport *);

}  // namespace pgdir
