// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/separated_solver.hpp"

#include <cmath>
#include <memory>
#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

namespace pgdir
{

namespace
{

using Eigen::VectorXd;

// Factorizes the Galerkin-weighted spatial operator. The sparsity pattern of the
// weighted sum never changes, so the symbolic analysis is done once.
template <typename M>
class SpatialSolver;

template <>
class SpatialSolver<SparseMatrix>
{
public:
  VectorXd Solve(const SparseMatrix &A, const VectorXd &r)
  {
    if (!analyzed_)
    {
      llt_.analyzePattern(A);
      analyzed_ = true;
    }
    llt_.factorize(A);
    if (llt_.info() != Eigen::Success)
    {
      throw SingularSystem("separated solve: spatial system is not positive definite");
    }
    return llt_.solve(r);
  }

private:
  Eigen::SimplicialLLT<SparseMatrix> llt_;
  bool analyzed_ = false;
};

template <>
class SpatialSolver<Eigen::MatrixXd>
{
public:
  VectorXd Solve(const Eigen::MatrixXd &A, const VectorXd &r)
  {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
    {
      throw SingularSystem("separated solve: spatial system is not positive definite");
    }
    return llt.solve(r);
  }
};

// Parametric factor products shared by the spatial and parametric steps.
double WeightedDot(const VectorXd &a, const VectorXd &b, const VectorXd &c)
{
  return (a.array() * b.array() * c.array()).sum();
}

// Galerkin update of a rank-m solution: alternates over the parameters (for parameter j
// the system decouples over the nodes of axis j into one m x m solve per node) and over
// the spatial modes (one sparse solve per mode, block Gauss-Seidel). Term order is kept.
template <typename M>
SepVector UpdateFactors(const SeparatedTensor<M> &A, const SepVector &b, const SepVector &x,
                        const SolverOptions &options, SpatialSolver<M> &spatial_solver)
{
  const GridPtr &grid = x.Grid();
  const int np = grid->NumParams();
  const auto NP = static_cast<std::size_t>(np);
  const Index n = x.Rows();
  const Index m = x.NumTerms();
  const auto &At = A.Terms();
  const auto &bt = b.Terms();
  const std::size_t NA = At.size(), Nb = bt.size();

  Eigen::MatrixXd S(n, m);
  std::vector<Eigen::MatrixXd> Q(NP);
  for (int j = 0; j < np; j++)
  {
    Q[static_cast<std::size_t>(j)].resize(grid->Size(j), m);
  }
  for (Index i = 0; i < m; i++)
  {
    const auto &t = x.GetTerm(i);
    S.col(i) = t.spatial;
    for (std::size_t j = 0; j < NP; j++)
    {
      Q[j].col(i) = (j == 0 ? t.amplitude : 1.0) * t.factors[j];
    }
  }
  std::vector<Eigen::MatrixXd> AS(NA);
  for (std::size_t a = 0; a < NA; a++)
  {
    AS[a] = At[a].spatial * S;
  }

  // Parametric Gram factors of the operator and right-hand side terms, all parameters
  // except `skip` (-1 keeps all).
  auto operator_weights = [&](std::size_t a, int skip)
  {
    Eigen::MatrixXd h = Eigen::MatrixXd::Constant(m, m, At[a].amplitude);
    for (std::size_t l = 0; l < NP; l++)
    {
      if (static_cast<int>(l) != skip)
      {
        h = h.cwiseProduct(Q[l].transpose() * At[a].factors[l].asDiagonal() * Q[l]);
      }
    }
    return h;
  };
  auto load_weights = [&](std::size_t k, int skip)
  {
    VectorXd v = VectorXd::Constant(m, bt[k].amplitude);
    for (std::size_t l = 0; l < NP; l++)
    {
      if (static_cast<int>(l) != skip)
      {
        v = v.cwiseProduct(Q[l].transpose() * bt[k].factors[l]);
      }
    }
    return v;
  };

  SepVector previous = x;
  for (int it = 0; it < options.update_sweeps; it++)
  {
    const Eigen::MatrixXd S_old = S;
    const std::vector<Eigen::MatrixXd> Q_old = Q;

    for (int j = 0; j < np; j++)
    {
      const auto J = static_cast<std::size_t>(j);
      std::vector<Eigen::MatrixXd> H(NA);
      for (std::size_t a = 0; a < NA; a++)
      {
        H[a] = (S.transpose() * AS[a]).cwiseProduct(operator_weights(a, j));
      }
      std::vector<VectorXd> h(Nb);
      for (std::size_t k = 0; k < Nb; k++)
      {
        h[k] = (S.transpose() * bt[k].spatial).cwiseProduct(load_weights(k, j));
      }
      for (Index p = 0; p < grid->Size(j); p++)
      {
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
        VectorXd r = VectorXd::Zero(m);
        for (std::size_t a = 0; a < NA; a++)
        {
          const double w = At[a].factors[J](p);
          if (w != 0.0)
          {
            L += w * H[a];
          }
        }
        for (std::size_t k = 0; k < Nb; k++)
        {
          const double w = bt[k].factors[J](p);
          if (w != 0.0)
          {
            r += w * h[k];
          }
        }
        L = 0.5 * (L + L.transpose());
        L.diagonal().array() += 1.0e-14 * std::max(L.diagonal().cwiseAbs().maxCoeff(), 1.0e-300);
        const VectorXd qp = Eigen::LDLT<Eigen::MatrixXd>(L).solve(r);
        if (!qp.allFinite())
        {
          return previous;
        }
        Q[J].row(p) = qp.transpose();
      }
    }

    // Spatial modes one at a time, the others and all parametric factors fixed.
    std::vector<Eigen::MatrixXd> C(NA);
    for (std::size_t a = 0; a < NA; a++)
    {
      C[a] = operator_weights(a, -1);
    }
    Eigen::MatrixXd B(n, static_cast<Index>(Nb));
    for (std::size_t k = 0; k < Nb; k++)
    {
      B.col(static_cast<Index>(k)) = bt[k].spatial;
    }
    Eigen::MatrixXd Wb(static_cast<Index>(Nb), m);
    for (std::size_t k = 0; k < Nb; k++)
    {
      Wb.row(static_cast<Index>(k)) = load_weights(k, -1).transpose();
    }
    for (Index i = 0; i < m; i++)
    {
      M Ahat = SpatialZero<M>(n, n);
      VectorXd r = B * Wb.col(i);
      for (std::size_t a = 0; a < NA; a++)
      {
        SpatialAxpy(Ahat, C[a](i, i), At[a].spatial);
        VectorXd c = C[a].row(i).transpose();
        c(i) = 0.0;
        r -= AS[a] * c;
      }
      VectorXd si = spatial_solver.Solve(Ahat, r);
      const double sn = si.norm();
      if (!(sn > 0.0) || !std::isfinite(sn))
      {
        return previous;
      }
      S.col(i) = si / sn;
      Q[0].col(i) *= sn;
      for (std::size_t a = 0; a < NA; a++)
      {
        AS[a].col(i) = At[a].spatial * S.col(i);
      }
      for (std::size_t a = 0; a < NA; a++)
      {
        C[a] = operator_weights(a, -1);
      }
    }

    SepVector current(grid, n);
    for (Index i = 0; i < m; i++)
    {
      std::vector<VectorXd> f;
      for (std::size_t j = 0; j < NP; j++)
      {
        f.push_back(Q[j].col(i));
      }
      current.AddTerm(1.0, S.col(i), std::move(f));
    }
    const double change = SepNorm(SepAdd(current, previous.Scaled(-1.0)));
    const double size = SepNorm(current);
    previous = std::move(current);
    if (!(size > 0.0) || change < options.stationarity_tol * size)
    {
      break;
    }
  }
  return previous;
}

// Grid node with the largest Euclidean residual b - A x, all nodes evaluated at once.
constexpr Index kScanLimit = 50'000'000;

template <typename M>
std::vector<Index> WorstNode(const SeparatedTensor<M> &A, const SepVector &b, const SepVector &x,
                             const std::vector<std::vector<VectorXd>> &Ax)
{
  const ParametricGrid &grid = *b.Grid();
  const Index P = grid.TotalNodes();
  const Index n = b.Rows();
  const std::size_t NA = A.Terms().size(), Nx = x.Terms().size(), Nb = b.Terms().size();
  const auto cols = static_cast<Index>(Nb + NA * Nx);
  Eigen::MatrixXd V(n, cols), Wt(cols, P);
  for (Index f = 0; f < P; f++)
  {
    const std::vector<Index> node = grid.NodeOf(f);
    Index c = 0;
    for (std::size_t k = 0; k < Nb; k++, c++)
    {
      Wt(c, f) = b.GetTerm(static_cast<Index>(k)).amplitude *
                 b.ParametricWeight(static_cast<Index>(k), node);
    }
    for (std::size_t a = 0; a < NA; a++)
    {
      const double wa = A.GetTerm(static_cast<Index>(a)).amplitude *
                        A.ParametricWeight(static_cast<Index>(a), node);
      for (std::size_t m = 0; m < Nx; m++, c++)
      {
        Wt(c, f) = -wa * x.GetTerm(static_cast<Index>(m)).amplitude *
                   x.ParametricWeight(static_cast<Index>(m), node);
      }
    }
  }
  Index c = 0;
  for (std::size_t k = 0; k < Nb; k++, c++)
  {
    V.col(c) = b.GetTerm(static_cast<Index>(k)).spatial;
  }
  for (std::size_t a = 0; a < NA; a++)
  {
    for (std::size_t m = 0; m < Nx; m++, c++)
    {
      V.col(c) = Ax[a][m];
    }
  }
  Index worst = 0;
  (V * Wt).colwise().squaredNorm().maxCoeff(&worst);
  return grid.NodeOf(worst);
}

}  // namespace

int SolverReport::TotalSweeps() const
{
  int n = 0;
  for (const auto &m : modes)
  {
    n += m.sweeps;
  }
  return n;
}

template <typename M>
double SepResidual(const SeparatedTensor<M> &A, const SepVector &x, const SepVector &b)
{
  const double bn = SepNorm(b);
  SepVector r = SepAdd(b, SepMatVec(A, x).Scaled(-1.0));
  const double rn = SepNorm(r);
  return bn > 0.0 ? rn / bn : rn;
}

template <typename M>
SepVector SepSolve(const SeparatedTensor<M> &A, const SepVector &b, const SolverOptions &options,
                   SolverReport *report)
{
  SolverReport local;
  SolverReport &rep = report ? *report : local;
  rep = SolverReport{};

  if (A.Rows() != A.Cols() || A.Cols() != b.Rows())
  {
    throw ShapeError("sep_solve: operator is " + std::to_string(A.Rows()) + "x" +
                     std::to_string(A.Cols()) + ", right-hand side has " +
                     std::to_string(b.Rows()) + " rows");
  }
  if (!(A.Grid() == b.Grid() || *A.Grid() == *b.Grid()))
  {
    throw ShapeError("sep_solve: operator and right-hand side use different grids");
  }
  if (A.NumTerms() == 0)
  {
    throw SingularSystem("sep_solve: operator has no terms");
  }

  const GridPtr &grid = b.Grid();
  const int np = grid->NumParams();
  const Index n = b.Rows();
  const auto &At = A.Terms();
  const auto &bt = b.Terms();
  const std::size_t NA = At.size(), Nb = bt.size();

  SepVector x(grid, n);
  if (!(SepNorm(b) > 0.0))
  {
    rep.converged = true;
    return x;
  }

  CompressionOptions copt;
  copt.tol = options.compress_tol > 0.0 ? options.compress_tol : options.tol / 10.0;

  SpatialSolver<M> spatial_solver;
  const std::vector<Index> mid = grid->MidpointNode();
  double beta1 = 0.0;

  for (Index mode = 0; mode < options.max_modes; mode++)
  {
    const auto &xt = x.Terms();
    const std::size_t Nx = xt.size();

    // A_a x_m for the current solution terms.
    std::vector<std::vector<VectorXd>> Ax(NA, std::vector<VectorXd>(Nx));
    for (std::size_t a = 0; a < NA; a++)
    {
      for (std::size_t m = 0; m < Nx; m++)
      {
        Ax[a][m] = At[a].spatial * xt[m].spatial;
      }
    }

    // Initial factors: residual at the grid node where it is largest (the midpoint on
    // grids too large to scan), parametric factors concentrated on that node.
    auto residual_at = [&](std::span<const Index> node)
    {
      VectorXd r = VectorXd::Zero(n);
      for (std::size_t k = 0; k < Nb; k++)
      {
        r += bt[k].amplitude * b.ParametricWeight(static_cast<Index>(k), node) * bt[k].spatial;
      }
      for (std::size_t a = 0; a < NA; a++)
      {
        const double wa = At[a].amplitude * A.ParametricWeight(static_cast<Index>(a), node);
        for (std::size_t m = 0; m < Nx; m++)
        {
          r -= wa * xt[m].amplitude * x.ParametricWeight(static_cast<Index>(m), node) * Ax[a][m];
        }
      }
      return r;
    };
    std::vector<Index> start = mid;
    if (Nx > 0 && grid->TotalNodes() * n <= kScanLimit)
    {
      start = WorstNode(A, b, x, Ax);
    }
    VectorXd s = residual_at(start);
    if (!(s.norm() > 0.0))
    {
      s = VectorXd::Ones(n);
    }
    s /= s.norm();
    std::vector<VectorXd> q(static_cast<std::size_t>(np));
    for (int j = 0; j < np; j++)
    {
      q[static_cast<std::size_t>(j)] = VectorXd::Unit(grid->Size(j), start[static_cast<std::size_t>(j)]);
    }

    int sweeps = 0;
    for (int sweep = 0; sweep < options.max_sweeps; sweep++)
    {
      sweeps++;
      const VectorXd s_old = s;
      const std::vector<VectorXd> q_old = q;

      // Spatial step.
      M Ahat = SpatialZero<M>(n, n);
      VectorXd r = VectorXd::Zero(n);
      for (std::size_t a = 0; a < NA; a++)
      {
        double w = At[a].amplitude;
        for (std::size_t l = 0; l < static_cast<std::size_t>(np); l++)
        {
          w *= WeightedDot(At[a].factors[l], q[l], q[l]);
        }
        SpatialAxpy(Ahat, w, At[a].spatial);
        for (std::size_t m = 0; m < Nx; m++)
        {
          double wx = At[a].amplitude * xt[m].amplitude;
          for (std::size_t l = 0; l < static_cast<std::size_t>(np); l++)
          {
            wx *= WeightedDot(At[a].factors[l], xt[m].factors[l], q[l]);
          }
          r -= wx * Ax[a][m];
        }
      }
      for (std::size_t k = 0; k < Nb; k++)
      {
        double w = bt[k].amplitude;
        for (std::size_t l = 0; l < static_cast<std::size_t>(np); l++)
        {
          w *= bt[k].factors[l].dot(q[l]);
        }
        r += w * bt[k].spatial;
      }
      s = spatial_solver.Solve(Ahat, r);

      // Parametric steps.
      std::vector<double> sAs(NA), sb(Nb);
      std::vector<std::vector<double>> sAx(NA, std::vector<double>(Nx));
      for (std::size_t a = 0; a < NA; a++)
      {
        sAs[a] = s.dot(At[a].spatial * s);
        for (std::size_t m = 0; m < Nx; m++)
        {
          sAx[a][m] = s.dot(Ax[a][m]);
        }
      }
      for (std::size_t k = 0; k < Nb; k++)
      {
        sb[k] = s.dot(bt[k].spatial);
      }
      for (int j = 0; j < np; j++)
      {
        const auto J = static_cast<std::size_t>(j);
        VectorXd lhs = VectorXd::Zero(grid->Size(j));
        VectorXd rhs = VectorXd::Zero(grid->Size(j));
        for (std::size_t a = 0; a < NA; a++)
        {
          double w = At[a].amplitude * sAs[a];
          for (std::size_t l = 0; l < static_cast<std::size_t>(np); l++)
          {
            if (l != J)
            {
              w *= WeightedDot(At[a].factors[l], q[l], q[l]);
            }
          }
          lhs += w * At[a].factors[J];
        }
        for (std::size_t k = 0; k < Nb; k++)
        {
          double w = bt[k].amplitude * sb[k];
          for (std::size_t l = 0; l < static_cast<std::size_t>(np); l++)
          {
            if (l != J)
            {
              w *= bt[k].factors[l].dot(q[l]);
            }
          }
          rhs += w * bt[k].factors[J];
        }
        for (std::size_t a = 0; a < NA; a++)
        {
          for (std::size_t m = 0; m < Nx; m++)
          {
            double w = At[a].amplitude * xt[m].amplitude * sAx[a][m];
            for (std::size_t l = 0; l < static_cast<std::size_t>(np); l++)
            {
              if (l != J)
              {
                w *= WeightedDot(At[a].factors[l], xt[m].factors[l], q[l]);
              }
            }
            rhs -= w * At[a].factors[J].cwiseProduct(xt[m].factors[J]);
          }
        }
        if (!(lhs.minCoeff() > 0.0))
        {
          throw SingularSystem("sep_solve: parametric operator is not positive along parameter '" +
                               grid->Axis(j).name + "'");
        }
        VectorXd qj = rhs.cwiseQuotient(lhs);
        const double qn = qj.norm();
        if (!(qn > 0.0))
        {
          // The residual is orthogonal to s along this direction; keep the old factor.
          continue;
        }
        q[J] = qj / qn;
        // The rank-one term keeps its magnitude in s.
        s *= qn;
        for (std::size_t a = 0; a < NA; a++)
        {
          sAs[a] *= qn * qn;
          for (std::size_t m = 0; m < Nx; m++)
          {
            sAx[a][m] *= qn;
          }
        }
        for (std::size_t k = 0; k < Nb; k++)
        {
          sb[k] *= qn;
        }
      }

      // Relative change of the rank-one term s (x) q between sweeps.
      double overlap = s.dot(s_old);
      for (int j = 0; j < np; j++)
      {
        overlap *= q[static_cast<std::size_t>(j)].dot(q_old[static_cast<std::size_t>(j)]);
      }
      const double nn = s.squaredNorm(), no = s_old.squaredNorm();
      const double change2 = std::max(0.0, nn + no - 2.0 * overlap);
      if (!(nn > 0.0) || std::sqrt(change2 / nn) < options.stationarity_tol)
      {
        break;
      }
    }

    double beta = s.norm();
    if (!(beta > 0.0))
    {
      rep.modes.push_back({beta, sweeps});
      rep.converged = true;
      break;
    }
    x.AddTerm(beta, s / beta, q);
    if (options.update && x.NumTerms() > 1)
    {
      // With the update every term moves, so the amplitude of enrichment n is the norm of
      // the increment x_n - x_{n-1}.
      const SepVector before = x.Truncated(x.NumTerms() - 1);
      x = UpdateFactors(A, b, x, options, spatial_solver).Normalized();
      beta = SepNorm(SepAdd(x, before.Scaled(-1.0)));
    }
    rep.modes.push_back({beta, sweeps});
    if (mode == 0)
    {
      beta1 = beta;
    }
    if (options.compress && x.NumTerms() > 1)
    {
      x = SepCompress(x, copt);
    }
    if (options.record_residual)
    {
      rep.residual_history.push_back(SepResidual(A, x, b));
    }
    if (beta / beta1 < options.tol)
    {
      rep.converged = true;
      break;
    }
  }
  rep.final_terms = x.NumTerms();
  return x;
}

template SepVector SepSolve(const SepSparse &, const SepVector &, const SolverOptions &,
                            SolverReport *);
template SepVector SepSolve(const SepDense &, const SepVector &, const SolverOptions &,
                            SolverReport *);
template double SepResidual(const SepSparse &, const SepVector &, const SepVector &);
template double SepResidual(const SepDense &, const SepVector &, const SepVector &);

}  // namespace pgdir
