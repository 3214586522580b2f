// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_SEPARATED_SOLVER_HPP
#define PGDIR_SEPARATED_SOLVER_HPP

#include <vector>
#include "pgdir/compression.hpp"
#include "pgdir/separated_tensor.hpp"

namespace pgdir
{

struct SolverOptions
{
  double tol = 1.0e-3;            // stop when beta_n / beta_1 < tol
  Index max_modes = 50;
  int max_sweeps = 50;            // alternating-direction sweeps per mode
  double stationarity_tol = 1.0e-4;
  // Compression of the running solution after every enrichment; a non-positive value
  // means tol / 10.
  double compress_tol = 0.0;
  bool compress = true;
  // Galerkin re-solve of all parametric factors on the current spatial modes after every
  // enrichment (alternating over parameters, at most update_sweeps passes).
  bool update = true;
  int update_sweeps = 10;
  // Record the discrete L2 residual ||A x - b|| / ||b|| over the grid after each mode.
  bool record_residual = false;
};

struct ModeLog
{
  double amplitude = 0.0;
  int sweeps = 0;
};

struct SolverReport
{
  std::vector<ModeLog> modes;
  std::vector<double> residual_history;
  Index final_terms = 0;
  bool converged = false;

  int TotalSweeps() const;
};

//
// Greedy parametric solve of A(mu) x(mu) = b(mu) with A(mu) symmetric positive definite
// at every grid node. Each mode is a rank-one Galerkin correction computed by alternating
// directions: one spatial linear system with the parametric factors fixed, then one
// nodewise diagonal problem per parameter, optionally followed by an update of every
// parametric factor with the spatial modes held fixed. Throws SingularSystem when a spatial system
// cannot be factorized.
//
template <typename M>
SepVector SepSolve(const SeparatedTensor<M> &A, const SepVector &b, const SolverOptions &options,
                   SolverReport *report = nullptr);

extern template SepVector SepSolve(const SepSparse &, const SepVector &, const SolverOptions &,
                                   SolverReport *);
extern template SepVector SepSolve(const SepDense &, const SepVector &, const SolverOptions &,
                                   SolverReport *);

// Relative discrete L2 residual ||A x - b|| / ||b|| over the grid, from factor-wise
// inner products.
template <typename M>
double SepResidual(const SeparatedTensor<M> &A, const SepVector &x, const SepVector &b);

extern template double SepResidual(const SepSparse &, const SepVector &, const SepVector &);
extern template double SepResidual(const SepDense &, const SepVector &, const SepVector &);

}  // namespace pgdir

#endif  // PGDIR_SEPARATED_SOLVER_HPP
