// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_CASCADE_HPP
#define PGDIR_CASCADE_HPP

#include <filesystem>
#include <vector>
#include "pgdir/inertia_relief.hpp"
#include "pgdir/separated_solver.hpp"
#include "pgdir/tensor_io.hpp"

namespace pgdir
{

struct CascadeOptions
{
  double tol = 1.0e-3;           // final displacement solve
  Index max_modes = 40;
  // Per-step settings; non-positive values mean tol / 10.
  double rigid_tol = 0.0;        // rigid-mode column solves
  double accel_tol = 0.0;        // 6 x 6 acceleration solve
  double product_tol = 0.0;      // compression after products and additions
  double solution_tol = 0.0;     // compression of the running displacement after each mode
  Index step_max_modes = 60;
  int max_sweeps = 50;
  double stationarity_tol = 1.0e-4;
  // Material-only parameters: rigid modes (and accelerations, when M and F are constant)
  // computed once without PGD.
  bool material_only = false;
  bool force_general_path = false;

  double RigidTol() const { return rigid_tol > 0.0 ? rigid_tol : tol / 10.0; }
  double AccelTol() const { return accel_tol > 0.0 ? accel_tol : tol / 10.0; }
  double ProductTol() const { return product_tol > 0.0 ? product_tol : tol / 10.0; }
  double SolutionTol() const { return solution_tol > 0.0 ? solution_tol : tol / 10.0; }
};

struct StepLog
{
  std::vector<ModeLog> modes;
  Index terms = 0;
  bool converged = true;
};

struct BuildLog
{
  std::vector<ModeLog> modes;        // displacement solve, one entry per enrichment
  std::vector<StepLog> rigid_columns;
  StepLog accelerations;
  Index phi_terms = 0;
  Index rhs_terms = 0;
  Index k_terms = 0;
  Index m_terms = 0;
  bool converged = false;
  bool fast_path = false;
  double tol = 0.0;
  double wall_seconds = 0.0;         // reported, never persisted

  int TotalSweeps() const;
};

// Separated displacement field U(mu) with its build metadata.
struct Vademecum
{
  SepVector U;
  ReferenceSet reference;
  BuildLog log;
  Json metadata = Json::object();    // fixture name, probes, objective spec

  Index NumModes() const { return U.NumTerms(); }
  std::vector<double> Amplitudes() const;
};

struct CascadeResult
{
  Vademecum vademecum;
  SepDense phi;     // n_d x 6 rigid modes
  SepVector alpha;  // 6 rigid accelerations
  SepVector rhs;    // equilibrated load F - M Phi alpha
};

// Step 1: K_ll(mu) Phi_l(mu) = -K_ls(mu) column by column, with Phi_s = I.
SepDense ParametricRigidModes(const SepSparse &K, const ReferenceSet &reference,
                              const CascadeOptions &options, std::vector<StepLog> *log = nullptr);

// Step 2: (Phi^T M Phi)(mu) alpha(mu) = (Phi^T F)(mu) as a separated solve.
SepVector ParametricAccelerations(const SepDense &phi, const SepSparse &M, const SepVector &F,
                                  const CascadeOptions &options, StepLog *log = nullptr);

// Full cascade, step 3 being K_ll(mu) U_l(mu) = (F - M Phi alpha)_l(mu), U_s = 0.
CascadeResult BuildVademecum(const SepSparse &K, const SepSparse &M, const SepVector &F,
                             const ReferenceSet &reference, const CascadeOptions &options);

// Container {format, format_version, reference_dofs, build_log, metadata, tensor}.
Json VademecumToJson(const Vademecum &v);
Vademecum VademecumFromJson(const Json &j);
void WriteVademecum(const Vademecum &v, const std::filesystem::path &path);
Vademecum ReadVademecum(const std::filesystem::path &path);

Json BuildLogToJson(const BuildLog &log, bool with_timing);

}  // namespace pgdir

#endif  // PGDIR_CASCADE_HPP
