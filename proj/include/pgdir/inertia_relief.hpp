// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_INERTIA_RELIEF_HPP
#define PGDIR_INERTIA_RELIEF_HPP

#include <array>
#include <memory>
#include <vector>
#include <Eigen/Core>
#include "pgdir/fem.hpp"
#include "pgdir/mesh.hpp"

namespace pgdir
{

// Reference DOF set s. Column k of the rigid basis is pinned to the unit vector at
// dofs[k].
struct ReferenceSet
{
  std::array<Index, 6> dofs{};

  friend bool operator==(const ReferenceSet &, const ReferenceSet &) = default;
};

// 3-2-1 pattern: all three DOFs of node a, the two DOFs of node b transverse to the
// dominant axis of (b - a), and the DOF of node c that best resolves the rotation about
// the a-b line.
ReferenceSet ReferenceSet321(const Mesh &mesh, Index a, Index b, Index c);

// 3-2-1 pattern on three mutually distant, non-collinear nodes: a is the node farthest
// from the centroid, b the node farthest from a, c the node farthest from line a-b.
ReferenceSet DefaultReferenceSet(const Mesh &mesh);

// Partition of the DOFs into the free set l (ascending) and the reference set s.
class DofSplit
{
public:
  DofSplit(Index num_dofs, const ReferenceSet &reference);

  Index NumDofs() const { return static_cast<Index>(free_index_.size()); }
  Index NumFree() const { return static_cast<Index>(free_.size()); }
  const std::vector<Index> &Free() const { return free_; }
  const ReferenceSet &Reference() const { return reference_; }

  // Position of a global DOF in the free set, or -1 for reference DOFs.
  Index FreeIndex(Index dof) const { return free_index_[static_cast<std::size_t>(dof)]; }

  Eigen::VectorXd Restrict(const Eigen::VectorXd &full) const;
  Eigen::MatrixXd Restrict(const Eigen::MatrixXd &full) const;
  // Free-set vector to full length with zeros at s.
  Eigen::VectorXd Expand(const Eigen::VectorXd &free) const;
  Eigen::MatrixXd Expand(const Eigen::MatrixXd &free) const;

  SparseMatrix FreeBlock(const SparseMatrix &A) const;
  // Dense (n_l x 6) block A_ls.
  Eigen::MatrixXd CouplingBlock(const SparseMatrix &A) const;

private:
  ReferenceSet reference_;
  std::vector<Index> free_;
  std::vector<Index> free_index_;
};

//
// Sparse Cholesky factorization of K_ll, built once and reused for the rigid-mode
// right-hand sides and the static solve. Immutable after construction, so concurrent
// Solve() calls are safe.
//
class ReducedStiffness
{
public:
  // Throws InvalidReferenceSet if K_ll is not positive definite or its condition
  // estimate exceeds max_condition.
  ReducedStiffness(const SparseMatrix &K, const ReferenceSet &reference,
                   double max_condition = 1.0e14);
  ~ReducedStiffness();
  ReducedStiffness(ReducedStiffness &&) noexcept;
  ReducedStiffness &operator=(ReducedStiffness &&) noexcept;

  const DofSplit &Split() const { return split_; }
  double ConditionEstimate() const { return condition_; }

  // Solves K_ll X = B for free-set right-hand sides.
  Eigen::MatrixXd Solve(const Eigen::MatrixXd &B) const;
  Eigen::VectorXd Solve(const Eigen::VectorXd &b) const;

  // -K_ll^{-1} K_ls, i.e. the free rows of the rigid basis.
  Eigen::MatrixXd RigidModesFree() const;

private:
  struct Impl;
  DofSplit split_;
  std::unique_ptr<Impl> impl_;
  Eigen::MatrixXd coupling_;
  double condition_ = 0.0;
};

struct RigidBasis
{
  ReferenceSet reference;
  Eigen::MatrixXd phi;  // n_d x 6, identity at the reference rows
};

RigidBasis RigidBodyModes(const SparseMatrix &K, const ReferenceSet &reference);
RigidBasis RigidBodyModes(const ReducedStiffness &factor);

// alpha = (Phi^T M Phi)^{-1} Phi^T F. Throws SingularSystem for a singular reduced mass.
Vector6d IrAccelerations(const RigidBasis &basis, const SparseMatrix &M,
                         const Eigen::VectorXd &F);

struct IrSolution
{
  Eigen::VectorXd displacement;      // relative elastic displacement, zero at s
  Vector6d acceleration;             // rigid accelerations alpha
  Eigen::VectorXd equilibrated_load; // F - M Phi alpha
};

IrSolution IrSolve(const SparseMatrix &K, const SparseMatrix &M, const Eigen::VectorXd &F,
                   const ReferenceSet &reference);

}  // namespace pgdir

#endif  // PGDIR_INERTIA_RELIEF_HPP
