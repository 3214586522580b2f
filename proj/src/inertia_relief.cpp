// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/inertia_relief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <Eigen/SparseCholesky>
#include "pgdir/error.hpp"

namespace pgdir
{

ReferenceSet ReferenceSet321(const Mesh &mesh, Index a, Index b, Index c)
{
  for (Index n : {a, b, c})
  {
    if (n < 0 || n >= mesh.NumNodes())
    {
      throw InvalidReferenceSet("reference node " + std::to_string(n) + " outside the mesh");
    }
  }
  const Eigen::Vector3d d = mesh.Node(b) - mesh.Node(a);
  const Eigen::Vector3d r = mesh.Node(c) - mesh.Node(a);
  if (d.norm() == 0.0 || d.cross(r).norm() <= 1.0e-12 * d.norm() * r.norm())
  {
    throw InvalidReferenceSet("reference nodes are coincident or collinear");
  }

  int axis_b;
  d.cwiseAbs().maxCoeff(&axis_b);
  // Rigid rotation about the a-b line moves c along d x r.
  int axis_c;
  d.cross(r).cwiseAbs().maxCoeff(&axis_c);

  ReferenceSet s;
  s.dofs[0] = Dof(a, 0);
  s.dofs[1] = Dof(a, 1);
  s.dofs[2] = Dof(a, 2);
  int k = 3;
  for (int comp = 0; comp < 3; comp++)
  {
    if (comp != axis_b)
    {
      s.dofs[static_cast<std::size_t>(k++)] = Dof(b, comp);
    }
  }
  s.dofs[5] = Dof(c, axis_c);
  return s;
}

ReferenceSet DefaultReferenceSet(const Mesh &mesh)
{
  if (mesh.NumNodes() < 3)
  {
    throw InvalidReferenceSet("mesh needs at least three nodes for a reference set");
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto &x : mesh.Nodes())
  {
    centroid += x;
  }
  centroid /= static_cast<double>(mesh.NumNodes());

  auto argmax = [&](auto &&score)
  {
    Index best = 0;
    double best_v = -1.0;
    for (Index i = 0; i < mesh.NumNodes(); i++)
    {
      const double v = score(mesh.Node(i));
      if (v > best_v)
      {
        best_v = v;
        best = i;
      }
    }
    return best;
  };
  const Index a = argmax([&](const Eigen::Vector3d &x) { return (x - centroid).norm(); });
  const Index b = argmax([&](const Eigen::Vector3d &x) { return (x - mesh.Node(a)).norm(); });
  const Eigen::Vector3d u = (mesh.Node(b) - mesh.Node(a)).normalized();
  const Index c = argmax([&](const Eigen::Vector3d &x)
                         { return u.cross(x - mesh.Node(a)).norm(); });
  return ReferenceSet321(mesh, a, b, c);
}

DofSplit::DofSplit(Index num_dofs, const ReferenceSet &reference)
  : reference_(reference), free_index_(static_cast<std::size_t>(num_dofs), 0)
{
  std::set<Index> seen;
  for (Index d : reference.dofs)
  {
    if (d < 0 || d >= num_dofs)
    {
      throw InvalidReferenceSet("reference DOF " + std::to_string(d) + " outside [0, " +
                                std::to_string(num_dofs) + ")");
    }
    if (!seen.insert(d).second)
    {
      throw InvalidReferenceSet("reference DOF " + std::to_string(d) + " listed twice");
    }
    free_index_[static_cast<std::size_t>(d)] = -1;
  }
  free_.reserve(static_cast<std::size_t>(num_dofs - 6));
  for (Index i = 0; i < num_dofs; i++)
  {
    if (free_index_[static_cast<std::size_t>(i)] == 0)
    {
      free_index_[static_cast<std::size_t>(i)] = static_cast<Index>(free_.size());
      free_.push_back(i);
    }
  }
}

Eigen::VectorXd DofSplit::Restrict(const Eigen::VectorXd &full) const
{
  Eigen::VectorXd out(NumFree());
  for (Index k = 0; k < NumFree(); k++)
  {
    out(k) = full(free_[static_cast<std::size_t>(k)]);
  }
  return out;
}

Eigen::MatrixXd DofSplit::Restrict(const Eigen::MatrixXd &full) const
{
  Eigen::MatrixXd out(NumFree(), full.cols());
  for (Index k = 0; k < NumFree(); k++)
  {
    out.row(k) = full.row(free_[static_cast<std::size_t>(k)]);
  }
  return out;
}

Eigen::VectorXd DofSplit::Expand(const Eigen::VectorXd &free) const
{
  Eigen::VectorXd out = Eigen::VectorXd::Zero(NumDofs());
  for (Index k = 0; k < NumFree(); k++)
  {
    out(free_[static_cast<std::size_t>(k)]) = free(k);
  }
  return out;
}

Eigen::MatrixXd DofSplit::Expand(const Eigen::MatrixXd &free) const
{
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(NumDofs(), free.cols());
  for (Index k = 0; k < NumFree(); k++)
  {
    out.row(free_[static_cast<std::size_t>(k)]) = free.row(k);
  }
  return out;
}

SparseMatrix DofSplit::FreeBlock(const SparseMatrix &A) const
{
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(A.nonZeros()));
  for (Index j = 0; j < A.outerSize(); j++)
  {
    const Index fj = FreeIndex(j);
    if (fj < 0)
    {
      continue;
    }
    for (SparseMatrix::InnerIterator it(A, j); it; ++it)
    {
      const Index fi = FreeIndex(it.row());
      if (fi >= 0)
      {
        triplets.emplace_back(fi, fj, it.value());
      }
    }
  }
  SparseMatrix out(NumFree(), NumFree());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

Eigen::MatrixXd DofSplit::CouplingBlock(const SparseMatrix &A) const
{
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(NumFree(), 6);
  for (int k = 0; k < 6; k++)
  {
    for (SparseMatrix::InnerIterator it(A, reference_.dofs[static_cast<std::size_t>(k)]); it;
         ++it)
    {
      const Index fi = FreeIndex(it.row());
      if (fi >= 0)
      {
        out(fi, k) = it.value();
      }
    }
  }
  return out;
}

struct ReducedStiffness::Impl
{
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

ReducedStiffness::ReducedStiffness(const SparseMatrix &K, const ReferenceSet &reference,
                                   double max_condition)
  : split_(K.rows(), reference), impl_(std::make_unique<Impl>())
{
  if (K.rows() != K.cols())
  {
    throw ShapeError("stiffness matrix must be square");
  }
  const SparseMatrix Kll = split_.FreeBlock(K);
  impl_->ldlt.compute(Kll);
  if (impl_->ldlt.info() != Eigen::Success)
  {
    throw InvalidReferenceSet("invalid reference set: factorization of K_ll failed");
  }
  const Eigen::VectorXd D = impl_->ldlt.vectorD();
  const double dmin = D.minCoeff(), dmax = D.cwiseAbs().maxCoeff();
  condition_ = (dmin > 0.0) ? dmax / dmin : std::numeric_limits<double>::infinity();
  if (!(dmin > 0.0) || condition_ > max_condition)
  {
    std::ostringstream msg;
    msg << "invalid reference set: K_ll is singular or near-singular (condition estimate "
        << condition_ << ")";
    throw InvalidReferenceSet(msg.str());
  }
  coupling_ = split_.CouplingBlock(K);
}

ReducedStiffness::~ReducedStiffness() = default;
ReducedStiffness::ReducedStiffness(ReducedStiffness &&) noexcept = default;
ReducedStiffness &ReducedStiffness::operator=(ReducedStiffness &&) noexcept = default;

Eigen::MatrixXd ReducedStiffness::Solve(const Eigen::MatrixXd &B) const
{
  return impl_->ldlt.solve(B);
}

Eigen::VectorXd ReducedStiffness::Solve(const Eigen::VectorXd &b) const
{
  return impl_->ldlt.solve(b);
}

Eigen::MatrixXd ReducedStiffness::RigidModesFree() const
{
  return -Solve(coupling_);
}

RigidBasis RigidBodyModes(const ReducedStiffness &factor)
{
  const DofSplit &split = factor.Split();
  RigidBasis basis;
  basis.reference = split.Reference();
  basis.phi = split.Expand(factor.RigidModesFree());
  for (int k = 0; k < 6; k++)
  {
    basis.phi(basis.reference.dofs[static_cast<std::size_t>(k)], k) = 1.0;
  }
  return basis;
}

RigidBasis RigidBodyModes(const SparseMatrix &K, const ReferenceSet &reference)
{
  return RigidBodyModes(ReducedStiffness(K, reference));
}

Vector6d IrAccelerations(const RigidBasis &basis, const SparseMatrix &M,
                         const Eigen::VectorXd &F)
{
  if (M.rows() != basis.phi.rows() || F.size() != basis.phi.rows())
  {
    throw ShapeError("IR accelerations: mass matrix, load and rigid basis sizes differ");
  }
  const Eigen::MatrixXd MPhi = M * basis.phi;
  const Matrix6d reduced_mass = basis.phi.transpose() * MPhi;
  const Vector6d reduced_load = basis.phi.transpose() * F;
  Eigen::LLT<Matrix6d> llt(reduced_mass);
  if (llt.info() != Eigen::Success || !(reduced_mass.diagonal().minCoeff() > 0.0))
  {
    throw SingularSystem("reduced 6x6 mass matrix is singular (zero-density model?)");
  }
  return llt.solve(reduced_load);
}

IrSolution IrSolve(const SparseMatrix &K, const SparseMatrix &M, const Eigen::VectorXd &F,
                   const ReferenceSet &reference)
{
  const ReducedStiffness factor(K, reference);
  const RigidBasis basis = RigidBodyModes(factor);
  IrSolution sol;
  sol.acceleration = IrAccelerations(basis, M, F);
  sol.equilibrated_load = F - M * (basis.phi * sol.acceleration);
  const DofSplit &split = factor.Split();
  sol.displacement = split.Expand(factor.Solve(split.Restrict(sol.equilibrated_load)));
  return sol;
}

}  // namespace pgdir
