// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_FEM_HPP
#define PGDIR_FEM_HPP

#include <span>
#include <Eigen/Core>
#include <Eigen/SparseCore>
#include "pgdir/mesh.hpp"

namespace pgdir
{

// Global matrices use full (both triangles) column-major storage. Assembly produces
// bitwise symmetric values and the same sparsity pattern for every mesh with identical
// connectivity, whatever the materials or scale factors (zero contributions are kept as
// structural entries).
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using StrainDisplacement = Eigen::Matrix<double, 6, 12>;
using ElementMatrix = Eigen::Matrix<double, 12, 12>;

// Voigt ordering (xx, yy, zz, xy, xz, yz) with engineering shear strains.
Matrix6d ElasticityMatrix(const Material &material);

// Constant strain-displacement matrix of a linear tetrahedron. Local DOF ordering is
// node-major, (x, y, z) within node.
StrainDisplacement TetStrainDisplacement(const std::array<Eigen::Vector3d, 4> &x);

// V * B^T D B (exact for linear tetrahedra).
ElementMatrix TetStiffness(const std::array<Eigen::Vector3d, 4> &x, const Matrix6d &D);

// Consistent mass rho * int N^T N: rho V / 20 * (1 + delta_ab) per component.
ElementMatrix TetMass(const std::array<Eigen::Vector3d, 4> &x, double density);

// Optional per-subdomain multipliers applied to the elemental matrices (empty span means
// all ones). A zero multiplier keeps the sparsity pattern but contributes nothing.
SparseMatrix AssembleStiffness(const Mesh &mesh, std::span<const Material> materials,
                               std::span<const double> subdomain_scale = {});
SparseMatrix AssembleMass(const Mesh &mesh, std::span<const Material> materials,
                          std::span<const double> subdomain_scale = {});
Eigen::VectorXd AssembleForce(const Mesh &mesh, std::span<const PointLoad> loads);

// Per-element von Mises stress of the constant-strain field B U_e.
Eigen::VectorXd VonMises(const Mesh &mesh, std::span<const Material> materials,
                         const Eigen::VectorXd &U);

double VonMisesInvariant(const Vector6d &stress);

// Global DOF index of component c of node i.
inline Index Dof(Index node, int component)
{
  return 3 * node + component;
}

}  // namespace pgdir

#endif  // PGDIR_FEM_HPP
