// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/fem.hpp"

#include <cmath>
#include <string>
#include <vector>
#include <Eigen/LU>
#include "pgdir/error.hpp"

namespace pgdir
{

Matrix6d ElasticityMatrix(const Material &material)
{
  const double E = material.young_modulus, nu = material.poisson_ratio;
  const double c = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  Matrix6d D = Matrix6d::Zero();
  for (int i = 0; i < 3; i++)
  {
    for (int j = 0; j < 3; j++)
    {
      D(i, j) = c * (i == j ? 1.0 - nu : nu);
    }
    D(3 + i, 3 + i) = c * 0.5 * (1.0 - 2.0 * nu);
  }
  return D;
}

StrainDisplacement TetStrainDisplacement(const std::array<Eigen::Vector3d, 4> &x)
{
  // Shape function gradients: rows of J^{-T} applied to the reference gradients, with
  // J = [x1-x0, x2-x0, x3-x0].
  Eigen::Matrix3d J;
  J.col(0) = x[1] - x[0];
  J.col(1) = x[2] - x[0];
  J.col(2) = x[3] - x[0];
  const Eigen::Matrix3d Jinv = J.inverse();
  Eigen::Matrix<double, 4, 3> grad;
  grad.row(1) = Jinv.row(0);
  grad.row(2) = Jinv.row(1);
  grad.row(3) = Jinv.row(2);
  grad.row(0) = -(grad.row(1) + grad.row(2) + grad.row(3));

  StrainDisplacement B = StrainDisplacement::Zero();
  for (int a = 0; a < 4; a++)
  {
    const double dx = grad(a, 0), dy = grad(a, 1), dz = grad(a, 2);
    const int c = 3 * a;
    B(0, c + 0) = dx;
    B(1, c + 1) = dy;
    B(2, c + 2) = dz;
    B(3, c + 0) = dy;
    B(3, c + 1) = dx;
    B(4, c + 0) = dz;
    B(4, c + 2) = dx;
    B(5, c + 1) = dz;
    B(5, c + 2) = dy;
  }
  return B;
}

ElementMatrix TetStiffness(const std::array<Eigen::Vector3d, 4> &x, const Matrix6d &D)
{
  const double V = TetSignedVolume(x);
  const StrainDisplacement B = TetStrainDisplacement(x);
  ElementMatrix Ke = V * (B.transpose() * D * B);
  // Exact symmetry of the elemental matrix carries over to the assembled one.
  return 0.5 * (Ke + Ke.transpose()).eval();
}

ElementMatrix TetMass(const std::array<Eigen::Vector3d, 4> &x, double density)
{
  const double m = density * TetSignedVolume(x) / 20.0;
  ElementMatrix Me = ElementMatrix::Zero();
  for (int a = 0; a < 4; a++)
  {
    for (int b = 0; b < 4; b++)
    {
      const double v = (a == b) ? 2.0 * m : m;
      for (int c = 0; c < 3; c++)
      {
        Me(3 * a + c, 3 * b + c) = v;
      }
    }
  }
  return Me;
}

namespace
{

void CheckMaterials(const Mesh &mesh, std::span<const Material> materials,
                    std::span<const double> scale)
{
  if (static_cast<int>(materials.size()) != mesh.NumSubdomains())
  {
    throw AssemblyError("assembly: mesh has " + std::to_string(mesh.NumSubdomains()) +
                        " subdomains but " + std::to_string(materials.size()) +
                        " materials were given");
  }
  for (const auto &m : materials)
  {
    m.Validate();
  }
  if (!scale.empty() && static_cast<int>(scale.size()) != mesh.NumSubdomains())
  {
    throw AssemblyError("assembly: subdomain scale has " + std::to_string(scale.size()) +
                        " entries, expected " + std::to_string(mesh.NumSubdomains()));
  }
}

void CheckElement(const Mesh &mesh, Index e)
{
  const double v = mesh.SignedVolume(e);
  if (!(v > mesh.VolumeTolerance()))
  {
    throw AssemblyError("assembly: element " + std::to_string(e) +
                        " is degenerate (volume " + std::to_string(v) + ")");
  }
}

template <typename ElementFn>
SparseMatrix Assemble(const Mesh &mesh, ElementFn &&element_matrix)
{
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.NumElements()) * 144);
  for (Index e = 0; e < mesh.NumElements(); e++)
  {
    CheckElement(mesh, e);
    const ElementMatrix Ke = element_matrix(e);
    const Tet &t = mesh.Element(e);
    for (int a = 0; a < 4; a++)
    {
      for (int i = 0; i < 3; i++)
      {
        const Index row = Dof(t[a], i);
        for (int b = 0; b < 4; b++)
        {
          for (int j = 0; j < 3; j++)
          {
            triplets.emplace_back(row, Dof(t[b], j), Ke(3 * a + i, 3 * b + j));
          }
        }
      }
    }
  }
  SparseMatrix K(mesh.NumDofs(), mesh.NumDofs());
  K.setFromTriplets(triplets.begin(), triplets.end());
  K.makeCompressed();
  return K;
}

}  // namespace

SparseMatrix AssembleStiffness(const Mesh &mesh, std::span<const Material> materials,
                               std::span<const double> subdomain_scale)
{
  CheckMaterials(mesh, materials, subdomain_scale);
  std::vector<Matrix6d> D;
  for (const auto &m : materials)
  {
    D.push_back(ElasticityMatrix(m));
  }
  return Assemble(mesh,
                  [&](Index e)
                  {
                    const int sub = mesh.Subdomain(e);
                    ElementMatrix Ke = TetStiffness(mesh.ElementCoordinates(e),
                                                    D[static_cast<std::size_t>(sub)]);
                    if (!subdomain_scale.empty())
                    {
                      Ke *= subdomain_scale[static_cast<std::size_t>(sub)];
                    }
                    return Ke;
                  });
}

SparseMatrix AssembleMass(const Mesh &mesh, std::span<const Material> materials,
                          std::span<const double> subdomain_scale)
{
  CheckMaterials(mesh, materials, subdomain_scale);
  return Assemble(mesh,
                  [&](Index e)
                  {
                    const auto sub = static_cast<std::size_t>(mesh.Subdomain(e));
                    double rho = materials[sub].density;
                    if (!subdomain_scale.empty())
                    {
                      rho *= subdomain_scale[sub];
                    }
                    return TetMass(mesh.ElementCoordinates(e), rho);
                  });
}

Eigen::VectorXd AssembleForce(const Mesh &mesh, std::span<const PointLoad> loads)
{
  Eigen::VectorXd F = Eigen::VectorXd::Zero(mesh.NumDofs());
  for (const auto &load : loads)
  {
    if (load.node < 0 || load.node >= mesh.NumNodes())
    {
      throw AssemblyError("load references node " + std::to_string(load.node) +
                          " outside the mesh");
    }
    const Eigen::Vector3d f = load.Force();
    for (int c = 0; c < 3; c++)
    {
      F(Dof(load.node, c)) += f(c);
    }
  }
  return F;
}

double VonMisesInvariant(const Vector6d &s)
{
  const double dxy = s(0) - s(1), dyz = s(1) - s(2), dzx = s(2) - s(0);
  const double shear = s(3) * s(3) + s(4) * s(4) + s(5) * s(5);
  return std::sqrt(0.5 * (dxy * dxy + dyz * dyz + dzx * dzx) + 3.0 * shear);
}

Eigen::VectorXd VonMises(const Mesh &mesh, std::span<const Material> materials,
                         const Eigen::VectorXd &U)
{
  CheckMaterials(mesh, materials, {});
  if (U.size() != mesh.NumDofs())
  {
    throw ShapeError("von Mises: displacement has " + std::to_string(U.size()) +
                     " entries, expected " + std::to_string(mesh.NumDofs()));
  }
  Eigen::VectorXd vm(mesh.NumElements());
  for (Index e = 0; e < mesh.NumElements(); e++)
  {
    const Tet &t = mesh.Element(e);
    Eigen::Matrix<double, 12, 1> Ue;
    for (int a = 0; a < 4; a++)
    {
      Ue.segment<3>(3 * a) = U.segment<3>(Dof(t[a], 0));
    }
    const Vector6d strain = TetStrainDisplacement(mesh.ElementCoordinates(e)) * Ue;
    const Vector6d stress =
        ElasticityMatrix(materials[static_cast<std::size_t>(mesh.Subdomain(e))]) * strain;
    vm(e) = VonMisesInvariant(stress);
  }
  return vm;
}

}  // namespace pgdir
