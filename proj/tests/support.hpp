// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Shared generators and small fixtures for the unit and property tests.

#ifndef PGDIR_TESTS_SUPPORT_HPP
#define PGDIR_TESTS_SUPPORT_HPP

#include <filesystem>
#include <random>
#include <string>
#include <vector>
#include <Eigen/Core>
#include <Eigen/Geometry>
#include "pgdir/fem.hpp"
#include "pgdir/fixtures.hpp"
#include "pgdir/mesh.hpp"
#include "pgdir/separated_tensor.hpp"

namespace pgdir::test
{

// Seeded generator; every property test draws from its own instance so failures replay.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform(double lo = 0.0, double hi = 1.0)
  {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  Index Int(Index lo, Index hi)  // inclusive
  {
    return std::uniform_int_distribution<Index>(lo, hi)(engine_);
  }
  Eigen::VectorXd Vector(Index n, double lo = -1.0, double hi = 1.0)
  {
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; i++)
    {
      v(i) = Uniform(lo, hi);
    }
    return v;
  }
  Eigen::MatrixXd Matrix(Index r, Index c)
  {
    Eigen::MatrixXd m(r, c);
    for (Index j = 0; j < c; j++)
    {
      m.col(j) = Vector(r);
    }
    return m;
  }
  // Symmetric positive definite, eigenvalues in [1, 1 + n].
  Eigen::MatrixXd Spd(Index n)
  {
    const Eigen::MatrixXd a = Matrix(n, n);
    return a * a.transpose() / static_cast<double>(n) + Eigen::MatrixXd::Identity(n, n);
  }
  std::mt19937_64 &Engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

inline std::array<Eigen::Vector3d, 4> UnitTet()
{
  return {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
          Eigen::Vector3d(0, 0, 1)};
}

// Well-shaped tetrahedron: a perturbed regular one, positively oriented, randomly placed.
inline std::array<Eigen::Vector3d, 4> RandomTet(Rng &rng)
{
  std::array<Eigen::Vector3d, 4> x = {
      Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, -1, -1), Eigen::Vector3d(-1, 1, -1),
      Eigen::Vector3d(-1, -1, 1)};
  const Eigen::Vector3d shift = rng.Vector(3, -5.0, 5.0);
  const double scale = rng.Uniform(0.2, 3.0);
  for (auto &p : x)
  {
    p = scale * (p + rng.Vector(3, -0.2, 0.2)) + shift;
  }
  if (TetSignedVolume(x) < 0.0)
  {
    std::swap(x[0], x[1]);
  }
  return x;
}

inline Mesh SingleTetMesh(const std::array<Eigen::Vector3d, 4> &x)
{
  return Mesh({x[0], x[1], x[2], x[3]}, {Tet{0, 1, 2, 3}}, {0});
}

// Small connected box mesh, two subdomains split at x = 0.
inline Mesh BoxMesh(int nx = 3, int ny = 3, int nz = 2)
{
  std::vector<double> xs, ys, zs;
  for (int i = 0; i <= nx; i++)
  {
    xs.push_back(-1.0 + 2.0 * i / nx);
  }
  for (int i = 0; i <= ny; i++)
  {
    ys.push_back(-1.5 + 3.0 * i / ny);
  }
  for (int i = 0; i <= nz; i++)
  {
    zs.push_back(-0.5 + 1.0 * i / nz);
  }
  return StructuredTetMesh(xs, ys, zs,
                           [](const Eigen::Vector3d &c) { return c.x() < 0.0 ? 0 : 1; });
}

inline std::vector<Material> Steel(int subdomains = 2)
{
  return std::vector<Material>(static_cast<std::size_t>(subdomains), Material{200.0, 0.3, 7.8});
}

// Six analytic rigid modes of a mesh: translations and linearized rotations about `origin`.
inline Eigen::MatrixXd AnalyticRigidModes(const Mesh &mesh, const Eigen::Vector3d &origin)
{
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(mesh.NumDofs(), 6);
  for (Index i = 0; i < mesh.NumNodes(); i++)
  {
    const Eigen::Vector3d r = mesh.Node(i) - origin;
    for (int k = 0; k < 3; k++)
    {
      R(Dof(i, k), k) = 1.0;
      const Eigen::Vector3d rot = Eigen::Vector3d::Unit(k).cross(r);
      for (int c = 0; c < 3; c++)
      {
        R(Dof(i, c), 3 + k) = rot(c);
      }
    }
  }
  return R;
}

inline GridPtr MakeGrid(std::vector<Index> sizes)
{
  std::vector<ParameterAxis> axes;
  for (std::size_t j = 0; j < sizes.size(); j++)
  {
    axes.push_back(ParameterAxis::Uniform("p" + std::to_string(j + 1), 1.0, 2.0, sizes[j]));
  }
  return std::make_shared<const ParametricGrid>(std::move(axes));
}

inline std::vector<Eigen::VectorXd> RandomFactors(Rng &rng, const ParametricGrid &grid)
{
  std::vector<Eigen::VectorXd> f;
  for (int j = 0; j < grid.NumParams(); j++)
  {
    f.push_back(rng.Vector(grid.Size(j)));
  }
  return f;
}

inline SepVector RandomSepVector(Rng &rng, const GridPtr &grid, Index n, Index terms)
{
  SepVector x(grid, n);
  for (Index t = 0; t < terms; t++)
  {
    x.AddTerm(rng.Uniform(0.5, 2.0), rng.Vector(n), RandomFactors(rng, *grid));
  }
  return x;
}

inline SepDense RandomSepDense(Rng &rng, const GridPtr &grid, Index r, Index c, Index terms)
{
  SepDense x(grid, r, c);
  for (Index t = 0; t < terms; t++)
  {
    x.AddTerm(rng.Uniform(0.5, 2.0), rng.Matrix(r, c), RandomFactors(rng, *grid));
  }
  return x;
}

inline SparseMatrix ToSparse(const Eigen::MatrixXd &A)
{
  SparseMatrix S = A.sparseView(0.0, 0.0);
  S.makeCompressed();
  return S;
}

// Empty scratch directory in the system temp dir.
inline std::filesystem::path ScratchDir(const std::string &name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("pgdir_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double RelDiff(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b)
{
  const double n = b.norm();
  return n > 0.0 ? (a - b).norm() / n : (a - b).norm();
}

}  // namespace pgdir::test

#endif  // PGDIR_TESTS_SUPPORT_HPP
