// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <algorithm>
#include <numeric>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include "pgdir/error.hpp"
#include "pgdir/fem.hpp"
#include "pgdir/fixtures.hpp"
#include "support.hpp"

using namespace pgdir;
using namespace pgdir::test;

namespace
{

// Index-notation element stiffness, written without Voigt matrices:
// K_(a i)(b k) = V (lambda dN_a/dx_i dN_b/dx_k + G (dN_a/dx_k dN_b/dx_i + delta_ik grad N_a . grad N_b)).
ElementMatrix IndexNotationStiffness(const std::array<Eigen::Vector3d, 4> &x, double E, double nu)
{
  Eigen::Matrix4d P;
  for (int a = 0; a < 4; a++)
  {
    P(a, 0) = 1.0;
    P.block<1, 3>(a, 1) = x[static_cast<std::size_t>(a)].transpose();
  }
  const Eigen::Matrix4d C = P.inverse();  // column a: coefficients of N_a
  const double V = std::abs(P.determinant()) / 6.0;
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double G = E / (2.0 * (1.0 + nu));
  ElementMatrix K;
  for (int a = 0; a < 4; a++)
  {
    for (int b = 0; b < 4; b++)
    {
      const Eigen::Vector3d ga = C.block<3, 1>(1, a), gb = C.block<3, 1>(1, b);
      for (int i = 0; i < 3; i++)
      {
        for (int k = 0; k < 3; k++)
        {
          K(3 * a + i, 3 * b + k) =
              V * (lambda * ga(i) * gb(k) + G * (ga(k) * gb(i) + (i == k ? ga.dot(gb) : 0.0)));
        }
      }
    }
  }
  return K;
}

double GeometricVolume(const Mesh &mesh)
{
  double v = 0.0;
  for (Index e = 0; e < mesh.NumElements(); e++)
  {
    const auto x = mesh.ElementCoordinates(e);
    v += std::abs((x[1] - x[0]).dot((x[2] - x[0]).cross(x[3] - x[0]))) / 6.0;
  }
  return v;
}

Eigen::VectorXd Translation(Index num_nodes, const Eigen::Vector3d &t)
{
  Eigen::VectorXd u(3 * num_nodes);
  for (Index i = 0; i < num_nodes; i++)
  {
    u.segment<3>(3 * i) = t;
  }
  return u;
}

Eigen::VectorXd Affine(const Mesh &mesh, const Eigen::Matrix3d &A, const Eigen::Vector3d &c)
{
  Eigen::VectorXd u(mesh.NumDofs());
  for (Index i = 0; i < mesh.NumNodes(); i++)
  {
    u.segment<3>(3 * i) = A * mesh.Node(i) + c;
  }
  return u;
}

}  // namespace

TEST_CASE("unit tetrahedron stiffness has a six-dimensional kernel")
{
  const Mesh mesh = SingleTetMesh(UnitTet());
  const std::vector<Material> mat{{1.0, 0.0, 1.0}};
  const Eigen::MatrixXd K = AssembleStiffness(mesh, mat);
  CHECK(K.rows() == 12);
  CHECK((K - K.transpose()).norm() == 0.0);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(K).eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  int zeros = 0;
  for (Index i = 0; i < ev.size(); i++)
  {
    zeros += std::abs(ev(i)) < 1.0e-10 * top ? 1 : 0;
  }
  CHECK(zeros == 6);
}

TEST_CASE("element stiffness matches the index-notation oracle on random tetrahedra")
{
  Rng rng(11);
  const Material m{200.0, 0.3, 1.0};
  for (int trial = 0; trial < 50; trial++)
  {
    const auto x = RandomTet(rng);
    const ElementMatrix K = TetStiffness(x, ElasticityMatrix(m));
    const ElementMatrix ref = IndexNotationStiffness(x, m.young_modulus, m.poisson_ratio);
    CHECK(RelDiff(K, ref) < 1.0e-12);
  }
}

TEST_CASE("mass of a rigid translation equals density times volume")
{
  SUBCASE("unit tetrahedron")
  {
    const Mesh mesh = SingleTetMesh(UnitTet());
    const SparseMatrix M = AssembleMass(mesh, std::vector<Material>{{1.0, 0.0, 1.0}});
    const Eigen::VectorXd u = Translation(4, Eigen::Vector3d::UnitX());
    CHECK(u.dot(M * u) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  }
  SUBCASE("morphed block, unit density")
  {
    const auto block = MakeBlock();
    for (double theta : {0.0, 0.25, 0.5})
    {
      const std::vector<double> mu{200.0, theta};
      const Mesh mesh = block->MeshAt(mu);
      const std::vector<Material> unit(2, Material{1.0, 0.3, 1.0});
      const SparseMatrix M = AssembleMass(mesh, unit);
      const Eigen::VectorXd u = Translation(mesh.NumNodes(), Eigen::Vector3d(0.6, 0.0, 0.8));
      const double vol = GeometricVolume(mesh);
      CHECK(std::abs(u.dot(M * u) - vol) <= 1.0e-10 * vol);
    }
  }
  SUBCASE("random translations and densities")
  {
    Rng rng(5);
    const Mesh mesh = BoxMesh();
    for (int trial = 0; trial < 20; trial++)
    {
      const double rho = rng.Uniform(0.1, 10.0);
      const std::vector<Material> mats(2, Material{1.0, 0.2, rho});
      const SparseMatrix M = AssembleMass(mesh, mats);
      const Eigen::Vector3d t = rng.Vector(3);
      const Eigen::VectorXd u = Translation(mesh.NumNodes(), t);
      const double expect = rho * GeometricVolume(mesh) * t.squaredNorm();
      CHECK(std::abs(u.dot(M * u) - expect) <= 1.0e-12 * expect);
    }
  }
}

TEST_CASE("subdomain labels do not change assembly when materials coincide")
{
  const Mesh split = BoxMesh();
  const Mesh single(split.Nodes(), split.Elements(),
                    std::vector<int>(static_cast<std::size_t>(split.NumElements()), 0));
  const SparseMatrix K2 = AssembleStiffness(split, Steel(2));
  const SparseMatrix K1 = AssembleStiffness(single, Steel(1));
  const SparseMatrix M2 = AssembleMass(split, Steel(2));
  const SparseMatrix M1 = AssembleMass(single, Steel(1));
  CHECK(Eigen::MatrixXd(K2 - K1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::MatrixXd(M2 - M1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembled matrices: symmetry, positive mass, kernel of dimension six")
{
  const Mesh mesh = BoxMesh();
  const SparseMatrix K = AssembleStiffness(mesh, Steel());
  const SparseMatrix M = AssembleMass(mesh, Steel());
  CHECK(Eigen::MatrixXd(K - SparseMatrix(K.transpose())).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::MatrixXd(M - SparseMatrix(M.transpose())).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(Eigen::MatrixXd(M)).info() == Eigen::Success);

  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(K)).eigenvalues();
  const double top = ev.maxCoeff();
  for (int i = 0; i < 6; i++)
  {
    CHECK(std::abs(ev(i)) < 1.0e-10 * top);
  }
  CHECK(ev(6) > 1.0e-6 * top);
}

TEST_CASE("the block fixture has n_d = 3 x nodes")
{
  // The original inclusion mesh is not published; the desk-scale replica is structured.
  const auto block = MakeBlock();
  const Mesh &mesh = block->ReferenceMesh();
  const SparseMatrix K = AssembleStiffness(mesh, block->MaterialsAt(std::vector<double>{200.0, 0.0}));
  CHECK(K.rows() == 3 * mesh.NumNodes());
  CHECK(mesh.NumSubdomains() == 2);
}

TEST_CASE("assembly is equivariant under node renumbering")
{
  Rng rng(3);
  const Mesh mesh = BoxMesh();
  for (int trial = 0; trial < 5; trial++)
  {
    std::vector<Index> perm(static_cast<std::size_t>(mesh.NumNodes()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.Engine());  // old node i -> new node perm[i]
    std::vector<Eigen::Vector3d> nodes(perm.size());
    for (std::size_t i = 0; i < perm.size(); i++)
    {
      nodes[static_cast<std::size_t>(perm[i])] = mesh.Nodes()[i];
    }
    std::vector<Tet> elems = mesh.Elements();
    for (auto &t : elems)
    {
      for (auto &n : t)
      {
        n = perm[static_cast<std::size_t>(n)];
      }
    }
    const Mesh renumbered(nodes, elems, mesh.Subdomains());
    const Eigen::MatrixXd K = Eigen::MatrixXd(AssembleStiffness(mesh, Steel()));
    const Eigen::MatrixXd Kp = Eigen::MatrixXd(AssembleStiffness(renumbered, Steel()));
    Eigen::MatrixXd back(K.rows(), K.cols());
    for (Index i = 0; i < mesh.NumNodes(); i++)
    {
      for (Index j = 0; j < mesh.NumNodes(); j++)
      {
        back.block<3, 3>(3 * i, 3 * j) =
            Kp.block<3, 3>(3 * perm[static_cast<std::size_t>(i)], 3 * perm[static_cast<std::size_t>(j)]);
      }
    }
    CHECK(RelDiff(back, K) < 1.0e-14);
  }
}

TEST_CASE("force vector bookkeeping")
{
  const Mesh mesh = BoxMesh();
  CHECK(AssembleForce(mesh, {}).isZero(0.0));

  SUBCASE("torsion couple has zero net z-resultant")
  {
    const auto block = MakeBlock();
    const Eigen::VectorXd F = AssembleForce(block->ReferenceMesh(), block->Loads());
    double fz = 0.0;
    for (Index i = 0; i < F.size() / 3; i++)
    {
      fz += F(3 * i + 2);
    }
    CHECK(fz == 0.0);
    CHECK(F.norm() > 0.0);
  }
  SUBCASE("component sums equal the applied resultant")
  {
    Rng rng(8);
    std::vector<PointLoad> loads;
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    for (int k = 0; k < 15; k++)
    {
      PointLoad l(rng.Int(0, mesh.NumNodes() - 1), rng.Vector(3), rng.Uniform(0.0, 5.0));
      CHECK(std::abs(l.direction.norm() - 1.0) < 1.0e-12);
      total += l.Force();
      loads.push_back(l);
    }
    const Eigen::VectorXd F = AssembleForce(mesh, loads);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (Index i = 0; i < mesh.NumNodes(); i++)
    {
      sum += F.segment<3>(3 * i);
    }
    CHECK((sum - total).norm() < 1.0e-12 * total.norm());
  }
  SUBCASE("load on a missing node is rejected")
  {
    CHECK_THROWS_AS(AssembleForce(mesh, std::vector<PointLoad>{PointLoad(mesh.NumNodes(), Eigen::Vector3d::UnitZ(), 1.0)}),
                    AssemblyError);
  }
}

TEST_CASE("von Mises of rigid motions vanishes and the patch test is exact")
{
  const Mesh mesh = BoxMesh();
  const std::vector<Material> mats(2, Material{200.0, 0.0, 1.0});
  const Eigen::MatrixXd R = AnalyticRigidModes(mesh, Eigen::Vector3d(0.3, -0.2, 0.1));
  for (int k = 0; k < 3; k++)
  {
    CHECK(VonMises(mesh, mats, R.col(k)).cwiseAbs().maxCoeff() <= 1.0e-10 * 200.0);
    CHECK(VonMises(mesh, mats, R.col(3 + k)).cwiseAbs().maxCoeff() <= 1.0e-8 * 200.0);
  }

  SUBCASE("uniaxial strain with nu = 0 gives E delta")
  {
    const double delta = 1.0e-3;
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    A(0, 0) = delta;
    const Eigen::VectorXd vm = VonMises(mesh, mats, Affine(mesh, A, Eigen::Vector3d(1, 2, 3)));
    for (Index e = 0; e < vm.size(); e++)
    {
      CHECK(vm(e) == doctest::Approx(200.0 * delta).epsilon(1e-10));
    }
  }
  SUBCASE("random affine fields give the constant stress everywhere")
  {
    Rng rng(21);
    const std::vector<Material> steel = Steel();
    for (int trial = 0; trial < 5; trial++)
    {
      const Eigen::Matrix3d A = 1.0e-3 * rng.Matrix(3, 3);
      const Eigen::Matrix3d eps = 0.5 * (A + A.transpose());
      Vector6d strain;
      strain << eps(0, 0), eps(1, 1), eps(2, 2), 2 * eps(0, 1), 2 * eps(0, 2), 2 * eps(1, 2);
      const double expect = VonMisesInvariant(ElasticityMatrix(steel[0]) * strain);
      const Eigen::VectorXd vm = VonMises(mesh, steel, Affine(mesh, A, rng.Vector(3)));
      CHECK((vm.array() - expect).abs().maxCoeff() <= 1.0e-9 * expect);
    }
  }
}

TEST_CASE("mesh validation")
{
  const auto x = UnitTet();
  CHECK_THROWS_AS(Mesh({x[0], x[1], x[2], x[3]}, {Tet{0, 1, 2, 4}}, {0}), AssemblyError);
  CHECK_THROWS_AS(Mesh({x[0], x[1], x[2], x[3]}, {Tet{1, 0, 2, 3}}, {0}), AssemblyError);
  CHECK_THROWS_AS(Mesh({x[0], x[1], x[2], x[3]}, {Tet{0, 1, 2, 3}}, {1}), AssemblyError);
  CHECK_THROWS_AS(Mesh({x[0], x[1], x[2], x[0]}, {Tet{0, 1, 2, 3}}, {0}), AssemblyError);
  CHECK_THROWS_AS((Material{0.0, 0.3, 1.0}.Validate()), AssemblyError);
  CHECK_THROWS_AS((Material{1.0, 0.5, 1.0}.Validate()), AssemblyError);
  CHECK_THROWS_AS((Material{1.0, 0.3, -1.0}.Validate()), AssemblyError);
  const Mesh mesh = BoxMesh();
  CHECK_THROWS_AS(AssembleStiffness(mesh, Steel(1)), AssemblyError);
}

TEST_CASE("mesh and loads files round trip")
{
  const auto dir = ScratchDir("mesh_io");
  const Mesh mesh = BoxMesh();
  WriteMesh(mesh, dir / "box.mesh");
  const Mesh back = ReadMesh(dir / "box.mesh");
  CHECK(back.Nodes() == mesh.Nodes());
  CHECK(back.Elements() == mesh.Elements());
  CHECK(back.Subdomains() == mesh.Subdomains());

  const std::vector<PointLoad> loads{PointLoad(3, Eigen::Vector3d(0, 0, 2), 10.0),
                                     PointLoad(5, Eigen::Vector3d(1, 1, 0), 2.5)};
  WriteLoads(loads, dir / "box.loads");
  const auto lb = ReadLoads(dir / "box.loads", mesh.NumNodes());
  REQUIRE(lb.size() == 2);
  CHECK(lb[1].node == 5);
  CHECK((lb[1].Force() - loads[1].Force()).norm() < 1.0e-14);

  CHECK_THROWS_AS(ReadMesh(dir / "absent.mesh"), MissingInput);
  CHECK_THROWS_AS(ReadLoads(dir / "box.loads", 4), ParseError);
}
