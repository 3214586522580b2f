// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include "pgdir/cascade.hpp"
#include "pgdir/error.hpp"
#include "support.hpp"

using namespace pgdir;
using namespace pgdir::test;

namespace
{

// Operators of a box whose two subdomains have Young moduli mu_1 and mu_2 (density 1).
struct MaterialBox
{
  GridPtr grid;
  Mesh mesh;
  SepSparse K, M;
  SepVector F;
  ReferenceSet s;

  Snapshot At(const std::vector<Index> &node) const
  {
    const auto v = grid->Values(node);
    const std::vector<Material> mats{{v[0] * 100.0, 0.3, 1.0}, {v[1] * 100.0, 0.3, 1.0}};
    return {AssembleStiffness(mesh, mats), AssembleMass(mesh, mats), F.Evaluate(node)};
  }
};

MaterialBox MakeMaterialBox(Rng &rng)
{
  MaterialBox b;
  b.grid = MakeGrid({5, 4});
  b.mesh = BoxMesh(3, 3, 1);
  // K is linear in the subdomain moduli: K(E0, E1) = E0 K0 + E1 K1.
  auto stiffness = [&](double e0, double e1)
  { return AssembleStiffness(b.mesh, std::vector<Material>{{e0, 0.3, 1.0}, {e1, 0.3, 1.0}}); };
  const SparseMatrix k1 = stiffness(100.0, 200.0) - stiffness(100.0, 100.0);
  const SparseMatrix k0 = stiffness(100.0, 100.0) - k1;
  const Eigen::VectorXd ones0 = Eigen::VectorXd::Ones(5), ones1 = Eigen::VectorXd::Ones(4);
  const Eigen::Map<const Eigen::VectorXd> m0(b.grid->Axis(0).nodes.data(), 5);
  const Eigen::Map<const Eigen::VectorXd> m1(b.grid->Axis(1).nodes.data(), 4);
  b.K = SepSparse(b.grid, b.mesh.NumDofs(), b.mesh.NumDofs());
  b.K.AddTerm(1.0, k0, {m0, ones1});
  b.K.AddTerm(1.0, k1, {ones0, m1});
  b.M = SepConstant(b.grid, AssembleMass(b.mesh, std::vector<Material>{{1.0, 0.3, 1.0}, {1.0, 0.3, 1.0}}));
  b.F = SepConstant(b.grid, Eigen::VectorXd(rng.Vector(b.mesh.NumDofs())));
  b.s = DefaultReferenceSet(b.mesh);
  return b;
}

}  // namespace

TEST_CASE("parameter-independent inputs reduce to the direct pipeline")
{
  Rng rng(51);
  const GridPtr g = MakeGrid({4, 3});
  const Mesh mesh = BoxMesh();
  const SparseMatrix K = AssembleStiffness(mesh, Steel()), M = AssembleMass(mesh, Steel());
  const Eigen::VectorXd F = rng.Vector(mesh.NumDofs());
  const ReferenceSet s = DefaultReferenceSet(mesh);
  CascadeOptions options;
  options.force_general_path = true;

  const CascadeResult r = BuildVademecum(SepConstant(g, K), SepConstant(g, M), SepConstant(g, F), s, options);
  const RigidBasis basis = RigidBodyModes(K, s);
  const IrSolution direct = IrSolve(K, M, F, s);
  CHECK(r.vademecum.NumModes() == 1);
  for (Index f = 0; f < g->TotalNodes(); f++)
  {
    const auto node = g->NodeOf(f);
    CHECK(RelDiff(r.phi.Evaluate(node), basis.phi) <= 1.0e-10);
    CHECK(RelDiff(r.alpha.Evaluate(node), direct.acceleration) <= 1.0e-10);
    CHECK(RelDiff(r.vademecum.U.Evaluate(node), direct.displacement) <= 1.0e-10);
  }

  SUBCASE("zero load gives zero accelerations")
  {
    const SepVector alpha =
        ParametricAccelerations(r.phi, SepConstant(g, M), SepVector(g, mesh.NumDofs()), options);
    CHECK(alpha.Evaluate(std::vector<Index>{1, 1}).isZero(0.0));
  }
}

TEST_CASE("material-only parameters: constant rigid modes, fast path agrees")
{
  Rng rng(52);
  const MaterialBox b = MakeMaterialBox(rng);
  CascadeOptions general;
  general.tol = 1.0e-4;
  general.force_general_path = true;
  const SepDense phi = ParametricRigidModes(b.K, b.s, general);
  const Eigen::MatrixXd phi0 = phi.Evaluate(std::vector<Index>{0, 0});
  for (Index f = 0; f < b.grid->TotalNodes(); f++)
  {
    CHECK(RelDiff(phi.Evaluate(b.grid->NodeOf(f)), phi0) <= 1.0e-8);
  }

  const CascadeResult slow = BuildVademecum(b.K, b.M, b.F, b.s, general);
  CascadeOptions fast = general;
  fast.force_general_path = false;
  fast.material_only = true;
  const CascadeResult quick = BuildVademecum(b.K, b.M, b.F, b.s, fast);
  CHECK(quick.vademecum.log.fast_path);
  CHECK_FALSE(slow.vademecum.log.fast_path);
  for (Index f = 0; f < b.grid->TotalNodes(); f++)
  {
    const auto node = b.grid->NodeOf(f);
    const Snapshot snap = b.At(node);
    const Eigen::VectorXd oracle = IrSolve(snap.K, snap.M, *snap.F, b.s).displacement;
    CHECK(RelDiff(quick.vademecum.U.Evaluate(node), slow.vademecum.U.Evaluate(node)) <= 10.0 * general.tol);
    CHECK(RelDiff(quick.vademecum.U.Evaluate(node), oracle) <= 10.0 * general.tol);
  }
}

TEST_CASE("small geometric fixture: node-wise oracle equivalence and invariants")
{
  const auto mini = MakeMiniBlock();
  const SeparatedOperators ops = mini->SeparateAnalytic();
  // Step tolerances of the shipped job configs.
  CascadeOptions options;
  options.tol = 1.0e-3;
  options.rigid_tol = 1.0e-7;
  options.accel_tol = 1.0e-8;
  options.product_tol = 1.0e-7;
  const CascadeResult r = BuildVademecum(ops.K, ops.M, ops.F, mini->Reference(), options);
  const Vademecum &v = r.vademecum;
  const GridPtr &g = mini->Grid();
  CHECK(v.log.converged);

  const double bound = std::max(10.0 * options.tol, 1.0e-6);
  for (Index f = 0; f < g->TotalNodes(); f++)
  {
    const auto node = g->NodeOf(f);
    const Snapshot s = mini->Assemble(g->Values(node));
    const IrSolution direct = IrSolve(s.K, s.M, *s.F, mini->Reference());
    CAPTURE(f);
    CHECK(RelDiff(v.U.Evaluate(node), direct.displacement) <= bound);

    // Rigid modes stay in the kernel; accelerations match the direct ones.
    const Eigen::MatrixXd phi = r.phi.Evaluate(node);
    CHECK((s.K * phi).norm() <= 1.0e-6 * s.K.norm());
    CHECK(RelDiff(r.alpha.Evaluate(node), direct.acceleration) <= 1.0e-6);

    // Equilibration carries through.
    const Eigen::VectorXd rhs = r.rhs.Evaluate(node);
    CHECK((phi.transpose() * rhs).cwiseAbs().maxCoeff() <= 1.0e-6 * s.F->norm());
  }

  // Reference rows are identically zero in every mode.
  for (const auto &t : v.U.Terms())
  {
    for (Index d : v.reference.dofs)
    {
      CHECK(t.spatial(d) == 0.0);
    }
  }
  // Amplitudes are non-increasing.
  const auto beta = v.Amplitudes();
  for (std::size_t i = 1; i < beta.size(); i++)
  {
    CHECK(beta[i] <= beta[i - 1]);
  }
  CHECK(v.log.TotalSweeps() >= static_cast<int>(v.log.modes.size()));
}

TEST_CASE("vademecum container")
{
  const auto mini = MakeMiniBlock();
  const SeparatedOperators ops = mini->SeparateAnalytic();
  const CascadeOptions options;
  Vademecum v = BuildVademecum(ops.K, ops.M, ops.F, mini->Reference(), options).vademecum;
  v.metadata = {{"fixture", "mini"}};
  const auto dir = ScratchDir("vademecum");

  SUBCASE("round trip is lossless")
  {
    WriteVademecum(v, dir / "v.json");
    const Vademecum back = ReadVademecum(dir / "v.json");
    CHECK(back.reference == v.reference);
    CHECK(back.metadata == v.metadata);
    REQUIRE(back.NumModes() == v.NumModes());
    for (Index i = 0; i < v.NumModes(); i++)
    {
      const auto &a = v.U.Terms()[static_cast<std::size_t>(i)];
      const auto &b = back.U.Terms()[static_cast<std::size_t>(i)];
      CHECK(a.amplitude == b.amplitude);
      CHECK(a.spatial == b.spatial);
    }
    CHECK(back.log.TotalSweeps() == v.log.TotalSweeps());
    // Wall time is reported but not persisted.
    CHECK(VademecumToJson(back).dump() == VademecumToJson(v).dump());
  }
  SUBCASE("builds are deterministic")
  {
    Vademecum again = BuildVademecum(ops.K, ops.M, ops.F, mini->Reference(), options).vademecum;
    again.metadata = v.metadata;
    CHECK(VademecumToJson(again).dump() == VademecumToJson(v).dump());
  }
  SUBCASE("unknown major version and foreign files are rejected")
  {
    Json j = VademecumToJson(v);
    j["format_version"] = "99.0";
    CHECK_THROWS_AS(VademecumFromJson(j), ParseError);
    CHECK_THROWS_AS(VademecumFromJson(Json{{"format", "other"}}), ParseError);
    CHECK_THROWS_AS(ReadVademecum(dir / "absent.json"), MissingInput);
  }
}
