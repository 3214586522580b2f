// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <fstream>
#include <numbers>
#include "pgdir/error.hpp"
#include "pgdir/matrix_market.hpp"
#include "pgdir/parametric_assembly.hpp"
#include "support.hpp"

using namespace pgdir;
using namespace pgdir::test;

namespace
{

double MaxAbs(const SparseMatrix &A)
{
  double m = 0.0;
  for (Index k = 0; k < A.outerSize(); k++)
  {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
    {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

bool BitwiseEqual(const SparseMatrix &A, const SparseMatrix &B)
{
  return A.rows() == B.rows() && A.cols() == B.cols() && MaxAbs(SparseMatrix(A - B)) == 0.0;
}

double RelFrobenius(const SparseMatrix &A, const SparseMatrix &B)
{
  return SparseMatrix(A - B).norm() / B.norm();
}

// 1-based counter of nested loops, last parameter outermost.
void NestedLoops(const ParametricGrid &grid, int j, std::vector<Index> &p, Index &counter,
                 std::vector<std::pair<std::vector<Index>, Index>> &out)
{
  if (j < 0)
  {
    out.emplace_back(p, ++counter);
    return;
  }
  for (Index k = 1; k <= grid.Size(j); k++)
  {
    p[static_cast<std::size_t>(j)] = k;
    NestedLoops(grid, j - 1, p, counter, out);
  }
}

SparseMatrix RandomSymmetric(Rng &rng, Index n)
{
  const Eigen::MatrixXd a = rng.Matrix(n, n);
  return ToSparse(a + a.transpose());
}

}  // namespace

TEST_CASE("linear index")
{
  SUBCASE("examples")
  {
    const GridPtr g2 = MakeGrid({41, 21});
    CHECK(g2->LinearIndex(std::vector<Index>{1, 1}) == 1);
    CHECK(g2->LinearIndex(std::vector<Index>{2, 1}) == 2);
    const GridPtr g3 = MakeGrid({9, 9, 9});
    CHECK(g3->LinearIndex(std::vector<Index>{1, 1, 1}) == 1);
    CHECK(g3->LinearIndex(std::vector<Index>{3, 2, 5}) == 336);
  }
  SUBCASE("bijection equal to the nested-loop counter")
  {
    for (const auto &sizes : std::vector<std::vector<Index>>{{2, 2}, {3, 4, 2}, {2, 3, 2, 3}, {5}})
    {
      const GridPtr g = MakeGrid(sizes);
      std::vector<std::pair<std::vector<Index>, Index>> visits;
      std::vector<Index> p(sizes.size());
      Index counter = 0;
      NestedLoops(*g, static_cast<int>(sizes.size()) - 1, p, counter, visits);
      REQUIRE(static_cast<Index>(visits.size()) == g->TotalNodes());
      std::vector<bool> seen(static_cast<std::size_t>(g->TotalNodes()) + 1, false);
      for (const auto &[multi, i] : visits)
      {
        const Index li = g->LinearIndex(multi);
        CHECK(li == i);
        CHECK(g->MultiIndex(li) == multi);
        REQUIRE(li >= 1);
        REQUIRE(li <= g->TotalNodes());
        CHECK_FALSE(seen[static_cast<std::size_t>(li)]);
        seen[static_cast<std::size_t>(li)] = true;
      }
    }
  }
  SUBCASE("out of range")
  {
    const GridPtr g = MakeGrid({3, 3});
    CHECK_THROWS_AS(g->LinearIndex(std::vector<Index>{0, 1}), RangeError);
    CHECK_THROWS_AS(g->LinearIndex(std::vector<Index>{1, 4}), RangeError);
    CHECK_THROWS_AS(g->LinearIndex(std::vector<Index>{1}), RangeError);
    CHECK_THROWS_AS(g->MultiIndex(10), RangeError);
  }
}

TEST_CASE("morph map")
{
  const MorphMap map;
  SUBCASE("theta = 0 is the identity, bitwise")
  {
    const Mesh ref = MakeBlock()->ReferenceMesh();
    const Mesh m = MorphMesh(ref, 0.0);
    for (Index i = 0; i < ref.NumNodes(); i++)
    {
      CHECK(m.Node(i) == ref.Node(i));
    }
  }
  SUBCASE("the centre plane x = 3 never moves")
  {
    for (double theta : {0.1, 0.25, 0.5})
    {
      for (double y : {0.0, 2.0, 6.0, 11.0})
      {
        const Eigen::Vector3d x(3.0, y, 0.7);
        CHECK(map.Apply(x, theta) == x);
      }
    }
  }
  SUBCASE("direct evaluation")
  {
    const Eigen::Vector3d x = map.Apply(Eigen::Vector3d(0.0, 6.0, 0.0), 0.5);
    CHECK(x.x() == doctest::Approx(-1.5).epsilon(1.0e-15));
    CHECK(x.y() == 6.0);
    CHECK(x.z() == 0.0);
    Rng rng(41);
    for (int k = 0; k < 20; k++)
    {
      const Eigen::Vector3d p = rng.Vector(3, 0.0, 12.0);
      const double theta = rng.Uniform(0.0, 0.5);
      const double expected = p.x() + theta * std::sin(std::numbers::pi * p.y() / 12.0) * (p.x() - 3.0);
      CHECK(std::abs(map.Apply(p, theta).x() - expected) <= 1.0e-14 * (1.0 + std::abs(expected)));
    }
  }
  SUBCASE("morphed fixture meshes keep positive volumes")
  {
    const auto block = MakeBlock();
    for (double theta : {0.0, 0.25, 0.5})
    {
      const Mesh m = block->MeshAt(std::vector<double>{10.0, theta});
      for (Index e = 0; e < m.NumElements(); e++)
      {
        CHECK(m.SignedVolume(e) > 0.0);
      }
    }
  }
  SUBCASE("an inverting morph names theta")
  {
    const Mesh ref = MakeBlock()->ReferenceMesh();
    try
    {
      MorphMesh(ref, -40.0);
      FAIL("expected an inverted element");
    }
    catch (const AssemblyError &e)
    {
      CHECK(std::string(e.what()).find("theta = -40") != std::string::npos);
    }
  }
}

TEST_CASE("delta separation replays the snapshots")
{
  Rng rng(42);
  const GridPtr g = MakeGrid({3, 3, 3});
  std::vector<SparseMatrix> K, M;
  for (Index f = 0; f < g->TotalNodes(); f++)
  {
    K.push_back(RandomSymmetric(rng, 6));
    M.push_back(RandomSymmetric(rng, 6));
  }
  const SnapshotSampler sampler = [&](std::span<const Index> node)
  { return Snapshot{K[static_cast<std::size_t>(g->FlatOf(node))], M[static_cast<std::size_t>(g->FlatOf(node))], std::nullopt}; };
  SamplingOptions options;
  options.compress = false;
  const SampledOperators ops = SeparateBySampling(sampler, g, options);
  CHECK(ops.K.NumTerms() == 27);
  CHECK_FALSE(ops.F.has_value());
  for (Index f = 0; f < g->TotalNodes(); f++)
  {
    const auto node = g->NodeOf(f);
    CHECK(BitwiseEqual(ops.K.Evaluate(node), K[static_cast<std::size_t>(f)]));
    CHECK(BitwiseEqual(ops.M.Evaluate(node), M[static_cast<std::size_t>(f)]));
  }

  // Dimension mismatch.
  K[5] = RandomSymmetric(rng, 7);
  CHECK_THROWS_AS(SeparateBySampling(sampler, g, options), ShapeError);
}

TEST_CASE("parameter-independent sampler compresses to rank one")
{
  const GridPtr g = MakeGrid({5, 4});
  const Mesh mesh = BoxMesh(2, 2, 1);
  const Snapshot s{AssembleStiffness(mesh, Steel()), AssembleMass(mesh, Steel()), std::nullopt};
  const SampledOperators ops = SeparateBySampling([&](std::span<const Index>) { return s; }, g);
  REQUIRE(ops.K.NumTerms() == 1);
  REQUIRE(ops.M.NumTerms() == 1);
  for (const auto &f : ops.K.Terms()[0].factors)
  {
    CHECK((f / f(0) - Eigen::VectorXd::Ones(f.size())).cwiseAbs().maxCoeff() <= 1.0e-12);
  }
  CHECK(RelFrobenius(ops.K.Evaluate(std::vector<Index>{2, 3}), s.K) <= 1.0e-12);
}

TEST_CASE("analytic block separation equals direct assembly")
{
  const auto block = MakeMiniBlock();
  const SeparatedOperators ops = block->SeparateAnalytic();
  const GridPtr &g = block->Grid();
  for (Index f = 0; f < g->TotalNodes(); f++)
  {
    const auto node = g->NodeOf(f);
    const Snapshot s = block->Assemble(g->Values(node));
    CHECK(RelFrobenius(ops.K.Evaluate(node), s.K) <= 1.0e-13);
    CHECK(RelFrobenius(ops.M.Evaluate(node), s.M) <= 1.0e-13);
    CHECK(RelDiff(ops.F.Evaluate(node), *s.F) <= 1.0e-13);
  }
}

TEST_CASE("analytic frame separation equals direct assembly")
{
  const auto frame = MakeFrame();
  const SeparatedOperators ops = frame->SeparateAnalytic();
  const GridPtr &g = frame->Grid();
  Rng rng(43);
  for (int k = 0; k < 6; k++)
  {
    const auto node = g->NodeOf(rng.Int(0, g->TotalNodes() - 1));
    const Snapshot s = frame->Assemble(g->Values(node));
    CHECK(RelFrobenius(ops.K.Evaluate(node), s.K) <= 1.0e-13);
    CHECK(RelFrobenius(ops.M.Evaluate(node), s.M) <= 1.0e-13);
  }
}

TEST_CASE("sampled compression keeps every snapshot within the tolerance")
{
  const auto block = MakeMiniBlock();
  const GridPtr &g = block->Grid();
  SamplingOptions options;
  options.k_compression.tol = 1.0e-5;
  options.m_compression.tol = 1.0e-5;
  const SampledOperators ops = SeparateBySampling(block->Sampler(), g, options);
  CHECK(ops.K.NumTerms() < g->TotalNodes());
  for (Index f = 0; f < g->TotalNodes(); f++)
  {
    const auto node = g->NodeOf(f);
    const Snapshot s = block->Assemble(g->Values(node));
    CHECK(RelFrobenius(ops.K.Evaluate(node), s.K) <= 1.0e-5);
    CHECK(RelFrobenius(ops.M.Evaluate(node), s.M) <= 1.0e-5);
  }
}

TEST_CASE("external snapshots")
{
  const auto block = MakeMiniBlock();
  const GridPtr &g = block->Grid();
  const auto dir = ScratchDir("snapshots");
  ExportSnapshots(block->Sampler(), *g, dir);
  CHECK(ReadSnapshotManifest(dir) == *g);

  SUBCASE("round trip is exact")
  {
    const SnapshotSampler ingest = IngestExternalSnapshots(dir, *g);
    const SnapshotSampler direct = block->Sampler();
    for (Index f = 0; f < g->TotalNodes(); f++)
    {
      const auto node = g->NodeOf(f);
      const Snapshot a = ingest(node), b = direct(node);
      CHECK(BitwiseEqual(a.K, b.K));
      CHECK(BitwiseEqual(a.M, b.M));
      REQUIRE(a.F.has_value());
      CHECK(*a.F == *b.F);
    }
  }
  SUBCASE("a missing file names the multi-index")
  {
    std::filesystem::remove(dir / "K_7.mtx");
    const SnapshotSampler ingest = IngestExternalSnapshots(dir, *g);
    try
    {
      ingest(g->NodeOf(6));
      FAIL("expected a missing snapshot");
    }
    catch (const MissingInput &e)
    {
      const std::string msg = e.what();
      CHECK(msg.find("K_7.mtx") != std::string::npos);
      CHECK(msg.find("(2,2)") != std::string::npos);
    }
  }
  SUBCASE("a corrupted header is a parse error naming the file")
  {
    std::ofstream(dir / "M_3.mtx") << "%%MatrixMarket matrix nonsense\n1 1 1\n1 1 1\n";
    const SnapshotSampler ingest = IngestExternalSnapshots(dir, *g);
    try
    {
      ingest(g->NodeOf(2));
      FAIL("expected a parse error");
    }
    catch (const ParseError &e)
    {
      CHECK(std::string(e.what()).find("M_3.mtx:1") != std::string::npos);
    }
  }
  SUBCASE("general storage is refused")
  {
    std::ofstream(dir / "K_1.mtx") << "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n";
    CHECK_THROWS_AS(IngestExternalSnapshots(dir, *g)(g->NodeOf(0)), ParseError);
  }
  SUBCASE("a different grid is refused")
  {
    CHECK_THROWS_AS(IngestExternalSnapshots(dir, *MakeGrid({5, 5})), ShapeError);
  }
  CHECK_THROWS_AS(IngestExternalSnapshots(dir / "absent", *g), MissingInput);
}
