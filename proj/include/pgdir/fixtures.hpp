// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_FIXTURES_HPP
#define PGDIR_FIXTURES_HPP

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>
#include "pgdir/compression.hpp"
#include "pgdir/inertia_relief.hpp"
#include "pgdir/mesh.hpp"
#include "pgdir/parametric_assembly.hpp"
#include "pgdir/qoi.hpp"

namespace pgdir
{

// Uncompressed separated operators of a parametric problem. F is parameter-independent
// for every fixture shipped here.
struct SeparatedOperators
{
  SepSparse K;
  SepSparse M;
  SepVector F;
};

//
// Parametric full-order problem: reference mesh, parameter box, loads, reference set and
// QoI probes, plus the two routes to its operators (direct assembly at a parameter point,
// which is the FE oracle, and a separated representation).
//
class Problem
{
public:
  virtual ~Problem() = default;

  virtual std::string Name() const = 0;
  // True when the parameters move the geometry (rigid modes then depend on them).
  virtual bool GeometricParameters() const = 0;
  virtual Mesh MeshAt(std::span<const double> mu) const = 0;
  // Per-subdomain materials at mu, with any stiffness/mass multipliers folded in.
  virtual std::vector<Material> MaterialsAt(std::span<const double> mu) const = 0;
  // Separation exploiting the known dependence on the material-like parameters;
  // geometric parameters are sampled node by node.
  virtual SeparatedOperators SeparateAnalytic() const = 0;

  // Assembled K, M, F at parameter values.
  Snapshot Assemble(std::span<const double> mu) const;
  // Grid-node sampler for SeparateBySampling / ExportSnapshots.
  SnapshotSampler Sampler() const;

  const Mesh &ReferenceMesh() const { return mesh_; }
  const GridPtr &Grid() const { return grid_; }
  const std::vector<PointLoad> &Loads() const { return loads_; }
  const ReferenceSet &Reference() const { return reference_; }
  const QoIProbe &Probe() const { return probe_; }
  const std::optional<ObjectiveSpec> &Objective() const { return objective_; }

  // Swaps in another mesh with the same subdomain count. Loads, probe nodes and
  // reference DOFs move to the nodes nearest to their old positions.
  void ReplaceMesh(Mesh mesh);

  void SetGrid(GridPtr grid);
  void SetLoads(std::vector<PointLoad> loads);
  void SetReference(const ReferenceSet &reference) { reference_ = reference; }
  void SetProbe(QoIProbe probe);
  void SetObjective(ObjectiveSpec spec);

protected:
  Mesh mesh_;
  GridPtr grid_;
  std::vector<PointLoad> loads_;
  ReferenceSet reference_;
  QoIProbe probe_;
  std::optional<ObjectiveSpec> objective_;
};

// Block with a central inclusion (subdomain 0, Young modulus mu) inside an outer material
// (subdomain 1, fixed modulus), sheared by the sinusoidal morph with amplitude theta.
// Parameters: (mu, theta).
class BlockProblem : public Problem
{
public:
  struct Options
  {
    std::vector<double> xs, ys, zs;  // structured node coordinates
    double inclusion_half_x = 1.0;
    double inclusion_half_y = 3.0;
    double outer_modulus = 200.0;
    double poisson_ratio = 0.3;
    double density = 1.0;
    double load = 10.0;
    Eigen::Vector3d p{2.0, 4.0, 0.5};   // +z load and probe P (nearest node)
    Eigen::Vector3d q{-2.0, 4.0, 0.5};  // -z load and probe Q (nearest node)
    MorphMap morph;
  };

  BlockProblem(Options options, GridPtr grid);

  std::string Name() const override { return "block"; }
  bool GeometricParameters() const override { return true; }
  Mesh MeshAt(std::span<const double> mu) const override;
  std::vector<Material> MaterialsAt(std::span<const double> mu) const override;
  SeparatedOperators SeparateAnalytic() const override;

  const Options &Settings() const { return options_; }

private:
  Options options_;
};

// Rectangular frame (two rails and two cross members around a central opening) under a
// self-equilibrated torsion load. Subdomain 0 holds the corners; subdomains 1..3 (rails,
// front cross member, rear cross member) scale stiffness and mass by the thickness-like
// parameters mu_1..mu_3.
class FrameProblem : public Problem
{
public:
  struct Options
  {
    double length = 8.0, width = 4.0, height = 0.5;
    double spacing = 0.5;
    double opening_margin = 1.0;
    Material material{207.0, 0.29, 7.82};
    double couple_force = 0.25;  // per node; front and rear torques of unit magnitude
  };

  FrameProblem(Options options, GridPtr grid);

  std::string Name() const override { return "frame"; }
  bool GeometricParameters() const override { return false; }
  Mesh MeshAt(std::span<const double> mu) const override;
  std::vector<Material> MaterialsAt(std::span<const double> mu) const override;
  SeparatedOperators SeparateAnalytic() const override;

private:
  Options options_;
};

// Structured hexahedral grid split into 6 tetrahedra per cell (Kuhn pattern, mirrored in
// x for cells left of x = 0 so the mesh is mirror-symmetric). `label` maps a cell centre
// to a subdomain, or -1 to drop the cell; unused nodes are removed.
Mesh StructuredTetMesh(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs,
                       const std::function<int(const Eigen::Vector3d &)> &label,
                       bool mirror_x = true);

// Desk-scale replica of the torsion-block experiment: 7 x 13 x 3 nodes, grid
// mu in [10, 410] (41 nodes) x theta in [0, 0.5] (21 nodes).
std::unique_ptr<BlockProblem> MakeBlock();
// Coarse version (60 nodes, 180 DOFs) on a 5 x 5 grid for node-wise oracle checks.
std::unique_ptr<BlockProblem> MakeMiniBlock();
// Frame with mu_j in [0.7, 1.5] (9 nodes each, 729 grid nodes).
std::unique_ptr<FrameProblem> MakeFrame();

std::unique_ptr<Problem> MakeFixture(const std::string &name);

}  // namespace pgdir

#endif  // PGDIR_FIXTURES_HPP
