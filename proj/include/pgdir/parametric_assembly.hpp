// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_PARAMETRIC_ASSEMBLY_HPP
#define PGDIR_PARAMETRIC_ASSEMBLY_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include "pgdir/compression.hpp"
#include "pgdir/mesh.hpp"
#include "pgdir/separated_tensor.hpp"

namespace pgdir
{

// Sinusoidal shear of the block: x = x^ + theta sin(pi y^ / ly) (x^ - lx / 2), y and z
// unchanged. Connectivity is kept; an inverted element raises AssemblyError naming theta.
struct MorphMap
{
  double lx = 6.0;
  double ly = 12.0;

  Eigen::Vector3d Apply(const Eigen::Vector3d &x, double theta) const;
  Mesh Apply(const Mesh &reference, double theta) const;
};

Mesh MorphMesh(const Mesh &reference, double theta, const MorphMap &map = {});

struct Snapshot
{
  SparseMatrix K;
  SparseMatrix M;
  std::optional<Eigen::VectorXd> F;
};

// Returns the assembled matrices at a 0-based node multi-index of the grid. Every
// snapshot of one sampler shares n_d and the DOF ordering.
using SnapshotSampler = std::function<Snapshot(std::span<const Index> node)>;

struct SampledOperators
{
  SepSparse K;
  SepSparse M;
  std::optional<SepVector> F;  // present when every snapshot carries a load
  CompressionReport k_report;
  CompressionReport m_report;
};

struct SamplingOptions
{
  bool compress = true;
  CompressionOptions k_compression;
  CompressionOptions m_compression;
};

// One delta-separated term per grid node (parametric factor j = indicator of node p_j),
// followed by an optional compression pass. Without compression every grid node replays
// its snapshot exactly.
SampledOperators SeparateBySampling(const SnapshotSampler &sampler, const GridPtr &grid,
                                    const SamplingOptions &options = {});

// Delta-separated tensor from explicit per-node spatial factors (flat grid order).
SepSparse DeltaSeparation(const GridPtr &grid, std::vector<SparseMatrix> snapshots);
SepVector DeltaSeparation(const GridPtr &grid, std::vector<Eigen::VectorXd> snapshots);

// Snapshot directory: K_<i>.mtx, M_<i>.mtx and optionally F_<i>.mtx, i = 1-based
// linear index, plus manifest.json with the grid and the naming convention.
void ExportSnapshots(const SnapshotSampler &sampler, const ParametricGrid &grid,
                     const std::filesystem::path &dir);

// Replays a snapshot directory. The returned sampler throws MissingInput naming the
// multi-index when a file is absent, ParseError on malformed or non-symmetric files and
// ShapeError on dimension mismatches.
SnapshotSampler IngestExternalSnapshots(const std::filesystem::path &dir,
                                        const ParametricGrid &grid);

// Grid stored in a snapshot manifest.
ParametricGrid ReadSnapshotManifest(const std::filesystem::path &dir);

}  // namespace pgdir

#endif  // PGDIR_PARAMETRIC_ASSEMBLY_HPP
