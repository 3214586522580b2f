// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/parametric_assembly.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include "pgdir/error.hpp"
#include "pgdir/matrix_market.hpp"
#include "pgdir/tensor_io.hpp"

namespace pgdir
{

Eigen::Vector3d MorphMap::Apply(const Eigen::Vector3d &x, double theta) const
{
  Eigen::Vector3d out = x;
  out(0) = x(0) + theta * std::sin(std::numbers::pi * x(1) / ly) * (x(0) - 0.5 * lx);
  return out;
}

Mesh MorphMap::Apply(const Mesh &reference, double theta) const
{
  if (theta == 0.0)
  {
    return reference;
  }
  std::vector<Eigen::Vector3d> nodes;
  nodes.reserve(reference.Nodes().size());
  for (const auto &x : reference.Nodes())
  {
    nodes.push_back(Apply(x, theta));
  }
  try
  {
    return reference.WithNodes(std::move(nodes));
  }
  catch (const AssemblyError &e)
  {
    std::ostringstream msg;
    msg << "morph at theta = " << theta << ": " << e.what();
    throw AssemblyError(msg.str());
  }
}

Mesh MorphMesh(const Mesh &reference, double theta, const MorphMap &map)
{
  return map.Apply(reference, theta);
}

namespace
{

std::vector<Eigen::VectorXd> DeltaFactors(const ParametricGrid &grid, std::span<const Index> node)
{
  std::vector<Eigen::VectorXd> f;
  for (int j = 0; j < grid.NumParams(); j++)
  {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(grid.Size(j));
    e(node[static_cast<std::size_t>(j)]) = 1.0;
    f.push_back(std::move(e));
  }
  return f;
}

template <typename S>
SeparatedTensor<S> DeltaSeparationImpl(const GridPtr &grid, std::vector<S> snapshots)
{
  if (static_cast<Index>(snapshots.size()) != grid->TotalNodes())
  {
    throw ShapeError("delta separation: " + std::to_string(snapshots.size()) +
                     " snapshots for a grid of " + std::to_string(grid->TotalNodes()) +
                     " nodes");
  }
  if (snapshots.empty())
  {
    throw ShapeError("delta separation: no snapshots");
  }
  const Index rows = SpatialRows(snapshots.front()), cols = SpatialCols(snapshots.front());
  SeparatedTensor<S> x(grid, rows, cols);
  for (Index flat = 0; flat < grid->TotalNodes(); flat++)
  {
    const std::vector<Index> node = grid->NodeOf(flat);
    auto &s = snapshots[static_cast<std::size_t>(flat)];
    if (SpatialRows(s) != rows || SpatialCols(s) != cols)
    {
      throw ShapeError("delta separation: snapshot at linear index " +
                       std::to_string(flat + 1) + " has a different dimension");
    }
    x.AddTerm(1.0, std::move(s), DeltaFactors(*grid, node));
  }
  return x;
}

std::string MultiIndexText(const ParametricGrid &grid, std::span<const Index> node)
{
  std::ostringstream out;
  out << "(";
  for (std::size_t j = 0; j < node.size(); j++)
  {
    out << (j ? "," : "") << node[j] + 1;
  }
  out << ") [linear index " << grid.FlatOf(node) + 1 << "]";
  return out.str();
}

}  // namespace

SepSparse DeltaSeparation(const GridPtr &grid, std::vector<SparseMatrix> snapshots)
{
  return DeltaSeparationImpl(grid, std::move(snapshots));
}

SepVector DeltaSeparation(const GridPtr &grid, std::vector<Eigen::VectorXd> snapshots)
{
  return DeltaSeparationImpl(grid, std::move(snapshots));
}

SampledOperators SeparateBySampling(const SnapshotSampler &sampler, const GridPtr &grid,
                                    const SamplingOptions &options)
{
  std::vector<SparseMatrix> K, M;
  std::vector<Eigen::VectorXd> F;
  bool all_loads = true;
  Index n_d = -1;
  for (Index flat = 0; flat < grid->TotalNodes(); flat++)
  {
    const std::vector<Index> node = grid->NodeOf(flat);
    Snapshot s = sampler(node);
    if (n_d < 0)
    {
      n_d = s.K.rows();
    }
    if (s.K.rows() != n_d || s.K.cols() != n_d || s.M.rows() != n_d || s.M.cols() != n_d ||
        (s.F && s.F->size() != n_d))
    {
      throw ShapeError("snapshot at multi-index " + MultiIndexText(*grid, node) +
                       " has a dimension different from n_d = " + std::to_string(n_d));
    }
    K.push_back(std::move(s.K));
    M.push_back(std::move(s.M));
    if (s.F)
    {
      F.push_back(std::move(*s.F));
    }
    else
    {
      all_loads = false;
    }
  }

  SampledOperators out;
  out.K = DeltaSeparation(grid, std::move(K));
  out.M = DeltaSeparation(grid, std::move(M));
  if (all_loads && !F.empty())
  {
    out.F = DeltaSeparation(grid, std::move(F));
  }
  if (options.compress)
  {
    out.K = SepCompress(out.K, options.k_compression, &out.k_report);
    out.M = SepCompress(out.M, options.m_compression, &out.m_report);
    if (out.F)
    {
      out.F = SepCompress(*out.F, options.k_compression);
    }
  }
  return out;
}

void ExportSnapshots(const SnapshotSampler &sampler, const ParametricGrid &grid,
                     const std::filesystem::path &dir)
{
  std::filesystem::create_directories(dir);
  bool loads = false;
  for (Index flat = 0; flat < grid.TotalNodes(); flat++)
  {
    const std::vector<Index> node = grid.NodeOf(flat);
    const Snapshot s = sampler(node);
    const std::string i = std::to_string(flat + 1);
    WriteMatrixMarket(s.K, dir / ("K_" + i + ".mtx"));
    WriteMatrixMarket(s.M, dir / ("M_" + i + ".mtx"));
    if (s.F)
    {
      WriteMatrixMarketVector(*s.F, dir / ("F_" + i + ".mtx"));
      loads = true;
    }
  }
  Json manifest = {{"format", "pgdir-snapshots"},
                   {"format_version", FormatVersion()},
                   {"grids", GridToJson(grid)},
                   {"naming", {{"K", "K_<i>.mtx"}, {"M", "M_<i>.mtx"}, {"F", "F_<i>.mtx"}}},
                   {"index", "1-based linear index, first parameter fastest"},
                   {"loads", loads}};
  WriteJsonFile(manifest, dir / "manifest.json");
}

ParametricGrid ReadSnapshotManifest(const std::filesystem::path &dir)
{
  const Json manifest = ReadJsonFile(dir / "manifest.json");
  CheckFormatVersion(manifest, (dir / "manifest.json").string());
  if (!manifest.contains("grids"))
  {
    throw ParseError((dir / "manifest.json").string() + ": missing field 'grids'");
  }
  return GridFromJson(manifest.at("grids"));
}

SnapshotSampler IngestExternalSnapshots(const std::filesystem::path &dir,
                                        const ParametricGrid &grid)
{
  if (!std::filesystem::is_directory(dir))
  {
    throw MissingInput("snapshot directory " + dir.string() + " does not exist");
  }
  if (std::filesystem::exists(dir / "manifest.json"))
  {
    const ParametricGrid stored = ReadSnapshotManifest(dir);
    if (!(stored == grid))
    {
      throw ShapeError("snapshot manifest in " + dir.string() +
                       " describes a different parametric grid");
    }
  }
  auto n_d = std::make_shared<Index>(-1);
  return [dir, grid, n_d](std::span<const Index> node) -> Snapshot
  {
    const Index i = grid.FlatOf(node) + 1;
    auto read = [&](const std::string &kind) -> SparseMatrix
    {
      const auto path = dir / (kind + "_" + std::to_string(i) + ".mtx");
      if (!std::filesystem::exists(path))
      {
        throw MissingInput("missing snapshot " + path.string() + " for multi-index " +
                           MultiIndexText(grid, node));
      }
      MatrixMarketInfo info;
      SparseMatrix A = ReadMatrixMarket(path, &info);
      if (info.symmetry != MatrixSymmetry::Symmetric)
      {
        throw ParseError(path.string() + ":1: snapshot matrices must use symmetric storage");
      }
      if (*n_d < 0)
      {
        *n_d = A.rows();
      }
      if (A.rows() != *n_d)
      {
        throw ShapeError(path.string() + ": dimension " + std::to_string(A.rows()) +
                         " differs from n_d = " + std::to_string(*n_d));
      }
      return A;
    };
    Snapshot s;
    s.K = read("K");
    s.M = read("M");
    const auto fpath = dir / ("F_" + std::to_string(i) + ".mtx");
    if (std::filesystem::exists(fpath))
    {
      s.F = ReadMatrixMarketVector(fpath);
      if (s.F->size() != *n_d)
      {
        throw ShapeError(fpath.string() + ": load length differs from n_d");
      }
    }
    return s;
  };
}

}  // namespace pgdir
