// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_MESH_HPP
#define PGDIR_MESH_HPP

#include <array>
#include <filesystem>
#include <span>
#include <vector>
#include <Eigen/Core>

namespace pgdir
{

using Index = Eigen::Index;
using Tet = std::array<Index, 4>;

// Isotropic linear-elastic material.
struct Material
{
  double young_modulus = 1.0;
  double poisson_ratio = 0.0;
  double density = 0.0;

  // Throws AssemblyError unless E > 0, -1 < nu < 0.5 and rho >= 0.
  void Validate() const;
};

// Concentrated nodal force. The direction is normalized on construction.
struct PointLoad
{
  Index node = 0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
  double magnitude = 0.0;

  PointLoad() = default;
  PointLoad(Index node, const Eigen::Vector3d &direction, double magnitude);

  Eigen::Vector3d Force() const { return magnitude * direction; }
};

//
// Linear tetrahedral mesh with per-element subdomain labels. Construction validates the
// connectivity, the label set (contiguous from 0) and element orientation; a Mesh object
// is therefore always usable for assembly. Node coordinates can be replaced (morphing)
// through WithNodes(), which re-runs the validation.
//
class Mesh
{
public:
  Mesh() = default;
  Mesh(std::vector<Eigen::Vector3d> nodes, std::vector<Tet> elements,
       std::vector<int> subdomains);

  Index NumNodes() const { return static_cast<Index>(nodes_.size()); }
  Index NumElements() const { return static_cast<Index>(elements_.size()); }
  Index NumDofs() const { return 3 * NumNodes(); }
  int NumSubdomains() const { return num_subdomains_; }

  const std::vector<Eigen::Vector3d> &Nodes() const { return nodes_; }
  const std::vector<Tet> &Elements() const { return elements_; }
  const std::vector<int> &Subdomains() const { return subdomains_; }
  const Eigen::Vector3d &Node(Index i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const Tet &Element(Index e) const { return elements_[static_cast<std::size_t>(e)]; }
  int Subdomain(Index e) const { return subdomains_[static_cast<std::size_t>(e)]; }

  std::array<Eigen::Vector3d, 4> ElementCoordinates(Index e) const;
  double SignedVolume(Index e) const;
  double TotalVolume() const;
  double BoundingBoxDiagonal() const;

  // Elements with volume below this value are rejected as degenerate.
  double VolumeTolerance() const;

  // Same connectivity and labels, new coordinates. Throws AssemblyError on inversion.
  Mesh WithNodes(std::vector<Eigen::Vector3d> nodes) const;

  // Index of the node closest to p (lowest index on ties).
  Index NearestNode(const Eigen::Vector3d &p) const;

private:
  void Validate();

  std::vector<Eigen::Vector3d> nodes_;
  std::vector<Tet> elements_;
  std::vector<int> subdomains_;
  int num_subdomains_ = 0;
};

double TetSignedVolume(const std::array<Eigen::Vector3d, 4> &x);

// Text format:
//   nodes N
//   x y z            (N lines)
//   tets M
//   n0 n1 n2 n3 sub  (M lines, 0-based node indices)
// Blank lines and lines starting with '#' are ignored.
Mesh ReadMesh(const std::filesystem::path &path);
void WriteMesh(const Mesh &mesh, const std::filesystem::path &path);

// Loads file: one "node dx dy dz magnitude" record per line.
std::vector<PointLoad> ReadLoads(const std::filesystem::path &path, Index num_nodes);
void WriteLoads(std::span<const PointLoad> loads, const std::filesystem::path &path);

}  // namespace pgdir

#endif  // PGDIR_MESH_HPP
