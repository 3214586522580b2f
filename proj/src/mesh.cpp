// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <Eigen/LU>
#include "pgdir/error.hpp"

namespace pgdir
{

void Material::Validate() const
{
  if (!(young_modulus > 0.0))
  {
    throw AssemblyError("material: Young modulus must be positive, got " +
                        std::to_string(young_modulus));
  }
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5))
  {
    throw AssemblyError("material: Poisson ratio must lie in (-1, 0.5), got " +
                        std::to_string(poisson_ratio));
  }
  if (!(density >= 0.0))
  {
    throw AssemblyError("material: density must be non-negative, got " +
                        std::to_string(density));
  }
}

PointLoad::PointLoad(Index node, const Eigen::Vector3d &direction, double magnitude)
  : node(node), direction(direction), magnitude(magnitude)
{
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n))
  {
    throw AssemblyError("point load on node " + std::to_string(node) +
                        " has a zero or non-finite direction");
  }
  this->direction /= n;
}

double TetSignedVolume(const std::array<Eigen::Vector3d, 4> &x)
{
  Eigen::Matrix3d edges;
  edges.col(0) = x[1] - x[0];
  edges.col(1) = x[2] - x[0];
  edges.col(2) = x[3] - x[0];
  return edges.determinant() / 6.0;
}

Mesh::Mesh(std::vector<Eigen::Vector3d> nodes, std::vector<Tet> elements,
           std::vector<int> subdomains)
  : nodes_(std::move(nodes)), elements_(std::move(elements)),
    subdomains_(std::move(subdomains))
{
  if (subdomains_.size() != elements_.size())
  {
    throw AssemblyError("mesh: " + std::to_string(elements_.size()) + " elements but " +
                        std::to_string(subdomains_.size()) + " subdomain labels");
  }
  Validate();
}

void Mesh::Validate()
{
  const Index n = NumNodes();
  for (std::size_t e = 0; e < elements_.size(); e++)
  {
    for (Index v : elements_[e])
    {
      if (v < 0 || v >= n)
      {
        throw AssemblyError("mesh: element " + std::to_string(e) + " references node " +
                            std::to_string(v) + " but the mesh has " + std::to_string(n) +
                            " nodes");
      }
    }
  }

  // Labels must be exactly {0, ..., k-1}.
  std::vector<int> labels(subdomains_);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (std::size_t i = 0; i < labels.size(); i++)
  {
    if (labels[i] != static_cast<int>(i))
    {
      throw AssemblyError("mesh: subdomain labels must form a contiguous set starting at 0");
    }
  }
  num_subdomains_ = static_cast<int>(labels.size());

  const double tol = VolumeTolerance();
  for (Index e = 0; e < NumElements(); e++)
  {
    const double v = SignedVolume(e);
    if (!(v > tol))
    {
      std::ostringstream msg;
      msg << "mesh: element " << e << " is degenerate or inverted (signed volume "
          << std::setprecision(6) << v << ", tolerance " << tol << ")";
      throw AssemblyError(msg.str());
    }
  }
}

std::array<Eigen::Vector3d, 4> Mesh::ElementCoordinates(Index e) const
{
  const Tet &t = Element(e);
  return {Node(t[0]), Node(t[1]), Node(t[2]), Node(t[3])};
}

double Mesh::SignedVolume(Index e) const
{
  return TetSignedVolume(ElementCoordinates(e));
}

double Mesh::TotalVolume() const
{
  double v = 0.0;
  for (Index e = 0; e < NumElements(); e++)
  {
    v += SignedVolume(e);
  }
  return v;
}

double Mesh::BoundingBoxDiagonal() const
{
  if (nodes_.empty())
  {
    return 0.0;
  }
  Eigen::Vector3d lo = nodes_.front(), hi = nodes_.front();
  for (const auto &x : nodes_)
  {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return (hi - lo).norm();
}

double Mesh::VolumeTolerance() const
{
  const double d = BoundingBoxDiagonal();
  return 1.0e-12 * d * d * d;
}

Mesh Mesh::WithNodes(std::vector<Eigen::Vector3d> nodes) const
{
  if (nodes.size() != nodes_.size())
  {
    throw AssemblyError("mesh: replacement coordinates have " +
                        std::to_string(nodes.size()) + " nodes, expected " +
                        std::to_string(nodes_.size()));
  }
  return Mesh(std::move(nodes), elements_, subdomains_);
}

Index Mesh::NearestNode(const Eigen::Vector3d &p) const
{
  Index best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < NumNodes(); i++)
  {
    const double d = (Node(i) - p).squaredNorm();
    if (d < best_d)
    {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace
{

// Reads the next non-empty, non-comment line. Returns false at EOF.
bool NextLine(std::istream &in, std::string &line, int &lineno)
{
  while (std::getline(in, line))
  {
    lineno++;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
    {
      continue;
    }
    return true;
  }
  return false;
}

[[noreturn]] void Fail(const std::filesystem::path &path, int lineno, const std::string &what)
{
  throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + what);
}

Index ReadHeader(std::istream &in, const std::filesystem::path &path, int &lineno,
                 const std::string &keyword)
{
  std::string line;
  if (!NextLine(in, line, lineno))
  {
    Fail(path, lineno, "expected '" + keyword + " <count>' header, got end of file");
  }
  std::istringstream ss(line);
  std::string word;
  long long count = -1;
  if (!(ss >> word >> count) || word != keyword || count < 0)
  {
    Fail(path, lineno, "expected '" + keyword + " <count>' header");
  }
  return static_cast<Index>(count);
}

}  // namespace

Mesh ReadMesh(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw MissingInput("cannot open mesh file " + path.string());
  }
  int lineno = 0;
  std::string line;

  const Index nn = ReadHeader(in, path, lineno, "nodes");
  std::vector<Eigen::Vector3d> nodes(static_cast<std::size_t>(nn));
  for (auto &x : nodes)
  {
    if (!NextLine(in, line, lineno))
    {
      Fail(path, lineno, "unexpected end of file in node block");
    }
    std::istringstream ss(line);
    if (!(ss >> x(0) >> x(1) >> x(2)))
    {
      Fail(path, lineno, "expected 'x y z'");
    }
  }

  const Index ne = ReadHeader(in, path, lineno, "tets");
  std::vector<Tet> elements(static_cast<std::size_t>(ne));
  std::vector<int> labels(static_cast<std::size_t>(ne));
  for (std::size_t e = 0; e < elements.size(); e++)
  {
    if (!NextLine(in, line, lineno))
    {
      Fail(path, lineno, "unexpected end of file in element block");
    }
    std::istringstream ss(line);
    long long v[4];
    int label;
    if (!(ss >> v[0] >> v[1] >> v[2] >> v[3] >> label))
    {
      Fail(path, lineno, "expected 'n0 n1 n2 n3 subdomain'");
    }
    elements[e] = {static_cast<Index>(v[0]), static_cast<Index>(v[1]),
                   static_cast<Index>(v[2]), static_cast<Index>(v[3])};
    labels[e] = label;
  }
  return Mesh(std::move(nodes), std::move(elements), std::move(labels));
}

void WriteMesh(const Mesh &mesh, const std::filesystem::path &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw Error("cannot write mesh file " + path.string());
  }
  out << std::setprecision(17);
  out << "nodes " << mesh.NumNodes() << "\n";
  for (const auto &x : mesh.Nodes())
  {
    out << x(0) << " " << x(1) << " " << x(2) << "\n";
  }
  out << "tets " << mesh.NumElements() << "\n";
  for (Index e = 0; e < mesh.NumElements(); e++)
  {
    const Tet &t = mesh.Element(e);
    out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << " " << mesh.Subdomain(e)
        << "\n";
  }
}

std::vector<PointLoad> ReadLoads(const std::filesystem::path &path, Index num_nodes)
{
  std::ifstream in(path);
  if (!in)
  {
    throw MissingInput("cannot open loads file " + path.string());
  }
  std::vector<PointLoad> loads;
  std::string line;
  int lineno = 0;
  while (NextLine(in, line, lineno))
  {
    std::istringstream ss(line);
    long long node;
    Eigen::Vector3d d;
    double mag;
    if (!(ss >> node >> d(0) >> d(1) >> d(2) >> mag))
    {
      Fail(path, lineno, "expected 'node dx dy dz magnitude'");
    }
    if (node < 0 || node >= num_nodes)
    {
      Fail(path, lineno, "load node " + std::to_string(node) + " out of range");
    }
    loads.emplace_back(static_cast<Index>(node), d, mag);
  }
  return loads;
}

void WriteLoads(std::span<const PointLoad> loads, const std::filesystem::path &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw Error("cannot write loads file " + path.string());
  }
  out << std::setprecision(17);
  for (const auto &l : loads)
  {
    out << l.node << " " << l.direction(0) << " " << l.direction(1) << " " << l.direction(2)
        << " " << l.magnitude << "\n";
  }
}

}  // namespace pgdir
