// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include "pgdir/error.hpp"
#include "pgdir/fem.hpp"

namespace pgdir
{

Snapshot Problem::Assemble(std::span<const double> mu) const
{
  grid_->CheckValues(mu);
  const Mesh mesh = MeshAt(mu);
  const std::vector<Material> materials = MaterialsAt(mu);
  Snapshot s;
  s.K = AssembleStiffness(mesh, materials);
  s.M = AssembleMass(mesh, materials);
  s.F = AssembleForce(mesh, loads_);
  return s;
}

SnapshotSampler Problem::Sampler() const
{
  return [this](std::span<const Index> node) { return Assemble(grid_->Values(node)); };
}

void Problem::ReplaceMesh(Mesh mesh)
{
  if (mesh.NumSubdomains() != mesh_.NumSubdomains())
  {
    throw AssemblyError("mesh has " + std::to_string(mesh.NumSubdomains()) +
                        " subdomains, the " + Name() + " fixture needs " +
                        std::to_string(mesh_.NumSubdomains()));
  }
  auto move = [&](Index node) { return mesh.NearestNode(mesh_.Node(node)); };
  for (auto &l : loads_)
  {
    l.node = move(l.node);
  }
  for (auto &d : reference_.dofs)
  {
    d = Dof(move(d / 3), static_cast<int>(d % 3));
  }
  if (probe_.pair)
  {
    probe_.pair->p = move(probe_.pair->p);
    probe_.pair->q = move(probe_.pair->q);
  }
  if (probe_.twist)
  {
    auto &t = *probe_.twist;
    t.a = move(t.a);
    t.b = move(t.b);
    t.c = move(t.c);
    t.d = move(t.d);
  }
  mesh_ = std::move(mesh);
}

void Problem::SetGrid(GridPtr grid)
{
  if (!grid)
  {
    throw ShapeError("problem needs a parametric grid");
  }
  grid_ = std::move(grid);
}

void Problem::SetLoads(std::vector<PointLoad> loads)
{
  for (const auto &l : loads)
  {
    if (l.node < 0 || l.node >= mesh_.NumNodes())
    {
      throw AssemblyError("load references node " + std::to_string(l.node) +
                          " outside the mesh");
    }
  }
  loads_ = std::move(loads);
}

void Problem::SetProbe(QoIProbe probe)
{
  probe.Validate(mesh_.NumNodes());
  probe_ = probe;
}

void Problem::SetObjective(ObjectiveSpec spec)
{
  spec.Validate();
  objective_ = std::move(spec);
}

Mesh StructuredTetMesh(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs,
                       const std::function<int(const Eigen::Vector3d &)> &label, bool mirror_x)
{
  const Index nx = static_cast<Index>(xs.size()), ny = static_cast<Index>(ys.size()),
              nz = static_cast<Index>(zs.size());
  if (nx < 2 || ny < 2 || nz < 2)
  {
    throw AssemblyError("structured mesh needs at least two coordinates per axis");
  }
  auto id = [&](Index i, Index j, Index k) { return i + nx * (j + ny * k); };

  // Kuhn split: one tetrahedron per axis permutation along the 000 -> 111 diagonal.
  static const std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<Eigen::Vector3d> all_nodes(static_cast<std::size_t>(nx * ny * nz));
  for (Index k = 0; k < nz; k++)
  {
    for (Index j = 0; j < ny; j++)
    {
      for (Index i = 0; i < nx; i++)
      {
        all_nodes[static_cast<std::size_t>(id(i, j, k))] =
            Eigen::Vector3d(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)],
                            zs[static_cast<std::size_t>(k)]);
      }
    }
  }

  std::vector<Tet> tets;
  std::vector<int> labels;
  for (Index k = 0; k + 1 < nz; k++)
  {
    for (Index j = 0; j + 1 < ny; j++)
    {
      for (Index i = 0; i + 1 < nx; i++)
      {
        const Eigen::Vector3d centre =
            0.5 * (all_nodes[static_cast<std::size_t>(id(i, j, k))] +
                   all_nodes[static_cast<std::size_t>(id(i + 1, j + 1, k + 1))]);
        const int sub = label(centre);
        if (sub < 0)
        {
          continue;
        }
        const bool mirror = mirror_x && centre.x() < 0.0;
        auto vertex = [&](std::array<int, 3> c)
        {
          const Index a = mirror ? 1 - c[0] : c[0];
          return id(i + a, j + c[1], k + c[2]);
        };
        for (const auto &p : perms)
        {
          std::array<int, 3> c = {0, 0, 0};
          Tet t;
          t[0] = vertex(c);
          c[static_cast<std::size_t>(p[0])] = 1;
          t[1] = vertex(c);
          c[static_cast<std::size_t>(p[1])] = 1;
          t[2] = vertex(c);
          t[3] = vertex({1, 1, 1});
          std::array<Eigen::Vector3d, 4> x;
          for (int v = 0; v < 4; v++)
          {
            x[static_cast<std::size_t>(v)] = all_nodes[static_cast<std::size_t>(t[v])];
          }
          if (TetSignedVolume(x) < 0.0)
          {
            std::swap(t[2], t[3]);
          }
          tets.push_back(t);
          labels.push_back(sub);
        }
      }
    }
  }

  // Drop nodes not referenced by any element (e.g. inside an opening).
  std::vector<Index> remap(all_nodes.size(), -1);
  for (const auto &t : tets)
  {
    for (Index v : t)
    {
      remap[static_cast<std::size_t>(v)] = 0;
    }
  }
  std::vector<Eigen::Vector3d> nodes;
  for (std::size_t n = 0; n < all_nodes.size(); n++)
  {
    if (remap[n] == 0)
    {
      remap[n] = static_cast<Index>(nodes.size());
      nodes.push_back(all_nodes[n]);
    }
  }
  for (auto &t : tets)
  {
    for (auto &v : t)
    {
      v = remap[static_cast<std::size_t>(v)];
    }
  }
  return Mesh(std::move(nodes), std::move(tets), std::move(labels));
}

namespace
{

std::vector<double> Range(double a, double b, double h)
{
  std::vector<double> v;
  const auto n = static_cast<Index>(std::llround((b - a) / h));
  for (Index k = 0; k <= n; k++)
  {
    v.push_back(a + h * static_cast<double>(k));
  }
  return v;
}

std::vector<Eigen::VectorXd> OnesFactors(const ParametricGrid &grid)
{
  std::vector<Eigen::VectorXd> f;
  for (int j = 0; j < grid.NumParams(); j++)
  {
    f.push_back(Eigen::VectorXd::Ones(grid.Size(j)));
  }
  return f;
}

Eigen::VectorXd AxisValues(const ParameterAxis &axis)
{
  return Eigen::Map<const Eigen::VectorXd>(axis.nodes.data(), axis.Size());
}

}  // namespace

BlockProblem::BlockProblem(Options options, GridPtr grid) : options_(std::move(options))
{
  const double hx = options_.inclusion_half_x, hy = options_.inclusion_half_y;
  mesh_ = StructuredTetMesh(options_.xs, options_.ys, options_.zs,
                            [hx, hy](const Eigen::Vector3d &c)
                            { return (std::abs(c.x()) < hx && std::abs(c.y()) < hy) ? 0 : 1; });
  SetGrid(std::move(grid));
  if (grid_->NumParams() != 2)
  {
    throw ShapeError("block problem has two parameters (mu, theta)");
  }
  const Index p = mesh_.NearestNode(options_.p), q = mesh_.NearestNode(options_.q);
  SetLoads({PointLoad(p, Eigen::Vector3d::UnitZ(), options_.load),
            PointLoad(q, -Eigen::Vector3d::UnitZ(), options_.load)});
  // Reference nodes on the face x = lx / 2 and on the line y = 0, which the morph leaves
  // in place; the rigid modes are then affine in theta.
  const double x0 = options_.xs.front(), x1 = options_.xs.back();
  const double y0 = options_.ys.front(), y1 = options_.ys.back(), z0 = options_.zs.front();
  SetReference(ReferenceSet321(mesh_, mesh_.NearestNode({x1, y0, z0}),
                               mesh_.NearestNode({x1, y1, z0}),
                               mesh_.NearestNode({x0, 0.0, z0})));
  QoIProbe probe;
  probe.pair = PairProbe{p, q};
  SetProbe(probe);
}

Mesh BlockProblem::MeshAt(std::span<const double> mu) const
{
  return options_.morph.Apply(mesh_, mu[1]);
}

std::vector<Material> BlockProblem::MaterialsAt(std::span<const double> mu) const
{
  return {Material{mu[0], options_.poisson_ratio, options_.density},
          Material{options_.outer_modulus, options_.poisson_ratio, options_.density}};
}

SeparatedOperators BlockProblem::SeparateAnalytic() const
{
  const ParametricGrid &grid = *grid_;
  const Index n = mesh_.NumDofs();
  SeparatedOperators ops{SepSparse(grid_, n, n), SepSparse(grid_, n, n), SepVector(grid_, n)};
  const std::vector<Material> unit = {Material{1.0, options_.poisson_ratio, options_.density},
                                      Material{1.0, options_.poisson_ratio, options_.density}};
  const std::vector<double> scale_a = {1.0, 0.0}, scale_b = {0.0, 1.0};
  const Eigen::VectorXd mu = AxisValues(grid.Axis(0));
  const Eigen::VectorXd outer = Eigen::VectorXd::Constant(grid.Size(0), options_.outer_modulus);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.Size(0));
  for (Index p = 0; p < grid.Size(1); p++)
  {
    const Mesh mesh = options_.morph.Apply(mesh_, grid.Axis(1).nodes[static_cast<std::size_t>(p)]);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(grid.Size(1));
    delta(p) = 1.0;
    ops.K.AddTerm(1.0, AssembleStiffness(mesh, unit, scale_a), {mu, delta});
    ops.K.AddTerm(1.0, AssembleStiffness(mesh, unit, scale_b), {outer, delta});
    ops.M.AddTerm(1.0, AssembleMass(mesh, unit), {ones, delta});
  }
  ops.F.AddTerm(1.0, AssembleForce(mesh_, loads_), OnesFactors(grid));
  return ops;
}

FrameProblem::FrameProblem(Options options, GridPtr grid) : options_(std::move(options))
{
  const double L = options_.length, W = options_.width, m = options_.opening_margin;
  mesh_ = StructuredTetMesh(Range(0.0, L, options_.spacing), Range(0.0, W, options_.spacing),
                            Range(0.0, options_.height, options_.height),
                            [L, W, m](const Eigen::Vector3d &c)
                            {
                              const bool end_x = c.x() < m || c.x() > L - m;
                              const bool side_y = c.y() < m || c.y() > W - m;
                              if (!end_x && !side_y)
                              {
                                return -1;  // opening
                              }
                              if (end_x && side_y)
                              {
                                return 0;   // corner blocks
                              }
                              if (side_y)
                              {
                                return 1;   // rails
                              }
                              return c.x() < m ? 2 : 3;  // front / rear cross member
                            },
                            false);
  SetGrid(std::move(grid));
  if (grid_->NumParams() != 3)
  {
    throw ShapeError("frame problem has three parameters");
  }
  const double h = options_.height, f = options_.couple_force;
  const Index a = mesh_.NearestNode({0.0, 0.0, h}), b = mesh_.NearestNode({0.0, W, h});
  const Index c = mesh_.NearestNode({L, 0.0, h}), d = mesh_.NearestNode({L, W, h});
  const Eigen::Vector3d ez = Eigen::Vector3d::UnitZ();
  SetLoads({PointLoad(a, ez, f), PointLoad(b, -ez, f), PointLoad(c, -ez, f),
            PointLoad(d, ez, f)});
  const double xm = 0.5 * L;
  SetReference(ReferenceSet321(mesh_, mesh_.NearestNode({xm, 0.0, 0.0}),
                               mesh_.NearestNode({xm, W, 0.0}),
                               mesh_.NearestNode({xm - options_.spacing, 0.0, 0.0})));
  QoIProbe probe;
  probe.twist = TwistProbe{a, b, c, d, W, W};
  SetProbe(probe);
  SetObjective(ObjectiveSpec{{12.0, 2.0, 2.0}, options_.material.density, 1.0e-3});
}

Mesh FrameProblem::MeshAt(std::span<const double>) const
{
  return mesh_;
}

std::vector<Material> FrameProblem::MaterialsAt(std::span<const double> mu) const
{
  std::vector<Material> out = {options_.material};
  for (int j = 0; j < 3; j++)
  {
    Material m = options_.material;
    m.young_modulus *= mu[static_cast<std::size_t>(j)];
    m.density *= mu[static_cast<std::size_t>(j)];
    out.push_back(m);
  }
  return out;
}

SeparatedOperators FrameProblem::SeparateAnalytic() const
{
  const ParametricGrid &grid = *grid_;
  const Index n = mesh_.NumDofs();
  SeparatedOperators ops{SepSparse(grid_, n, n), SepSparse(grid_, n, n), SepVector(grid_, n)};
  const std::vector<Material> materials(4, options_.material);
  for (int sub = 0; sub < 4; sub++)
  {
    std::vector<double> scale(4, 0.0);
    scale[static_cast<std::size_t>(sub)] = 1.0;
    std::vector<Eigen::VectorXd> factors = OnesFactors(grid);
    if (sub > 0)
    {
      factors[static_cast<std::size_t>(sub - 1)] = AxisValues(grid.Axis(sub - 1));
    }
    ops.K.AddTerm(1.0, AssembleStiffness(mesh_, materials, scale), factors);
    ops.M.AddTerm(1.0, AssembleMass(mesh_, materials, scale), factors);
  }
  ops.F.AddTerm(1.0, AssembleForce(mesh_, loads_), OnesFactors(grid));
  return ops;
}

std::unique_ptr<BlockProblem> MakeBlock()
{
  BlockProblem::Options o;
  o.xs = Range(-3.0, 3.0, 1.0);
  o.ys = Range(-6.0, 6.0, 1.0);
  o.zs = {-0.5, 0.0, 0.5};
  auto grid = std::make_shared<const ParametricGrid>(std::vector<ParameterAxis>{
      ParameterAxis::Uniform("mu", 10.0, 410.0, 41),
      ParameterAxis::Uniform("theta", 0.0, 0.5, 21)});
  return std::make_unique<BlockProblem>(std::move(o), std::move(grid));
}

std::unique_ptr<BlockProblem> MakeMiniBlock()
{
  BlockProblem::Options o;
  o.xs = {-3.0, -2.0, -1.0, 1.0, 2.0, 3.0};
  o.ys = {-6.0, -3.0, 0.0, 3.0, 6.0};
  o.zs = {-0.5, 0.5};
  auto grid = std::make_shared<const ParametricGrid>(std::vector<ParameterAxis>{
      ParameterAxis::Uniform("mu", 10.0, 410.0, 5),
      ParameterAxis::Uniform("theta", 0.0, 0.5, 5)});
  return std::make_unique<BlockProblem>(std::move(o), std::move(grid));
}

std::unique_ptr<FrameProblem> MakeFrame()
{
  std::vector<ParameterAxis> axes;
  for (const char *name : {"t_rails", "t_front", "t_rear"})
  {
    axes.push_back(ParameterAxis::Uniform(name, 0.7, 1.5, 9));
  }
  return std::make_unique<FrameProblem>(FrameProblem::Options{},
                                        std::make_shared<const ParametricGrid>(std::move(axes)));
}

std::unique_ptr<Problem> MakeFixture(const std::string &name)
{
  if (name == "block")
  {
    return MakeBlock();
  }
  if (name == "mini")
  {
    return MakeMiniBlock();
  }
  if (name == "frame")
  {
    return MakeFrame();
  }
  throw RangeError("unknown fixture '" + name + "' (expected block, mini or frame)");
}

}  // namespace pgdir
