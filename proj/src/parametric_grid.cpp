// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/parametric_grid.hpp"

#include <algorithm>
#include <sstream>
#include "pgdir/error.hpp"

namespace pgdir
{

ParameterAxis ParameterAxis::Uniform(std::string name, double lower, double upper, Index n)
{
  if (n < 2 || !(upper > lower))
  {
    throw RangeError("parameter axis '" + name + "' needs n >= 2 and upper > lower");
  }
  ParameterAxis axis;
  axis.name = std::move(name);
  axis.lower = lower;
  axis.upper = upper;
  axis.nodes.resize(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; k++)
  {
    axis.nodes[static_cast<std::size_t>(k)] =
        lower + (upper - lower) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  axis.nodes.back() = upper;
  return axis;
}

ParametricGrid::ParametricGrid(std::vector<ParameterAxis> axes) : axes_(std::move(axes))
{
  for (const auto &a : axes_)
  {
    if (a.nodes.size() < 2)
    {
      throw RangeError("parameter axis '" + a.name + "' needs at least 2 nodes");
    }
    if (!(a.upper > a.lower))
    {
      throw RangeError("parameter axis '" + a.name + "' has an empty interval");
    }
    for (std::size_t k = 0; k < a.nodes.size(); k++)
    {
      if (a.nodes[k] < a.lower || a.nodes[k] > a.upper)
      {
        throw RangeError("parameter axis '" + a.name + "' has a node outside its interval");
      }
      if (k > 0 && !(a.nodes[k] > a.nodes[k - 1]))
      {
        throw RangeError("parameter axis '" + a.name + "' nodes are not strictly increasing");
      }
    }
  }
}

Index ParametricGrid::TotalNodes() const
{
  Index n = 1;
  for (const auto &a : axes_)
  {
    n *= a.Size();
  }
  return n;
}

Index ParametricGrid::LinearIndex(std::span<const Index> p) const
{
  if (static_cast<int>(p.size()) != NumParams())
  {
    throw RangeError("multi-index has " + std::to_string(p.size()) + " components, expected " +
                     std::to_string(NumParams()));
  }
  Index i = 1, stride = 1;
  for (int j = 0; j < NumParams(); j++)
  {
    const Index pj = p[static_cast<std::size_t>(j)];
    if (pj < 1 || pj > Size(j))
    {
      throw RangeError("multi-index component " + std::to_string(j + 1) + " = " +
                       std::to_string(pj) + " outside 1.." + std::to_string(Size(j)));
    }
    i += (pj - 1) * stride;
    stride *= Size(j);
  }
  return i;
}

std::vector<Index> ParametricGrid::MultiIndex(Index i) const
{
  if (i < 1 || i > TotalNodes())
  {
    throw RangeError("linear index " + std::to_string(i) + " outside 1.." +
                     std::to_string(TotalNodes()));
  }
  std::vector<Index> p = NodeOf(i - 1);
  for (auto &v : p)
  {
    v += 1;
  }
  return p;
}

std::vector<Index> ParametricGrid::NodeOf(Index flat) const
{
  std::vector<Index> node(static_cast<std::size_t>(NumParams()));
  for (int j = 0; j < NumParams(); j++)
  {
    node[static_cast<std::size_t>(j)] = flat % Size(j);
    flat /= Size(j);
  }
  return node;
}

Index ParametricGrid::FlatOf(std::span<const Index> node) const
{
  CheckNode(node);
  Index flat = 0, stride = 1;
  for (int j = 0; j < NumParams(); j++)
  {
    flat += node[static_cast<std::size_t>(j)] * stride;
    stride *= Size(j);
  }
  return flat;
}

std::vector<double> ParametricGrid::Values(std::span<const Index> node) const
{
  CheckNode(node);
  std::vector<double> v(node.size());
  for (int j = 0; j < NumParams(); j++)
  {
    v[static_cast<std::size_t>(j)] =
        Axis(j).nodes[static_cast<std::size_t>(node[static_cast<std::size_t>(j)])];
  }
  return v;
}

std::vector<Index> ParametricGrid::MidpointNode() const
{
  std::vector<Index> node;
  for (const auto &a : axes_)
  {
    node.push_back((a.Size() - 1) / 2);
  }
  return node;
}

AxisLocation ParametricGrid::Locate(int j, double value) const
{
  const ParameterAxis &a = Axis(j);
  if (!(value >= a.lower && value <= a.upper))
  {
    std::ostringstream msg;
    msg << "parameter '" << a.name << "' = " << value << " outside [" << a.lower << ", "
        << a.upper << "]";
    throw RangeError(msg.str());
  }
  const auto it = std::lower_bound(a.nodes.begin(), a.nodes.end(), value);
  if (it != a.nodes.end() && *it == value)
  {
    return {static_cast<Index>(it - a.nodes.begin()), 0.0};
  }
  // Closed interval may extend beyond the outer nodes; clamp there.
  if (it == a.nodes.begin())
  {
    return {0, 0.0};
  }
  if (it == a.nodes.end())
  {
    return {a.Size() - 1, 0.0};
  }
  const Index k = static_cast<Index>(it - a.nodes.begin()) - 1;
  const double x0 = a.nodes[static_cast<std::size_t>(k)];
  const double x1 = a.nodes[static_cast<std::size_t>(k + 1)];
  return {k, (value - x0) / (x1 - x0)};
}

void ParametricGrid::CheckNode(std::span<const Index> node) const
{
  if (static_cast<int>(node.size()) != NumParams())
  {
    throw RangeError("node index has " + std::to_string(node.size()) +
                     " components, expected " + std::to_string(NumParams()));
  }
  for (int j = 0; j < NumParams(); j++)
  {
    const Index p = node[static_cast<std::size_t>(j)];
    if (p < 0 || p >= Size(j))
    {
      throw RangeError("node index " + std::to_string(p) + " of parameter '" + Axis(j).name +
                       "' outside 0.." + std::to_string(Size(j) - 1));
    }
  }
}

void ParametricGrid::CheckValues(std::span<const double> values) const
{
  if (static_cast<int>(values.size()) != NumParams())
  {
    throw RangeError("expected " + std::to_string(NumParams()) + " parameter values, got " +
                     std::to_string(values.size()));
  }
  for (int j = 0; j < NumParams(); j++)
  {
    Locate(j, values[static_cast<std::size_t>(j)]);
  }
}

double Interpolate(const Eigen::VectorXd &factor, const AxisLocation &loc)
{
  if (loc.weight == 0.0)
  {
    return factor(loc.node);
  }
  return (1.0 - loc.weight) * factor(loc.node) + loc.weight * factor(loc.node + 1);
}

}  // namespace pgdir
