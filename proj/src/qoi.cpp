// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/qoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include "pgdir/error.hpp"

namespace pgdir
{

namespace
{

void CheckNode(Index node, Index num_nodes, const char *what)
{
  if (node < 0 || node >= num_nodes)
  {
    throw RangeError(std::string(what) + " node " + std::to_string(node) +
                     " outside the mesh (" + std::to_string(num_nodes) + " nodes)");
  }
}

double Uz(const Eigen::VectorXd &U, Index node)
{
  const Index dof = Dof(node, 2);
  if (node < 0 || dof >= U.size())
  {
    throw RangeError("probe node " + std::to_string(node) + " outside the displacement field");
  }
  return U(dof);
}

}  // namespace

void QoIProbe::Validate(Index num_nodes) const
{
  if (pair)
  {
    CheckNode(pair->p, num_nodes, "probe P");
    CheckNode(pair->q, num_nodes, "probe Q");
  }
  if (twist)
  {
    CheckNode(twist->a, num_nodes, "probe A");
    CheckNode(twist->b, num_nodes, "probe B");
    CheckNode(twist->c, num_nodes, "probe C");
    CheckNode(twist->d, num_nodes, "probe D");
    if (!(twist->l_ab > 0.0) || !(twist->l_cd > 0.0))
    {
      throw RangeError("twist probe span lengths must be positive");
    }
  }
}

void ObjectiveSpec::Validate() const
{
  if (areas.empty())
  {
    throw RangeError("objective spec needs component areas");
  }
  for (double a : areas)
  {
    if (!(a > 0.0))
    {
      throw RangeError("objective spec areas must be positive");
    }
  }
  if (!(density >= 0.0))
  {
    throw RangeError("objective spec density must be non-negative");
  }
}

double DeltaUz(const Eigen::VectorXd &U, Index p, Index q)
{
  return Uz(U, p) - Uz(U, q);
}

TwistAngles Twist(const Eigen::VectorXd &U, const TwistProbe &probe)
{
  TwistAngles t;
  t.front = (std::abs(Uz(U, probe.a)) + std::abs(Uz(U, probe.b))) / probe.l_ab;
  t.rear = (std::abs(Uz(U, probe.c)) + std::abs(Uz(U, probe.d))) / probe.l_cd;
  return t;
}

double Ets(const Eigen::VectorXd &U, const TwistProbe &probe)
{
  const TwistAngles t = Twist(U, probe);
  const double sum = t.front + t.rear;
  if (!(sum > 0.0))
  {
    throw RangeError("ETS undefined: zero twist at the probe nodes");
  }
  return std::numbers::pi / 180.0 / sum;
}

double MassObjective(const ObjectiveSpec &spec, std::span<const double> mu)
{
  if (mu.size() != spec.areas.size())
  {
    throw RangeError("mass objective: " + std::to_string(mu.size()) + " parameters for " +
                     std::to_string(spec.areas.size()) + " areas");
  }
  double g1 = 0.0;
  for (std::size_t k = 0; k < mu.size(); k++)
  {
    g1 += mu[k] * spec.thickness_unit * spec.areas[k];
  }
  return spec.density * g1;
}

Objectives EvaluateObjectives(const Eigen::VectorXd &U, const ObjectiveSpec &spec,
                              const TwistProbe &probe, std::span<const double> mu)
{
  return {MassObjective(spec, mu), Ets(U, probe)};
}

bool Dominates(const DesignPoint &x, const DesignPoint &y)
{
  return x.g1 <= y.g1 && x.g2 >= y.g2 && (x.g1 < y.g1 || x.g2 > y.g2);
}

namespace
{

void SortByG1(std::vector<std::size_t> &idx, std::span<const DesignPoint> points)
{
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].g1 < points[b].g1; });
}

}  // namespace

std::vector<std::size_t> ParetoFront(std::span<const DesignPoint> points)
{
  if (points.empty())
  {
    throw RangeError("pareto front of an empty point set");
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  SortByG1(order, points);

  // Sweep groups of equal g1: a point survives when it has the best g2 of its group and
  // beats every point with strictly smaller g1.
  std::vector<std::size_t> front;
  double best_before = -std::numeric_limits<double>::infinity();
  for (std::size_t start = 0; start < order.size();)
  {
    std::size_t end = start;
    double group_max = -std::numeric_limits<double>::infinity();
    while (end < order.size() && points[order[end]].g1 == points[order[start]].g1)
    {
      group_max = std::max(group_max, points[order[end]].g2);
      end++;
    }
    for (std::size_t k = start; k < end; k++)
    {
      const double g2 = points[order[k]].g2;
      if (g2 == group_max && g2 > best_before)
      {
        front.push_back(order[k]);
      }
    }
    best_before = std::max(best_before, group_max);
    start = end;
  }
  return front;
}

std::vector<std::size_t> ParetoBruteForce(std::span<const DesignPoint> points)
{
  if (points.empty())
  {
    throw RangeError("pareto front of an empty point set");
  }
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < points.size(); i++)
  {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; j++)
    {
      dominated = j != i && Dominates(points[j], points[i]);
    }
    if (!dominated)
    {
      front.push_back(i);
    }
  }
  SortByG1(front, points);
  return front;
}

double RelativeL2Error(const SepVector &approx, const std::vector<Eigen::VectorXd> &reference,
                       const SparseMatrix &weight)
{
  const std::vector<double> errors = TruncationErrors(approx, reference, weight);
  if (errors.empty())
  {
    return approx.NumTerms() == 0 ? 1.0 : 0.0;
  }
  return errors.back();
}

std::vector<double> TruncationErrors(const SepVector &approx,
                                     const std::vector<Eigen::VectorXd> &reference,
                                     const SparseMatrix &weight)
{
  const ParametricGrid &grid = *approx.Grid();
  if (static_cast<Index>(reference.size()) != grid.TotalNodes())
  {
    throw RangeError("relative error: reference sweep has " + std::to_string(reference.size()) +
                     " solutions, grid has " + std::to_string(grid.TotalNodes()) + " nodes");
  }
  const Index N = approx.NumTerms();
  std::vector<double> num(static_cast<std::size_t>(N), 0.0);
  double den = 0.0;
  for (Index flat = 0; flat < grid.TotalNodes(); flat++)
  {
    const std::vector<Index> node = grid.NodeOf(flat);
    const Eigen::VectorXd &v = reference[static_cast<std::size_t>(flat)];
    if (v.size() != approx.Rows())
    {
      throw RangeError("relative error: reference solution at linear index " +
                       std::to_string(flat + 1) + " has the wrong length");
    }
    den += v.dot(weight * v);
    Eigen::VectorXd diff = -v;
    for (Index r = 0; r < N; r++)
    {
      const auto &t = approx.GetTerm(r);
      const double w = t.amplitude * approx.ParametricWeight(r, node);
      if (w != 0.0)
      {
        diff += w * t.spatial;
      }
      num[static_cast<std::size_t>(r)] += diff.dot(weight * diff);
    }
  }
  std::vector<double> out;
  for (double n : num)
  {
    out.push_back(den > 0.0 ? std::sqrt(n / den) : std::sqrt(n));
  }
  return out;
}

}  // namespace pgdir
