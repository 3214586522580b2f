// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_PARAMETRIC_GRID_HPP
#define PGDIR_PARAMETRIC_GRID_HPP

#include <span>
#include <string>
#include <vector>
#include <Eigen/Core>

namespace pgdir
{

using Index = Eigen::Index;

// One parameter axis: closed interval and strictly increasing nodal coordinates inside it.
struct ParameterAxis
{
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  std::vector<double> nodes;

  static ParameterAxis Uniform(std::string name, double lower, double upper, Index n);

  Index Size() const { return static_cast<Index>(nodes.size()); }

  friend bool operator==(const ParameterAxis &, const ParameterAxis &) = default;
};

// Position of an off-grid value on an axis: value = (1 - weight) * nodes[node] +
// weight * nodes[node + 1]. At a grid node the weight is exactly zero.
struct AxisLocation
{
  Index node = 0;
  double weight = 0.0;
};

//
// Tensor-product parameter box. Node multi-indices are 0-based everywhere except in
// LinearIndex()/MultiIndex(), which use the 1-based counter of nested loops with the
// first parameter running fastest (the file naming convention of snapshot
// directories).
//
class ParametricGrid
{
public:
  ParametricGrid() = default;
  explicit ParametricGrid(std::vector<ParameterAxis> axes);

  int NumParams() const { return static_cast<int>(axes_.size()); }
  const std::vector<ParameterAxis> &Axes() const { return axes_; }
  const ParameterAxis &Axis(int j) const { return axes_[static_cast<std::size_t>(j)]; }
  Index Size(int j) const { return Axis(j).Size(); }
  Index TotalNodes() const;

  // 1-based multi-index -> 1-based linear index. Throws RangeError.
  Index LinearIndex(std::span<const Index> p) const;
  // Inverse of LinearIndex (1-based in and out).
  std::vector<Index> MultiIndex(Index i) const;

  // 0-based node multi-index of a 0-based flat position (first parameter fastest).
  std::vector<Index> NodeOf(Index flat) const;
  Index FlatOf(std::span<const Index> node) const;

  // Parameter values at a 0-based node multi-index.
  std::vector<double> Values(std::span<const Index> node) const;
  // Node closest to the middle of every axis.
  std::vector<Index> MidpointNode() const;

  // Throws RangeError for values outside [lower, upper] (closed).
  AxisLocation Locate(int j, double value) const;
  void CheckNode(std::span<const Index> node) const;
  void CheckValues(std::span<const double> values) const;

  friend bool operator==(const ParametricGrid &, const ParametricGrid &) = default;

private:
  std::vector<ParameterAxis> axes_;
};

// Value of a nodal factor at an axis location.
double Interpolate(const Eigen::VectorXd &factor, const AxisLocation &loc);

}  // namespace pgdir

#endif  // PGDIR_PARAMETRIC_GRID_HPP
