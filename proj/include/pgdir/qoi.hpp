// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_QOI_HPP
#define PGDIR_QOI_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>
#include <Eigen/Core>
#include "pgdir/fem.hpp"
#include "pgdir/separated_tensor.hpp"

namespace pgdir
{

// Relative z-displacement of two nodes.
struct PairProbe
{
  Index p = 0;
  Index q = 0;
};

// Front (A, B) and rear (C, D) node pairs for the twist angles.
struct TwistProbe
{
  Index a = 0, b = 0, c = 0, d = 0;
  double l_ab = 1.0;
  double l_cd = 1.0;
};

struct QoIProbe
{
  std::optional<PairProbe> pair;
  std::optional<TwistProbe> twist;

  void Validate(Index num_nodes) const;
};

// g1 = density * sum_k mu_k * thickness_unit * area_k, g2 = ETS(mu).
struct ObjectiveSpec
{
  std::vector<double> areas;
  double density = 1.0;
  double thickness_unit = 1.0e-3;  // parameter values are thicknesses in mm, areas in m^2

  void Validate() const;
};

// U_z(P) - U_z(Q).
double DeltaUz(const Eigen::VectorXd &U, Index p, Index q);

struct TwistAngles
{
  double front = 0.0;  // alpha_AB
  double rear = 0.0;   // alpha_CD
};

TwistAngles Twist(const Eigen::VectorXd &U, const TwistProbe &probe);

// Equivalent torsional stiffness pi / 180 / (alpha_AB + alpha_CD). Throws RangeError
// ("zero twist") when the angle sum vanishes.
double Ets(const Eigen::VectorXd &U, const TwistProbe &probe);

double MassObjective(const ObjectiveSpec &spec, std::span<const double> mu);

struct Objectives
{
  double g1 = 0.0;
  double g2 = 0.0;
};

// Both objectives from a single field evaluation.
Objectives EvaluateObjectives(const Eigen::VectorXd &U, const ObjectiveSpec &spec,
                              const TwistProbe &probe, std::span<const double> mu);

struct DesignPoint
{
  std::vector<double> mu;
  double g1 = 0.0;
  double g2 = 0.0;
};

// Non-dominated subset for "minimize g1, maximize g2", stable-sorted by g1. Indices
// refer to the input array. Throws RangeError on empty input.
std::vector<std::size_t> ParetoFront(std::span<const DesignPoint> points);

// O(n^2) reference: index i is kept when no other point dominates it.
std::vector<std::size_t> ParetoBruteForce(std::span<const DesignPoint> points);

bool Dominates(const DesignPoint &x, const DesignPoint &y);

// Relative error over the grid:
//   sqrt(sum_p (u_p - v_p)^T W (u_p - v_p) / sum_p v_p^T W v_p)
// with v the reference (full-order) fields in flat grid order and W a symmetric weight
// matrix (mass matrix of the reference configuration).
double RelativeL2Error(const SepVector &approx, const std::vector<Eigen::VectorXd> &reference,
                       const SparseMatrix &weight);

// Error for every truncation rank 1..N of the approximation (terms in stored order).
std::vector<double> TruncationErrors(const SepVector &approx,
                                     const std::vector<Eigen::VectorXd> &reference,
                                     const SparseMatrix &weight);

}  // namespace pgdir

#endif  // PGDIR_QOI_HPP
