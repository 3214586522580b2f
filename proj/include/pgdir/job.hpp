// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_JOB_HPP
#define PGDIR_JOB_HPP

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>
#include "pgdir/cascade.hpp"
#include "pgdir/fixtures.hpp"
#include "pgdir/qoi.hpp"

namespace pgdir
{

// How the separated K, M, F are obtained.
enum class Separation
{
  Analytic,  // known parameter dependence, geometric parameters sampled per node
  Sampled,   // one snapshot per grid node (in process or from snapshots_dir), compressed at tol_c
};

//
// Job description read from a JSON file. Relative paths resolve against the directory
// of the file. Only "fixture" is required.
//
struct JobConfig
{
  std::string fixture = "block";  // block | mini | frame
  std::optional<std::filesystem::path> mesh;
  std::optional<std::filesystem::path> loads;
  std::optional<std::filesystem::path> snapshots_dir;
  std::filesystem::path output = "vademecum.json";
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> error_csv;
  std::optional<std::filesystem::path> pareto_output;  // .csv or .json
  std::optional<std::vector<ParameterAxis>> grid;
  Separation separation = Separation::Analytic;
  double tol_c = 1.0e-5;
  CascadeOptions cascade;
  std::optional<std::array<Index, 6>> reference_dofs;
  std::optional<std::array<Index, 3>> reference_nodes;  // 3-2-1 pattern on these nodes
  std::optional<ObjectiveSpec> objective;

  // Throws ParseError on unknown keys, wrong types or invalid values.
  static JobConfig FromJson(const Json &j, const std::filesystem::path &base_dir = {});
  // MissingInput when the file is absent.
  static JobConfig Load(const std::filesystem::path &path);
};

// Fixture with every override of the config applied.
std::unique_ptr<Problem> MakeProblem(const JobConfig &config);

struct SeparationResult
{
  SeparatedOperators ops;
  Json report;
};

SeparationResult SeparateOperators(const Problem &problem, const JobConfig &config);

struct BuildOutput
{
  Vademecum vademecum;
  Json report;
};

// Offline stage: separation, cascade and metadata. Nothing is written.
BuildOutput RunBuild(const Problem &problem, const JobConfig &config);
// RunBuild plus the vademecum file and, when configured, the report file.
BuildOutput CmdBuild(const JobConfig &config);

// Boundary of a tet mesh: faces owned by one element, outward oriented, and their nodes.
struct Surface
{
  std::vector<Index> nodes;                 // ascending
  std::vector<std::array<Index, 3>> faces;  // global node indices
};

Surface ExtractSurface(const Mesh &mesh);

Json ProbeToJson(const QoIProbe &probe);
QoIProbe ProbeFromJson(const Json &j);
Json ObjectiveToJson(const ObjectiveSpec &spec);
ObjectiveSpec ObjectiveFromJson(const Json &j);

// {mu, u_max, delta_uz?, ets?, displacements{nodes, values}}. Displacements are listed
// for `nodes`, or for every node when it is null. Used for vademecum and oracle fields
// alike so both print the same keys.
Json FieldJson(const Eigen::VectorXd &U, std::span<const double> mu, const QoIProbe &probe,
               const std::vector<Index> *nodes);

//
// Online stage over a loaded vademecum, shared by the CLI and the HTTP service. Every
// method is const and the vademecum is never modified, so concurrent calls are safe.
//
class Explorer
{
public:
  explicit Explorer(Vademecum vademecum);

  const Vademecum &Model() const { return v_; }
  const ParametricGrid &Grid() const { return *v_.U.Grid(); }
  const QoIProbe &Probe() const { return probe_; }
  const std::optional<ObjectiveSpec> &Objective() const { return objective_; }
  const std::vector<Index> &SurfaceNodes() const { return surface_; }

  // Displacement at mu (RangeError outside the grid box or on a wrong parameter count).
  Eigen::VectorXd Evaluate(std::span<const double> mu) const;
  Json EvaluateJson(std::span<const double> mu, bool full) const;
  Json MetaJson() const;
  // Spatial mode and parametric factors of term i (1-based).
  Json ModeJson(Index i) const;
  // Stored surface mesh for rendering.
  Json MeshJson() const;
  // "delta_uz" or "ets" at every grid node, flat order (first parameter fastest).
  Json QoiSurfaceJson(const std::string &qoi) const;
  std::string QoiSurfaceCsv(const std::string &qoi) const;
  // Objectives at every grid node. `spec` defaults to the stored objective.
  std::vector<DesignPoint> DesignPoints(const std::optional<ObjectiveSpec> &spec) const;
  Json ParetoJson(const std::optional<ObjectiveSpec> &spec) const;
  std::string ParetoCsv(const std::optional<ObjectiveSpec> &spec) const;

private:
  std::vector<double> QoiValues(const std::string &qoi) const;

  Vademecum v_;
  QoIProbe probe_;
  std::optional<ObjectiveSpec> objective_;
  std::vector<Index> surface_;
};

// Direct inertia-relief solve at mu.
Eigen::VectorXd OracleSolve(const Problem &problem, std::span<const double> mu);
// Direct solves at every grid node (flat order), spread over hardware threads.
std::vector<Eigen::VectorXd> OracleSweep(const Problem &problem);

// Spatial weight of the relative error: mass matrix of the reference mesh with unit density.
SparseMatrix ErrorWeight(const Problem &problem);

// Relative error for every truncation rank 1..N_U against the direct sweep.
std::vector<double> ErrorStudy(const Problem &problem, const Vademecum &v);
std::string ErrorStudyCsv(const std::vector<double> &errors);

// Parses "a,b,c" into doubles (ParseError otherwise).
std::vector<double> ParseValues(const std::string &text);

}  // namespace pgdir

#endif  // PGDIR_JOB_HPP
