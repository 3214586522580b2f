// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/job.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include "pgdir/error.hpp"
#include "pgdir/fem.hpp"

namespace pgdir
{

namespace fs = std::filesystem;

namespace
{

double Seconds(std::chrono::steady_clock::time_point since)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

template <typename T>
T Field(const Json &j, const char *key)
{
  try
  {
    return j.at(key).get<T>();
  }
  catch (const Json::exception &e)
  {
    throw ParseError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

fs::path Resolve(const fs::path &base, const Json &j, const char *key)
{
  const fs::path p = Field<std::string>(j, key);
  return p.is_absolute() || base.empty() ? p : base / p;
}

void CheckKeys(const Json &j, const std::set<std::string> &allowed, const std::string &what)
{
  if (!j.is_object())
  {
    throw ParseError(what + ": expected a JSON object");
  }
  for (const auto &[key, value] : j.items())
  {
    if (!allowed.contains(key))
    {
      throw ParseError(what + ": unknown key '" + key + "'");
    }
  }
}

void CheckTolerance(double t, const std::string &name)
{
  if (!(t > 0.0 && t < 1.0))
  {
    throw ParseError("config: " + name + " must lie in (0, 1)");
  }
}

ParameterAxis AxisFromConfig(const Json &a)
{
  CheckKeys(a, {"name", "lower", "upper", "nodes"}, "config grid axis");
  const auto name = Field<std::string>(a, "name");
  const auto lower = Field<double>(a, "lower");
  const auto upper = Field<double>(a, "upper");
  if (a.contains("nodes") && a.at("nodes").is_array())
  {
    ParameterAxis axis{name, lower, upper, Field<std::vector<double>>(a, "nodes")};
    return axis;
  }
  return ParameterAxis::Uniform(name, lower, upper, Field<Index>(a, "nodes"));
}

}  // namespace

JobConfig JobConfig::FromJson(const Json &j, const fs::path &base_dir)
{
  CheckKeys(j,
            {"fixture", "mesh", "loads", "snapshots_dir", "output", "report", "error_csv",
             "pareto_output", "grid", "separation", "tol", "tol_c", "max_modes",
             "step_tolerances", "step_max_modes", "max_sweeps", "stationarity_tol",
             "force_general_path", "reference", "objective"},
            "config");
  JobConfig c;
  c.fixture = Field<std::string>(j, "fixture");
  if (c.fixture != "block" && c.fixture != "mini" && c.fixture != "frame")
  {
    throw ParseError("config: fixture must be block, mini or frame");
  }
  auto path = [&](const char *key) -> std::optional<fs::path>
  {
    if (!j.contains(key))
    {
      return std::nullopt;
    }
    return Resolve(base_dir, j, key);
  };
  c.mesh = path("mesh");
  c.loads = path("loads");
  c.snapshots_dir = path("snapshots_dir");
  c.report = path("report");
  c.error_csv = path("error_csv");
  c.pareto_output = path("pareto_output");
  if (auto out = path("output"))
  {
    c.output = *out;
  }
  else if (!base_dir.empty())
  {
    c.output = base_dir / c.output;
  }
  if (j.contains("grid"))
  {
    if (!j.at("grid").is_array() || j.at("grid").empty())
    {
      throw ParseError("config: grid must be a non-empty array of axes");
    }
    std::vector<ParameterAxis> axes;
    for (const auto &a : j.at("grid"))
    {
      axes.push_back(AxisFromConfig(a));
    }
    try
    {
      ParametricGrid check(axes);
    }
    catch (const Error &e)
    {
      throw ParseError(std::string("config: ") + e.what());
    }
    c.grid = std::move(axes);
  }
  if (j.contains("separation"))
  {
    const auto s = Field<std::string>(j, "separation");
    if (s == "analytic")
    {
      c.separation = Separation::Analytic;
    }
    else if (s == "sampled")
    {
      c.separation = Separation::Sampled;
    }
    else
    {
      throw ParseError("config: separation must be analytic or sampled");
    }
  }
  if (c.snapshots_dir)
  {
    c.separation = Separation::Sampled;
  }
  c.cascade.tol = j.contains("tol") ? Field<double>(j, "tol") : c.cascade.tol;
  c.tol_c = j.contains("tol_c") ? Field<double>(j, "tol_c") : c.tol_c;
  CheckTolerance(c.cascade.tol, "tol");
  CheckTolerance(c.tol_c, "tol_c");
  if (j.contains("max_modes"))
  {
    c.cascade.max_modes = Field<Index>(j, "max_modes");
  }
  if (j.contains("step_max_modes"))
  {
    c.cascade.step_max_modes = Field<Index>(j, "step_max_modes");
  }
  if (j.contains("max_sweeps"))
  {
    c.cascade.max_sweeps = Field<int>(j, "max_sweeps");
  }
  if (c.cascade.max_modes < 1 || c.cascade.step_max_modes < 1 || c.cascade.max_sweeps < 1)
  {
    throw ParseError("config: mode and sweep limits must be positive");
  }
  if (j.contains("stationarity_tol"))
  {
    c.cascade.stationarity_tol = Field<double>(j, "stationarity_tol");
    CheckTolerance(c.cascade.stationarity_tol, "stationarity_tol");
  }
  if (j.contains("force_general_path"))
  {
    c.cascade.force_general_path = Field<bool>(j, "force_general_path");
  }
  if (j.contains("step_tolerances"))
  {
    const Json &s = j.at("step_tolerances");
    CheckKeys(s, {"rigid", "accel", "product", "solution"}, "config step_tolerances");
    auto step = [&](const char *key, double &dst)
    {
      if (s.contains(key))
      {
        dst = Field<double>(s, key);
        CheckTolerance(dst, std::string("step_tolerances.") + key);
      }
    };
    step("rigid", c.cascade.rigid_tol);
    step("accel", c.cascade.accel_tol);
    step("product", c.cascade.product_tol);
    step("solution", c.cascade.solution_tol);
  }
  if (j.contains("reference"))
  {
    const Json &r = j.at("reference");
    CheckKeys(r, {"dofs", "nodes"}, "config reference");
    if (r.contains("dofs") == r.contains("nodes"))
    {
      throw ParseError("config: reference needs exactly one of dofs or nodes");
    }
    if (r.contains("dofs"))
    {
      const auto d = Field<std::vector<Index>>(r, "dofs");
      if (d.size() != 6)
      {
        throw ParseError("config: reference.dofs must list 6 DOFs");
      }
      c.reference_dofs.emplace();
      std::copy(d.begin(), d.end(), c.reference_dofs->begin());
    }
    else
    {
      const auto n = Field<std::vector<Index>>(r, "nodes");
      if (n.size() != 3)
      {
        throw ParseError("config: reference.nodes must list 3 nodes");
      }
      c.reference_nodes = std::array<Index, 3>{n[0], n[1], n[2]};
    }
  }
  if (j.contains("objective"))
  {
    c.objective = ObjectiveFromJson(j.at("objective"));
  }
  return c;
}

JobConfig JobConfig::Load(const fs::path &path)
{
  const Json j = ReadJsonFile(path);
  try
  {
    return FromJson(j, path.parent_path());
  }
  catch (const ParseError &e)
  {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::unique_ptr<Problem> MakeProblem(const JobConfig &config)
{
  std::unique_ptr<Problem> problem = MakeFixture(config.fixture);
  if (config.mesh)
  {
    problem->ReplaceMesh(ReadMesh(*config.mesh));
  }
  if (config.loads)
  {
    problem->SetLoads(ReadLoads(*config.loads, problem->ReferenceMesh().NumNodes()));
  }
  if (config.grid)
  {
    problem->SetGrid(std::make_shared<const ParametricGrid>(*config.grid));
  }
  if (config.reference_dofs)
  {
    for (Index d : *config.reference_dofs)
    {
      if (d < 0 || d >= problem->ReferenceMesh().NumDofs())
      {
        throw RangeError("reference DOF " + std::to_string(d) + " outside the mesh");
      }
    }
    problem->SetReference(ReferenceSet{*config.reference_dofs});
  }
  if (config.reference_nodes)
  {
    const auto &n = *config.reference_nodes;
    problem->SetReference(ReferenceSet321(problem->ReferenceMesh(), n[0], n[1], n[2]));
  }
  if (config.objective)
  {
    problem->SetObjective(*config.objective);
  }
  return problem;
}

namespace
{

Json CompressionJson(const CompressionReport &r)
{
  return {{"input_terms", r.input_terms},
          {"output_terms", r.output_terms},
          {"relative_residual", r.relative_residual},
          {"converged", r.converged}};
}

}  // namespace

SeparationResult SeparateOperators(const Problem &problem, const JobConfig &config)
{
  const auto start = std::chrono::steady_clock::now();
  SeparationResult out;
  if (config.separation == Separation::Analytic)
  {
    out.ops = problem.SeparateAnalytic();
    out.report = {{"method", "analytic"}};
  }
  else
  {
    const GridPtr &grid = problem.Grid();
    const SnapshotSampler sampler = config.snapshots_dir
                                        ? IngestExternalSnapshots(*config.snapshots_dir, *grid)
                                        : problem.Sampler();
    SamplingOptions so;
    so.k_compression.tol = config.tol_c;
    so.m_compression.tol = config.tol_c;
    SampledOperators s = SeparateBySampling(sampler, grid, so);
    out.ops.K = std::move(s.K);
    out.ops.M = std::move(s.M);
    CompressionOptions fc;
    fc.tol = config.tol_c;
    out.ops.F = s.F ? SepCompress(*s.F, fc)
                    : SepConstant(grid, AssembleForce(problem.ReferenceMesh(), problem.Loads()));
    out.report = {{"method", "sampled"},
                  {"source", config.snapshots_dir ? "snapshots_dir" : "in_process"},
                  {"k_compression", CompressionJson(s.k_report)},
                  {"m_compression", CompressionJson(s.m_report)}};
  }
  out.report["k_terms"] = out.ops.K.NumTerms();
  out.report["m_terms"] = out.ops.M.NumTerms();
  out.report["f_terms"] = out.ops.F.NumTerms();
  out.report["seconds"] = Seconds(start);
  return out;
}

Surface ExtractSurface(const Mesh &mesh)
{
  // Outward faces of a positively oriented tet.
  static const std::array<std::array<int, 3>, 4> local = {
      {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};
  std::map<std::array<Index, 3>, std::pair<int, std::array<Index, 3>>> faces;
  for (const Tet &t : mesh.Elements())
  {
    for (const auto &f : local)
    {
      const std::array<Index, 3> face{t[static_cast<std::size_t>(f[0])],
                                      t[static_cast<std::size_t>(f[1])],
                                      t[static_cast<std::size_t>(f[2])]};
      std::array<Index, 3> key = face;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = faces.try_emplace(key, 0, face);
      it->second.first++;
    }
  }
  Surface s;
  std::set<Index> nodes;
  for (const auto &[key, entry] : faces)
  {
    if (entry.first == 1)
    {
      s.faces.push_back(entry.second);
      nodes.insert(key.begin(), key.end());
    }
  }
  s.nodes.assign(nodes.begin(), nodes.end());
  return s;
}

Json ProbeToJson(const QoIProbe &probe)
{
  Json j = Json::object();
  if (probe.pair)
  {
    j["pair"] = {{"p", probe.pair->p}, {"q", probe.pair->q}};
  }
  if (probe.twist)
  {
    const auto &t = *probe.twist;
    j["twist"] = {{"a", t.a}, {"b", t.b}, {"c", t.c}, {"d", t.d},
                  {"l_ab", t.l_ab}, {"l_cd", t.l_cd}};
  }
  return j;
}

QoIProbe ProbeFromJson(const Json &j)
{
  QoIProbe probe;
  try
  {
    if (j.contains("pair"))
    {
      probe.pair = PairProbe{j.at("pair").at("p").get<Index>(), j.at("pair").at("q").get<Index>()};
    }
    if (j.contains("twist"))
    {
      const Json &t = j.at("twist");
      probe.twist = TwistProbe{t.at("a").get<Index>(),    t.at("b").get<Index>(),
                               t.at("c").get<Index>(),    t.at("d").get<Index>(),
                               t.at("l_ab").get<double>(), t.at("l_cd").get<double>()};
    }
  }
  catch (const Json::exception &e)
  {
    throw ParseError(std::string("probe: ") + e.what());
  }
  return probe;
}

Json ObjectiveToJson(const ObjectiveSpec &spec)
{
  return {{"areas", spec.areas}, {"density", spec.density},
          {"thickness_unit", spec.thickness_unit}};
}

ObjectiveSpec ObjectiveFromJson(const Json &j)
{
  CheckKeys(j, {"areas", "density", "thickness_unit"}, "objective spec");
  ObjectiveSpec spec;
  try
  {
    spec.areas = j.at("areas").get<std::vector<double>>();
    spec.density = j.value("density", spec.density);
    spec.thickness_unit = j.value("thickness_unit", spec.thickness_unit);
  }
  catch (const Json::exception &e)
  {
    throw ParseError(std::string("objective spec: ") + e.what());
  }
  try
  {
    spec.Validate();
  }
  catch (const RangeError &e)
  {
    throw ParseError(e.what());
  }
  return spec;
}

namespace
{

Json MetadataJson(const Problem &problem, const JobConfig &config)
{
  const Mesh &mesh = problem.ReferenceMesh();
  const Surface s = ExtractSurface(mesh);
  Json coords = Json::array();
  for (Index n : s.nodes)
  {
    const Eigen::Vector3d &x = mesh.Node(n);
    coords.push_back({x.x(), x.y(), x.z()});
  }
  Json m = {{"fixture", config.fixture},
            {"separation", config.separation == Separation::Analytic ? "analytic" : "sampled"},
            {"n_nodes", mesh.NumNodes()},
            {"probe", ProbeToJson(problem.Probe())},
            {"surface", {{"nodes", s.nodes}, {"coords", coords}, {"faces", s.faces}}}};
  if (problem.Objective())
  {
    m["objective"] = ObjectiveToJson(*problem.Objective());
  }
  return m;
}

Json StorageJson(const Vademecum &v, std::uintmax_t file_bytes)
{
  const ParametricGrid &grid = *v.U.Grid();
  Index factor_len = 0;
  for (int j = 0; j < grid.NumParams(); j++)
  {
    factor_len += grid.Size(j);
  }
  const auto doubles = static_cast<std::uintmax_t>(v.NumModes() * (v.U.Rows() + factor_len));
  const auto oracle = static_cast<std::uintmax_t>(grid.TotalNodes() * v.U.Rows());
  return {{"vademecum_file_bytes", file_bytes},
          {"vademecum_value_bytes", 8 * doubles},
          {"oracle_value_bytes", 8 * oracle},
          {"ratio", static_cast<double>(doubles) / static_cast<double>(oracle)}};
}

}  // namespace

BuildOutput RunBuild(const Problem &problem, const JobConfig &config)
{
  const auto start = std::chrono::steady_clock::now();
  SeparationResult sep = SeparateOperators(problem, config);
  CascadeOptions options = config.cascade;
  options.material_only = !problem.GeometricParameters();
  CascadeResult result =
      BuildVademecum(sep.ops.K, sep.ops.M, sep.ops.F, problem.Reference(), options);

  BuildOutput out{std::move(result.vademecum), Json::object()};
  Vademecum &v = out.vademecum;
  v.metadata = MetadataJson(problem, config);

  Json beta = Json::array(), sweeps = Json::array();
  for (const auto &m : v.log.modes)
  {
    beta.push_back(m.amplitude);
    sweeps.push_back(m.sweeps);
  }
  const std::string text = VademecumToJson(v).dump();
  out.report = {{"fixture", config.fixture},
                {"n_d", v.U.Rows()},
                {"grids", GridToJson(*v.U.Grid())},
                {"tol", options.tol},
                {"modes", v.NumModes()},
                {"beta", beta},
                {"beta_ratio", v.log.modes.empty() ? 0.0
                                                   : v.log.modes.back().amplitude /
                                                         v.log.modes.front().amplitude},
                {"amplitudes", v.Amplitudes()},
                {"sweeps", sweeps},
                {"total_sweeps", v.log.TotalSweeps()},
                {"converged", v.log.converged},
                {"separation", sep.report},
                {"build_log", BuildLogToJson(v.log, true)},
                {"storage", StorageJson(v, text.size() + 1)},
                {"wall_seconds", Seconds(start)}};
  return out;
}

BuildOutput CmdBuild(const JobConfig &config)
{
  const std::unique_ptr<Problem> problem = MakeProblem(config);
  BuildOutput out = RunBuild(*problem, config);
  WriteVademecum(out.vademecum, config.output);
  out.report["output"] = config.output.string();
  out.report["storage"]["vademecum_file_bytes"] = fs::file_size(config.output);
  if (config.report)
  {
    WriteJsonFile(out.report, *config.report);
  }
  return out;
}

Json FieldJson(const Eigen::VectorXd &U, std::span<const double> mu, const QoIProbe &probe,
               const std::vector<Index> *nodes)
{
  const Index n = U.size() / 3;
  double u_max = 0.0;
  for (Index i = 0; i < n; i++)
  {
    u_max = std::max(u_max, U.segment<3>(3 * i).norm());
  }
  Json j = {{"mu", std::vector<double>(mu.begin(), mu.end())}, {"u_max", u_max}};
  if (probe.pair)
  {
    j["delta_uz"] = DeltaUz(U, probe.pair->p, probe.pair->q);
  }
  if (probe.twist)
  {
    try
    {
      j["ets"] = Ets(U, *probe.twist);
    }
    catch (const RangeError &e)
    {
      j["ets"] = nullptr;
      j["ets_error"] = e.what();
    }
  }
  Json ids = Json::array(), values = Json::array();
  auto add = [&](Index i)
  {
    ids.push_back(i);
    values.push_back({U(3 * i), U(3 * i + 1), U(3 * i + 2)});
  };
  if (nodes)
  {
    for (Index i : *nodes)
    {
      add(i);
    }
  }
  else
  {
    for (Index i = 0; i < n; i++)
    {
      add(i);
    }
  }
  j["displacements"] = {{"nodes", ids}, {"values", values}};
  return j;
}

Explorer::Explorer(Vademecum vademecum) : v_(std::move(vademecum))
{
  const Json &m = v_.metadata;
  probe_ = ProbeFromJson(m.value("probe", Json::object()));
  probe_.Validate(v_.U.Rows() / 3);
  if (m.contains("objective"))
  {
    objective_ = ObjectiveFromJson(m.at("objective"));
  }
  if (m.contains("surface"))
  {
    try
    {
      surface_ = m.at("surface").at("nodes").get<std::vector<Index>>();
    }
    catch (const Json::exception &e)
    {
      throw ParseError(std::string("vademecum metadata: ") + e.what());
    }
  }
  for (Index i : surface_)
  {
    if (i < 0 || 3 * i >= v_.U.Rows())
    {
      throw ParseError("vademecum metadata: surface node outside the field");
    }
  }
}

Eigen::VectorXd Explorer::Evaluate(std::span<const double> mu) const
{
  if (static_cast<int>(mu.size()) != Grid().NumParams())
  {
    throw RangeError("expected " + std::to_string(Grid().NumParams()) + " parameter values, got " +
                     std::to_string(mu.size()));
  }
  return v_.U.EvaluateAt(mu);
}

Json Explorer::EvaluateJson(std::span<const double> mu, bool full) const
{
  const bool decimate = !full && !surface_.empty();
  return FieldJson(Evaluate(mu), mu, probe_, decimate ? &surface_ : nullptr);
}

Json Explorer::MetaJson() const
{
  Json beta = Json::array();
  for (const auto &m : v_.log.modes)
  {
    beta.push_back(m.amplitude);
  }
  Json j = {{"n_p", Grid().NumParams()},
            {"grids", GridToJson(Grid())},
            {"N_U", v_.NumModes()},
            {"beta", beta},
            {"amplitudes", v_.Amplitudes()},
            {"n_d", v_.U.Rows()},
            {"tol", v_.log.tol},
            {"converged", v_.log.converged},
            {"reference_dofs", v_.reference.dofs},
            {"fixture", v_.metadata.value("fixture", std::string())},
            {"probe", ProbeToJson(probe_)},
            {"surface_nodes", surface_.size()}};
  j["objective"] = objective_ ? ObjectiveToJson(*objective_) : Json(nullptr);
  return j;
}

Json Explorer::ModeJson(Index i) const
{
  if (i < 1 || i > v_.NumModes())
  {
    throw RangeError("mode " + std::to_string(i) + " outside 1.." +
                     std::to_string(v_.NumModes()));
  }
  const auto &t = v_.U.GetTerm(i - 1);
  Json factors = Json::array();
  for (const auto &f : t.factors)
  {
    factors.push_back(std::vector<double>(f.data(), f.data() + f.size()));
  }
  return {{"index", i},
          {"beta", t.amplitude},
          {"spatial", std::vector<double>(t.spatial.data(), t.spatial.data() + t.spatial.size())},
          {"factors", factors}};
}

Json Explorer::MeshJson() const
{
  if (!v_.metadata.contains("surface"))
  {
    throw RangeError("vademecum carries no surface mesh");
  }
  return v_.metadata.at("surface");
}

std::vector<double> Explorer::QoiValues(const std::string &qoi) const
{
  if (qoi == "delta_uz" && !probe_.pair)
  {
    throw RangeError("delta_uz needs a P/Q probe, none stored in the vademecum");
  }
  if (qoi == "ets" && !probe_.twist)
  {
    throw RangeError("ets needs a twist probe, none stored in the vademecum");
  }
  if (qoi != "delta_uz" && qoi != "ets")
  {
    throw RangeError("unknown qoi '" + qoi + "' (expected delta_uz or ets)");
  }
  std::vector<double> values;
  for (Index flat = 0; flat < Grid().TotalNodes(); flat++)
  {
    const Eigen::VectorXd U = v_.U.Evaluate(Grid().NodeOf(flat));
    values.push_back(qoi == "delta_uz" ? DeltaUz(U, probe_.pair->p, probe_.pair->q)
                                       : Ets(U, *probe_.twist));
  }
  return values;
}

Json Explorer::QoiSurfaceJson(const std::string &qoi) const
{
  std::vector<Index> shape;
  for (int j = 0; j < Grid().NumParams(); j++)
  {
    shape.push_back(Grid().Size(j));
  }
  return {{"qoi", qoi}, {"grids", GridToJson(Grid())}, {"shape", shape},
          {"values", QoiValues(qoi)}};
}

namespace
{

std::string Num(double x)
{
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

std::string Explorer::QoiSurfaceCsv(const std::string &qoi) const
{
  const std::vector<double> values = QoiValues(qoi);
  std::ostringstream out;
  for (const auto &a : Grid().Axes())
  {
    out << a.name << ',';
  }
  out << qoi << '\n';
  for (Index flat = 0; flat < Grid().TotalNodes(); flat++)
  {
    for (double x : Grid().Values(Grid().NodeOf(flat)))
    {
      out << Num(x) << ',';
    }
    out << Num(values[static_cast<std::size_t>(flat)]) << '\n';
  }
  return out.str();
}

std::vector<DesignPoint> Explorer::DesignPoints(const std::optional<ObjectiveSpec> &spec) const
{
  const std::optional<ObjectiveSpec> &s = spec ? spec : objective_;
  if (!s)
  {
    throw RangeError("no objective spec given and none stored in the vademecum");
  }
  s->Validate();
  if (!probe_.twist)
  {
    throw RangeError("objectives need a twist probe, none stored in the vademecum");
  }
  std::vector<DesignPoint> points;
  for (Index flat = 0; flat < Grid().TotalNodes(); flat++)
  {
    const std::vector<Index> node = Grid().NodeOf(flat);
    DesignPoint p;
    p.mu = Grid().Values(node);
    const Objectives g = EvaluateObjectives(v_.U.Evaluate(node), *s, *probe_.twist, p.mu);
    p.g1 = g.g1;
    p.g2 = g.g2;
    points.push_back(std::move(p));
  }
  return points;
}

Json Explorer::ParetoJson(const std::optional<ObjectiveSpec> &spec) const
{
  const std::vector<DesignPoint> points = DesignPoints(spec);
  const std::vector<std::size_t> front = ParetoFront(points);
  std::vector<bool> on(points.size(), false);
  for (std::size_t i : front)
  {
    on[i] = true;
  }
  Json pts = Json::array();
  for (std::size_t i = 0; i < points.size(); i++)
  {
    pts.push_back({{"mu", points[i].mu}, {"g1", points[i].g1}, {"g2", points[i].g2},
                   {"on_front", static_cast<bool>(on[i])}});
  }
  return {{"objective_spec", ObjectiveToJson(spec ? *spec : *objective_)},
          {"points", pts},
          {"front", front}};
}

std::string Explorer::ParetoCsv(const std::optional<ObjectiveSpec> &spec) const
{
  const Json j = ParetoJson(spec);
  std::ostringstream out;
  for (const auto &a : Grid().Axes())
  {
    out << a.name << ',';
  }
  out << "g1,g2,on_front\n";
  for (const auto &p : j.at("points"))
  {
    for (double x : p.at("mu"))
    {
      out << Num(x) << ',';
    }
    out << Num(p.at("g1").get<double>()) << ',' << Num(p.at("g2").get<double>()) << ','
        << (p.at("on_front").get<bool>() ? 1 : 0) << '\n';
  }
  return out.str();
}

Eigen::VectorXd OracleSolve(const Problem &problem, std::span<const double> mu)
{
  const Snapshot s = problem.Assemble(mu);
  return IrSolve(s.K, s.M, *s.F, problem.Reference()).displacement;
}

std::vector<Eigen::VectorXd> OracleSweep(const Problem &problem)
{
  const ParametricGrid &grid = *problem.Grid();
  const Index total = grid.TotalNodes();
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(total));
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]
  {
    for (Index flat = next++; flat < total; flat = next++)
    {
      try
      {
        out[static_cast<std::size_t>(flat)] = OracleSolve(problem, grid.Values(grid.NodeOf(flat)));
      }
      catch (...)
      {
        const std::lock_guard lock(failure_mutex);
        if (!failure)
        {
          failure = std::current_exception();
        }
        next = total;
      }
    }
  };
  const unsigned threads =
      std::clamp<unsigned>(std::thread::hardware_concurrency(), 1, static_cast<unsigned>(total));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; t++)
  {
    pool.emplace_back(worker);
  }
  worker();
  for (auto &t : pool)
  {
    t.join();
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
  return out;
}

SparseMatrix ErrorWeight(const Problem &problem)
{
  const Mesh &mesh = problem.ReferenceMesh();
  const std::vector<Material> unit(static_cast<std::size_t>(mesh.NumSubdomains()),
                                   Material{1.0, 0.0, 1.0});
  return AssembleMass(mesh, unit);
}

std::vector<double> ErrorStudy(const Problem &problem, const Vademecum &v)
{
  if (!(*problem.Grid() == *v.U.Grid()) || v.U.Rows() != problem.ReferenceMesh().NumDofs())
  {
    throw ShapeError("error study: vademecum does not match the configured problem");
  }
  if (!(v.reference == problem.Reference()))
  {
    throw ShapeError("error study: vademecum was built with another reference set");
  }
  return TruncationErrors(v.U, OracleSweep(problem), ErrorWeight(problem));
}

std::string ErrorStudyCsv(const std::vector<double> &errors)
{
  std::ostringstream out;
  out << "rank,error\n";
  for (std::size_t i = 0; i < errors.size(); i++)
  {
    out << i + 1 << ',' << Num(errors[i]) << '\n';
  }
  return out.str();
}

std::vector<double> ParseValues(const std::string &text)
{
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
  {
    std::size_t used = 0;
    double x = 0.0;
    try
    {
      x = std::stod(item, &used);
    }
    catch (const std::exception &)
    {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
    {
      used++;
    }
    if (item.empty() || used != item.size() || !std::isfinite(x))
    {
      throw ParseError("cannot parse parameter value '" + item + "'");
    }
    values.push_back(x);
  }
  if (values.empty())
  {
    throw ParseError("no parameter values given");
  }
  return values;
}

}  // namespace pgdir
