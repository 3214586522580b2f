// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/cascade.hpp"

#include <chrono>
#include "pgdir/compression.hpp"
#include "pgdir/error.hpp"

namespace pgdir
{

namespace
{

const char *kVademecumFormat = "pgdir-vademecum";

SolverOptions StepSolverOptions(const CascadeOptions &o, double tol, Index max_modes)
{
  SolverOptions s;
  s.tol = tol;
  s.max_modes = max_modes;
  s.max_sweeps = o.max_sweeps;
  s.stationarity_tol = o.stationarity_tol;
  return s;
}

SolverOptions FinalSolverOptions(const CascadeOptions &o)
{
  SolverOptions s = StepSolverOptions(o, o.tol, o.max_modes);
  s.compress_tol = o.SolutionTol();
  return s;
}

template <typename S>
SeparatedTensor<S> Compress(const SeparatedTensor<S> &x, double tol)
{
  CompressionOptions c;
  c.tol = tol;
  return SepCompress(x, c);
}

template <typename S>
bool ParameterIndependent(const SeparatedTensor<S> &x)
{
  for (const auto &t : x.Terms())
  {
    for (const auto &f : t.factors)
    {
      if (f.size() > 0 && f.maxCoeff() != f.minCoeff())
      {
        return false;
      }
    }
  }
  return true;
}

StepLog ToStepLog(const SolverReport &r)
{
  return StepLog{r.modes, r.final_terms, r.converged};
}

Json ModesToJson(const std::vector<ModeLog> &modes)
{
  Json a = Json::array();
  for (const auto &m : modes)
  {
    a.push_back({{"beta", m.amplitude}, {"sweeps", m.sweeps}});
  }
  return a;
}

std::vector<ModeLog> ModesFromJson(const Json &a)
{
  std::vector<ModeLog> modes;
  for (const auto &m : a)
  {
    modes.push_back({m.at("beta").get<double>(), m.at("sweeps").get<int>()});
  }
  return modes;
}

Json StepToJson(const StepLog &s)
{
  return {{"modes", ModesToJson(s.modes)}, {"terms", s.terms}, {"converged", s.converged}};
}

StepLog StepFromJson(const Json &j)
{
  return {ModesFromJson(j.at("modes")), j.at("terms").get<Index>(), j.at("converged").get<bool>()};
}

}  // namespace

int BuildLog::TotalSweeps() const
{
  int n = 0;
  for (const auto &m : modes)
  {
    n += m.sweeps;
  }
  return n;
}

std::vector<double> Vademecum::Amplitudes() const
{
  std::vector<double> b;
  for (const auto &t : U.Terms())
  {
    b.push_back(t.amplitude);
  }
  return b;
}

SepDense ParametricRigidModes(const SepSparse &K, const ReferenceSet &reference,
                              const CascadeOptions &options, std::vector<StepLog> *log)
{
  const Index n = K.Rows();
  const DofSplit split(n, reference);
  const SepSparse Kll = MapSpatial(K, [&](const SparseMatrix &A) { return split.FreeBlock(A); });
  const SolverOptions sopt = StepSolverOptions(options, options.RigidTol(), options.step_max_modes);

  SepDense phi(K.Grid(), n, 6);
  Eigen::MatrixXd pinned = Eigen::MatrixXd::Zero(n, 6);
  for (int k = 0; k < 6; k++)
  {
    pinned(reference.dofs[static_cast<std::size_t>(k)], k) = 1.0;
  }
  phi = SepAdd(phi, SepConstant(K.Grid(), pinned));

  for (int k = 0; k < 6; k++)
  {
    const SepVector rhs = MapSpatial(K,
                                     [&](const SparseMatrix &A) -> Eigen::VectorXd
                                     { return -split.CouplingBlock(A).col(k); });
    SolverReport rep;
    const SepVector col = SepSolve(Kll, rhs, sopt, &rep);
    if (log)
    {
      log->push_back(ToStepLog(rep));
    }
    for (const auto &t : col.Terms())
    {
      Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, 6);
      Z.col(k) = split.Expand(t.spatial);
      phi.AddTerm(t.amplitude, std::move(Z), t.factors);
    }
  }
  return Compress(phi, options.ProductTol());
}

namespace
{

struct ReducedSystem
{
  SepDense mphi;
  SepDense mass;
  SepVector load;
};

ReducedSystem ReduceMass(const SepDense &phi, const SepSparse &M, const SepVector &F, double tol)
{
  ReducedSystem r;
  r.mphi = Compress(SepMatMul(M, phi), tol);
  // Each term symmetrized: the sum is symmetric node by node, so this changes nothing
  // but round-off and lets the dense Cholesky read one triangle.
  r.mass = Compress(MapSpatial(SepTransposeMatMul(phi, r.mphi),
                               [](const Eigen::MatrixXd &A) -> Eigen::MatrixXd
                               { return 0.5 * (A + A.transpose()); }),
                    tol);
  r.load = Compress(SepTransposeMatVec(phi, F), tol);
  return r;
}

}  // namespace

SepVector ParametricAccelerations(const SepDense &phi, const SepSparse &M, const SepVector &F,
                                  const CascadeOptions &options, StepLog *log)
{
  const ReducedSystem r = ReduceMass(phi, M, F, options.ProductTol());
  SolverReport rep;
  SepVector alpha = SepSolve(r.mass, r.load,
                             StepSolverOptions(options, options.AccelTol(), options.step_max_modes),
                             &rep);
  if (log)
  {
    *log = ToStepLog(rep);
  }
  return alpha;
}

CascadeResult BuildVademecum(const SepSparse &K, const SepSparse &M, const SepVector &F,
                             const ReferenceSet &reference, const CascadeOptions &options)
{
  const auto start = std::chrono::steady_clock::now();
  if (!K.Compatible(M) || K.Rows() != F.Rows() || !(*K.Grid() == *F.Grid()))
  {
    throw ShapeError("build_vademecum: K, M and F must share n_d and the parametric grid");
  }
  const GridPtr &grid = K.Grid();
  const Index n = K.Rows();
  const DofSplit split(n, reference);

  CascadeResult out;
  BuildLog &log = out.vademecum.log;
  log.tol = options.tol;
  log.k_terms = K.NumTerms();
  log.m_terms = M.NumTerms();
  log.fast_path = options.material_only && !options.force_general_path;

  // Step 1: rigid modes.
  std::optional<RigidBasis> basis;
  const std::vector<Index> mid = grid->MidpointNode();
  if (log.fast_path)
  {
    basis = RigidBodyModes(K.Evaluate(mid), reference);
    out.phi = SepConstant(grid, basis->phi);
  }
  else
  {
    out.phi = ParametricRigidModes(K, reference, options, &log.rigid_columns);
  }
  log.phi_terms = out.phi.NumTerms();

  // Step 2: rigid accelerations.
  const ReducedSystem reduced = ReduceMass(out.phi, M, F, options.ProductTol());
  if (log.fast_path && ParameterIndependent(M) && ParameterIndependent(F))
  {
    const Vector6d alpha = IrAccelerations(*basis, M.Evaluate(mid), F.Evaluate(mid));
    out.alpha = SepConstant(grid, Eigen::VectorXd(alpha));
    log.accelerations = StepLog{{}, 1, true};
  }
  else
  {
    SolverReport rep;
    out.alpha = SepSolve(reduced.mass, reduced.load,
                         StepSolverOptions(options, options.AccelTol(), options.step_max_modes),
                         &rep);
    log.accelerations = ToStepLog(rep);
  }

  // Step 3: equilibrated load and relative elastic displacement.
  out.rhs = Compress(SepAdd(F, SepMatVec(reduced.mphi, out.alpha).Scaled(-1.0)),
                     options.ProductTol());
  log.rhs_terms = out.rhs.NumTerms();
  const SepSparse Kll = MapSpatial(K, [&](const SparseMatrix &A) { return split.FreeBlock(A); });
  const SepVector rhs_l =
      MapSpatial(out.rhs, [&](const Eigen::VectorXd &v) { return split.Restrict(v); });
  SolverReport rep;
  const SepVector Ul =
      SepSolve(Kll, rhs_l, FinalSolverOptions(options), &rep);
  log.modes = rep.modes;
  log.converged = rep.converged;

  Vademecum &v = out.vademecum;
  v.U = MapSpatial(Ul, [&](const Eigen::VectorXd &u) { return split.Expand(u); }).Normalized();
  v.reference = reference;
  log.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Json BuildLogToJson(const BuildLog &log, bool with_timing)
{
  Json rigid = Json::array();
  for (const auto &c : log.rigid_columns)
  {
    rigid.push_back(StepToJson(c));
  }
  Json j = {{"modes", ModesToJson(log.modes)},
            {"total_sweeps", log.TotalSweeps()},
            {"converged", log.converged},
            {"fast_path", log.fast_path},
            {"tol", log.tol},
            {"phi_terms", log.phi_terms},
            {"rhs_terms", log.rhs_terms},
            {"k_terms", log.k_terms},
            {"m_terms", log.m_terms},
            {"rigid_columns", rigid},
            {"accelerations", StepToJson(log.accelerations)}};
  if (with_timing)
  {
    j["wall_seconds"] = log.wall_seconds;
  }
  return j;
}

Json VademecumToJson(const Vademecum &v)
{
  Json dofs = Json::array();
  for (Index d : v.reference.dofs)
  {
    dofs.push_back(d);
  }
  return {{"format", kVademecumFormat},
          {"format_version", FormatVersion()},
          {"reference_dofs", dofs},
          {"build_log", BuildLogToJson(v.log, false)},
          {"metadata", v.metadata},
          {"tensor", TensorToJson(v.U)}};
}

Vademecum VademecumFromJson(const Json &j)
{
  const std::string what = "vademecum";
  if (!j.is_object() || j.value("format", std::string()) != kVademecumFormat)
  {
    throw ParseError(what + ": not a " + std::string(kVademecumFormat) + " container");
  }
  CheckFormatVersion(j, what);
  Vademecum v;
  try
  {
    const auto dofs = j.at("reference_dofs").get<std::vector<Index>>();
    if (dofs.size() != 6)
    {
      throw ParseError(what + ": reference_dofs must list 6 DOFs");
    }
    std::copy(dofs.begin(), dofs.end(), v.reference.dofs.begin());
    const Json &log = j.at("build_log");
    v.log.modes = ModesFromJson(log.at("modes"));
    v.log.converged = log.at("converged").get<bool>();
    v.log.fast_path = log.at("fast_path").get<bool>();
    v.log.tol = log.at("tol").get<double>();
    v.log.phi_terms = log.at("phi_terms").get<Index>();
    v.log.rhs_terms = log.at("rhs_terms").get<Index>();
    v.log.k_terms = log.at("k_terms").get<Index>();
    v.log.m_terms = log.at("m_terms").get<Index>();
    for (const auto &c : log.at("rigid_columns"))
    {
      v.log.rigid_columns.push_back(StepFromJson(c));
    }
    v.log.accelerations = StepFromJson(log.at("accelerations"));
    v.metadata = j.value("metadata", Json::object());
  }
  catch (const Json::exception &e)
  {
    throw ParseError(what + ": malformed build log: " + e.what());
  }
  v.U = TensorFromJson<Eigen::VectorXd>(j.at("tensor"));
  for (Index d : v.reference.dofs)
  {
    if (d < 0 || d >= v.U.Rows())
    {
      throw ParseError(what + ": reference DOF outside the field");
    }
  }
  return v;
}

void WriteVademecum(const Vademecum &v, const std::filesystem::path &path)
{
  WriteJsonFile(VademecumToJson(v), path);
}

Vademecum ReadVademecum(const std::filesystem::path &path)
{
  const Json j = ReadJsonFile(path);
  try
  {
    return VademecumFromJson(j);
  }
  catch (const ParseError &e)
  {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace pgdir
