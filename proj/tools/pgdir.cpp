// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// pgdir command-line driver. Exit codes: 0 success, 1 other failure, 2 missing input,
// 3 value out of range, 4 bind failure.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <CLI11.hpp>
#include "pgdir/error.hpp"
#include "pgdir/job.hpp"
#include "pgdir/service.hpp"

namespace
{

using namespace pgdir;
namespace fs = std::filesystem;

constexpr int kExitFailure = 1;
constexpr int kExitMissing = 2;
constexpr int kExitRange = 3;
constexpr int kExitBind = 4;

Service *g_service = nullptr;

void OnSignal(int)
{
  if (g_service)
  {
    g_service->Stop();
  }
}

void WriteText(const std::string &text, const fs::path &path)
{
  if (path.has_parent_path())
  {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot write " + path.string());
  }
  out << text;
}

bool EndsWith(const fs::path &p, const std::string &ext)
{
  return p.extension() == ext;
}

struct Options
{
  std::string config;
  std::string vademecum;
  std::string mu;
  std::string out;
  std::string qoi = "delta_uz";
  std::string objective;
  std::string host = "127.0.0.1";
  std::string static_dir;
  int port = 8080;
  bool full = false;
};

fs::path VademecumPath(const Options &o, const JobConfig &config)
{
  return o.vademecum.empty() ? config.output : fs::path(o.vademecum);
}

Explorer LoadExplorer(const Options &o, const JobConfig &config)
{
  return Explorer(ReadVademecum(VademecumPath(o, config)));
}

std::optional<ObjectiveSpec> ObjectiveOverride(const Options &o)
{
  if (o.objective.empty())
  {
    return std::nullopt;
  }
  return ObjectiveFromJson(ReadJsonFile(o.objective));
}

int Build(const Options &o)
{
  const JobConfig config = JobConfig::Load(o.config);
  const BuildOutput out = CmdBuild(config);
  std::cout << out.report.dump(2) << '\n';
  return 0;
}

int Eval(const Options &o)
{
  const JobConfig config = JobConfig::Load(o.config);
  const Explorer explorer = LoadExplorer(o, config);
  const std::vector<double> mu = ParseValues(o.mu);
  const auto start = std::chrono::steady_clock::now();
  Json out = explorer.EvaluateJson(mu, o.full);
  out["eval_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::cout << out.dump() << '\n';
  return 0;
}

int Oracle(const Options &o)
{
  const JobConfig config = JobConfig::Load(o.config);
  const auto problem = MakeProblem(config);
  const std::vector<double> mu = ParseValues(o.mu);
  const Eigen::VectorXd U = OracleSolve(*problem, mu);
  const Surface s = ExtractSurface(problem->ReferenceMesh());
  std::cout << FieldJson(U, mu, problem->Probe(), o.full ? nullptr : &s.nodes).dump() << '\n';
  return 0;
}

int ErrorStudyCmd(const Options &o)
{
  const JobConfig config = JobConfig::Load(o.config);
  const auto problem = MakeProblem(config);
  const Vademecum v = ReadVademecum(VademecumPath(o, config));
  const std::string csv = ErrorStudyCsv(ErrorStudy(*problem, v));
  const fs::path target = !o.out.empty() ? fs::path(o.out) : config.error_csv.value_or("");
  if (target.empty())
  {
    std::cout << csv;
  }
  else
  {
    WriteText(csv, target);
    std::cout << csv;
  }
  return 0;
}

int Pareto(const Options &o)
{
  const JobConfig config = JobConfig::Load(o.config);
  const Explorer explorer = LoadExplorer(o, config);
  const std::optional<ObjectiveSpec> spec = ObjectiveOverride(o);
  const Json j = explorer.ParetoJson(spec);
  const fs::path target = !o.out.empty() ? fs::path(o.out) : config.pareto_output.value_or("");
  if (!target.empty())
  {
    WriteText(EndsWith(target, ".csv") ? explorer.ParetoCsv(spec) : j.dump() + "\n", target);
  }
  std::cout << j.dump() << '\n';
  return 0;
}

int QoiSurface(const Options &o)
{
  const JobConfig config = JobConfig::Load(o.config);
  const Explorer explorer = LoadExplorer(o, config);
  if (!o.out.empty())
  {
    WriteText(EndsWith(o.out, ".csv") ? explorer.QoiSurfaceCsv(o.qoi)
                                      : explorer.QoiSurfaceJson(o.qoi).dump() + "\n",
              o.out);
  }
  std::cout << explorer.QoiSurfaceJson(o.qoi).dump() << '\n';
  return 0;
}

int ExportSnapshotsCmd(const Options &o)
{
  const JobConfig config = JobConfig::Load(o.config);
  const auto problem = MakeProblem(config);
  ExportSnapshots(problem->Sampler(), *problem->Grid(), o.out);
  std::cout << "wrote " << problem->Grid()->TotalNodes() << " snapshots to " << o.out << '\n';
  return 0;
}

int Serve(const Options &o)
{
  const JobConfig config = JobConfig::Load(o.config);
  auto explorer = std::make_shared<const Explorer>(LoadExplorer(o, config));
  Service service(explorer, o.static_dir.empty() ? std::nullopt
                                                 : std::optional<fs::path>(o.static_dir));
  const int port = service.Bind(o.host, o.port);
  if (port < 0)
  {
    std::cerr << "pgdir: cannot bind " << o.host << ':' << o.port << '\n';
    return kExitBind;
  }
  g_service = &service;
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  std::cerr << "pgdir: serving " << VademecumPath(o, config).string() << " on http://" << o.host
            << ':' << port << std::endl;
  service.Listen();
  g_service = nullptr;
  return 0;
}

int Run(const std::function<int()> &fn)
{
  try
  {
    return fn();
  }
  catch (const MissingInput &e)
  {
    std::cerr << "pgdir: " << e.what() << '\n';
    return kExitMissing;
  }
  catch (const RangeError &e)
  {
    std::cerr << "pgdir: " << e.what() << '\n';
    return kExitRange;
  }
  catch (const std::exception &e)
  {
    std::cerr << "pgdir: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Parametric inertia-relief vademecum builder and explorer"};
  app.require_subcommand(1);
  Options o;

  auto config = [&](CLI::App *sub)
  { sub->add_option("--config,-c", o.config, "job config (JSON)")->required(); };
  auto vademecum = [&](CLI::App *sub)
  { sub->add_option("--vademecum", o.vademecum, "vademecum file (default: config output)"); };

  CLI::App *build = app.add_subcommand("build", "offline stage: write the vademecum and report");
  config(build);

  CLI::App *eval = app.add_subcommand("eval", "evaluate the vademecum at parameter values");
  config(eval);
  vademecum(eval);
  eval->add_option("--mu", o.mu, "comma-separated parameter values")->required();
  eval->add_flag("--full", o.full, "list every node instead of the surface nodes");

  CLI::App *oracle = app.add_subcommand("oracle", "direct inertia-relief solve at parameter values");
  config(oracle);
  oracle->add_option("--mu", o.mu, "comma-separated parameter values")->required();
  oracle->add_flag("--full", o.full, "list every node instead of the surface nodes");

  CLI::App *error = app.add_subcommand("error-study", "relative error for every truncation rank");
  config(error);
  vademecum(error);
  error->add_option("--out", o.out, "CSV file (default: config error_csv)");

  CLI::App *pareto = app.add_subcommand("pareto", "objectives over the grid and Pareto front");
  config(pareto);
  vademecum(pareto);
  pareto->add_option("--objective", o.objective, "objective spec JSON overriding the stored one");
  pareto->add_option("--out", o.out, "CSV or JSON file (default: config pareto_output)");

  CLI::App *surface = app.add_subcommand("qoi-surface", "QoI at every grid node");
  config(surface);
  vademecum(surface);
  surface->add_option("--qoi", o.qoi, "delta_uz or ets")->check(CLI::IsMember({"delta_uz", "ets"}));
  surface->add_option("--out", o.out, "CSV or JSON file");

  CLI::App *snapshots =
      app.add_subcommand("export-snapshots", "write K, M, F per grid node as Matrix Market");
  config(snapshots);
  snapshots->add_option("--dir", o.out, "output directory")->required();

  CLI::App *serve = app.add_subcommand("serve", "HTTP service over a vademecum");
  config(serve);
  vademecum(serve);
  serve->add_option("--host", o.host, "bind address");
  serve->add_option("--port", o.port, "port (0 picks a free one)");
  serve->add_option("--static", o.static_dir, "directory served under /ui");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    return app.exit(e) == 0 ? 0 : kExitFailure;
  }

  if (*build) return Run([&] { return Build(o); });
  if (*eval) return Run([&] { return Eval(o); });
  if (*oracle) return Run([&] { return Oracle(o); });
  if (*error) return Run([&] { return ErrorStudyCmd(o); });
  if (*pareto) return Run([&] { return Pareto(o); });
  if (*surface) return Run([&] { return QoiSurface(o); });
  if (*snapshots) return Run([&] { return ExportSnapshotsCmd(o); });
  return Run([&] { return Serve(o); });
}
