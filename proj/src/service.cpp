// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "pgdir/service.hpp"

#include <chrono>
#include <httplib.h>
#include "pgdir/error.hpp"

namespace pgdir
{

namespace
{

HttpResponse Fail(int status, const std::string &code, const std::string &message)
{
  return {status, {{"code", code}, {"message", message}}};
}

Json ParseBody(const std::string &body, bool allow_empty)
{
  if (body.empty() && allow_empty)
  {
    return Json::object();
  }
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object())
  {
    throw ParseError("request body must be a JSON object");
  }
  return j;
}

bool Flag(const std::map<std::string, std::string> &query, const std::string &key)
{
  const auto it = query.find(key);
  return it != query.end() && (it->second == "1" || it->second == "true");
}

}  // namespace

HttpResponse ErrorResponse(const std::exception &e)
{
  if (dynamic_cast<const RangeError *>(&e))
  {
    return Fail(422, "range_error", e.what());
  }
  if (dynamic_cast<const ParseError *>(&e))
  {
    return Fail(400, "bad_request", e.what());
  }
  if (dynamic_cast<const Json::exception *>(&e))
  {
    return Fail(400, "bad_request", e.what());
  }
  if (dynamic_cast<const Error *>(&e))
  {
    return Fail(500, "pipeline_error", e.what());
  }
  return Fail(500, "internal_error", e.what());
}

HttpResponse Route(const Explorer &explorer, const std::string &method, const std::string &path,
                   const std::map<std::string, std::string> &query, const std::string &body)
{
  try
  {
    if (path == "/meta" || path == "/mesh" || path.starts_with("/modes/"))
    {
      if (method != "GET")
      {
        return Fail(405, "method_not_allowed", method + " " + path);
      }
      if (path == "/meta")
      {
        return {200, explorer.MetaJson()};
      }
      if (path == "/mesh")
      {
        return {200, explorer.MeshJson()};
      }
      const std::string id = path.substr(7);
      if (id.empty() || id.size() > 9 ||
          id.find_first_not_of("0123456789") != std::string::npos)
      {
        return Fail(404, "not_found", "mode index must be a positive integer");
      }
      return {200, explorer.ModeJson(std::stol(id))};
    }
    if (path == "/evaluate" || path == "/qoi-surface" || path == "/pareto")
    {
      if (method != "POST")
      {
        return Fail(405, "method_not_allowed", method + " " + path);
      }
      if (path == "/evaluate")
      {
        const Json j = ParseBody(body, false);
        if (!j.contains("mu") || !j.at("mu").is_array())
        {
          throw ParseError("evaluate: body needs \"mu\": [values]");
        }
        const auto mu = j.at("mu").get<std::vector<double>>();
        const auto start = std::chrono::steady_clock::now();
        Json out = explorer.EvaluateJson(mu, Flag(query, "full") || j.value("full", false));
        out["eval_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        return {200, out};
      }
      if (path == "/qoi-surface")
      {
        const Json j = ParseBody(body, true);
        return {200, explorer.QoiSurfaceJson(j.value("qoi", std::string("delta_uz")))};
      }
      const Json j = ParseBody(body, true);
      std::optional<ObjectiveSpec> spec;
      if (j.contains("objective_spec"))
      {
        spec = ObjectiveFromJson(j.at("objective_spec"));
      }
      return {200, explorer.ParetoJson(spec)};
    }
    return Fail(404, "not_found", "no route for " + path);
  }
  catch (const std::exception &e)
  {
    return ErrorResponse(e);
  }
}

struct Service::Impl
{
  std::shared_ptr<const Explorer> explorer;
  httplib::Server server;
  bool bound = false;
};

Service::Service(std::shared_ptr<const Explorer> explorer,
                 std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>())
{
  impl_->explorer = std::move(explorer);
  // SO_REUSEADDR only: a port held by another listener must fail to bind.
  impl_->server.set_socket_options(
      [](socket_t sock)
      {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void *>(&yes), sizeof(yes));
      });
  auto handler = [this](const httplib::Request &req, httplib::Response &res)
  {
    std::map<std::string, std::string> query;
    for (const auto &[k, v] : req.params)
    {
      query[k] = v;
    }
    const HttpResponse r = Route(*impl_->explorer, req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  if (static_dir)
  {
    impl_->server.set_mount_point("/ui", static_dir->string());
  }
  impl_->server.Get(R"(/(meta|mesh|modes/.*))", handler);
  impl_->server.Post(R"(/(evaluate|qoi-surface|pareto))", handler);
  impl_->server.Options(".*",
                        [](const httplib::Request &, httplib::Response &res)
                        {
                          res.set_header("Access-Control-Allow-Origin", "*");
                          res.set_header("Access-Control-Allow-Headers", "Content-Type");
                          res.set_header("Access-Control-Allow-Methods", "GET, POST");
                          res.status = 204;
                        });
  impl_->server.set_error_handler(
      [](const httplib::Request &req, httplib::Response &res)
      {
        if (res.body.empty())
        {
          const HttpResponse r =
              Fail(res.status, res.status == 404 ? "not_found" : "http_error",
                   req.method + " " + req.path);
          res.set_content(r.body.dump(), "application/json");
        }
      });
  impl_->server.set_exception_handler(
      [](const httplib::Request &, httplib::Response &res, std::exception_ptr ep)
      {
        HttpResponse r = Fail(500, "internal_error", "unknown failure");
        try
        {
          std::rethrow_exception(ep);
        }
        catch (const std::exception &e)
        {
          r = ErrorResponse(e);
        }
        catch (...)
        {
        }
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
      });
}

Service::~Service()
{
  Stop();
}

int Service::Bind(const std::string &host, int port)
{
  if (port == 0)
  {
    const int p = impl_->server.bind_to_any_port(host);
    impl_->bound = p > 0;
    return impl_->bound ? p : -1;
  }
  impl_->bound = impl_->server.bind_to_port(host, port);
  return impl_->bound ? port : -1;
}

void Service::Listen()
{
  if (!impl_->bound)
  {
    throw Error("service: Listen() before a successful Bind()");
  }
  impl_->server.listen_after_bind();
}

void Service::WaitUntilReady() const
{
  impl_->server.wait_until_ready();
}

void Service::Stop()
{
  if (impl_->server.is_running())
  {
    impl_->server.stop();
  }
}

bool Service::Running() const
{
  return impl_->server.is_running();
}

}  // namespace pgdir
