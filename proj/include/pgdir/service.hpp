// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_SERVICE_HPP
#define PGDIR_SERVICE_HPP

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include "pgdir/job.hpp"

namespace pgdir
{

struct HttpResponse
{
  int status = 200;
  Json body;
};

// Transport-independent dispatch of one request:
//   GET  /meta, GET /mesh, GET /modes/{i}
//   POST /evaluate [?full=1] {"mu": [...]}
//   POST /qoi-surface {"qoi": "delta_uz" | "ets"}
//   POST /pareto {"objective_spec": {...}}  (optional body)
// Failures come back as {code, message} with a 4xx/5xx status.
HttpResponse Route(const Explorer &explorer, const std::string &method, const std::string &path,
                   const std::map<std::string, std::string> &query, const std::string &body);

// Error payload and status for an exception thrown while handling a request.
HttpResponse ErrorResponse(const std::exception &e);

//
// HTTP front end over one immutable Explorer. Requests are served concurrently by the
// server's worker threads.
//
class Service
{
public:
  explicit Service(std::shared_ptr<const Explorer> explorer,
                   std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~Service();
  Service(const Service &) = delete;
  Service &operator=(const Service &) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1 on failure.
  int Bind(const std::string &host, int port);
  // Blocks until Stop().
  void Listen();
  // Blocks until a concurrent Listen() accepts connections.
  void WaitUntilReady() const;
  void Stop();
  bool Running() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pgdir

#endif  // PGDIR_SERVICE_HPP
