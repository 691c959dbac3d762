// Copyright 2026 The refine-loop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REFINE_HTTP_SERVICE_H_
#define REFINE_HTTP_SERVICE_H_

#include <memory>
#include <optional>
#include <string>

#include "refine/session.h"

namespace refine {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // When set, every request needs "Authorization: Bearer <token>".
  std::optional<std::string> token;
  // Used when a create request does not say.
  bool default_oracle_suggestion = false;
};

// JSON over HTTP on top of a SessionManager:
//   GET  /health
//   GET  /instances
//   GET  /templates
//   POST /sessions                  {"instance_id", "max_turns", "generator",
//                                    "oracle_suggestion"}
//   GET  /sessions
//   GET  /sessions/{id}
//   POST /sessions/{id}/feedback    {"text"} | {"structured"} | {"no_hint": true}
//   GET  /sessions/{id}/trace
// Errors come back as {"error": {"code", "message", "fields"}}.
class HttpService {
 public:
  HttpService(SessionManager& sessions, ServiceOptions options);
  ~HttpService();

  // Binds the socket and returns the bound port. Throws kIo.
  int Bind();
  // Serves until Stop(); call Bind() first.
  void Serve();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Response body for one session, shared with tests.
nlohmann::json SessionView(const SessionManager& sessions, const Session& session);

// Template table for clients: one entry per error kind with its task, the
// fields it takes and a rendering with placeholder parameters.
nlohmann::json TemplateCatalog();

}  // namespace refine

#endif  // REFINE_HTTP_SERVICE_H_
