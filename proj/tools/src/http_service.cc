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

#include "refine/http_service.h"

#include <httplib.h>

#include "refine/io.h"

namespace refine {
using nlohmann::json;

namespace {

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kUnknownInstance:
    case ErrorCode::kUnknownFixture:
      return 404;
    case ErrorCode::kWrongState:
      return 409;
    case ErrorCode::kInvalidFeedback:
      return 422;
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kMalformedRecord:
      return 400;
    case ErrorCode::kTransport:
    case ErrorCode::kTimeout:
      return 502;
    default:
      return 500;
  }
}

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, int status, std::string_view code,
                const std::string& message, json fields = json::array()) {
  Reply(res, status,
        {{"error", {{"code", code}, {"message", message}, {"fields", fields}}}});
}

json SessionSummary(const Session& s) {
  return {{"id", s.id},
          {"instance_id", s.instance_id},
          {"state", SessionStateName(s.state)},
          {"stop", s.stop ? json(StopReasonName(*s.stop)) : json(nullptr)},
          {"turn", s.current_turn()},
          {"max_turns", s.config.max_turns}};
}

}  // namespace

json SessionView(const SessionManager& sessions, const Session& s) {
  json view = SessionToJson(s);
  view.erase("schema");
  view.erase("version");
  const TaskInstance* instance = sessions.FindInstance(s.instance_id);
  if (instance != nullptr) {
    view["task"] = TaskName(instance->task());
    view["context"] = ContextText(*instance);
  }
  view["turn"] = s.current_turn();
  if (auto suggestion = sessions.OracleSuggestion(s)) {
    view["oracle_suggestion"] = io::FeedbackToJson(*suggestion);
  } else {
    view["oracle_suggestion"] = nullptr;
  }
  return view;
}

json TemplateCatalog() {
  struct Row {
    TaskError example;
    std::vector<std::string> fields;
  };
  const std::vector<Row> rows = {
      {errors::IncorrectNumbers{OperandPosition::kFirst, 0}, {"position", "step"}},
      {errors::IncorrectOperators{0}, {"step"}},
      {errors::MissingOperators{}, {}},
      {errors::LogicallyInvalid{Connective::kAnd, 1}, {"op", "rule"}},
      {errors::MissingLink{}, {}},
      {errors::MissingImplicitKnowledge{}, {}},
      {errors::Contradiction{}, {}},
      {errors::SemanticMisalignment{"..."}, {"snippet"}},
  };
  json out = json::array();
  for (const auto& row : rows) {
    const ErrorKind kind = KindOf(row.example);
    out.push_back({{"type", ErrorKindName(kind)},
                   {"task", TaskName(TaskOf(kind))},
                   {"fields", row.fields},
                   {"example", RenderError(row.example)}});
  }
  return {{"templates", out},
          {"no_hint", kNoHintText},
          {"hint_marker", kHintMarker}};
}

struct HttpService::Impl {
  SessionManager& sessions;
  ServiceOptions options;
  httplib::Server server;
  int port = 0;

  Impl(SessionManager& s, ServiceOptions o) : sessions(s), options(std::move(o)) {}

  // Wraps a handler with auth and error mapping.
  httplib::Server::Handler Wrap(
      std::function<void(const httplib::Request&, httplib::Response&)> fn) {
    return [this, fn = std::move(fn)](const httplib::Request& req,
                                      httplib::Response& res) {
      if (options.token &&
          req.get_header_value("Authorization") != "Bearer " + *options.token) {
        ReplyError(res, 401, "unauthorized", "missing or wrong bearer token");
        return;
      }
      try {
        fn(req, res);
      } catch (const FeedbackValidationError& e) {
        json fields = json::array();
        for (const auto& f : e.fields()) {
          fields.push_back({{"field", f.field}, {"message", f.message}});
        }
        ReplyError(res, 422, ErrorCodeName(e.code()), e.what(), fields);
      } catch (const Error& e) {
        ReplyError(res, HttpStatus(e.code()), ErrorCodeName(e.code()), e.what());
      } catch (const json::exception& e) {
        ReplyError(res, 400, "malformed_request", e.what());
      } catch (const std::exception& e) {
        ReplyError(res, 500, "internal", e.what());
      }
    };
  }

  static json Body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  std::string("request body is not JSON: ") + e.what());
    }
  }

  void Routes() {
    server.Get("/health", Wrap([](const auto&, auto& res) {
                 Reply(res, 200, {{"status", "ok"}});
               }));
    server.Get("/instances", Wrap([this](const auto&, auto& res) {
                 json list = json::array();
                 for (const auto& instance : sessions.instances()) {
                   list.push_back({{"id", instance.id()},
                                   {"task", TaskName(instance.task())}});
                 }
                 Reply(res, 200, {{"instances", list}});
               }));
    server.Get("/templates", Wrap([](const auto&, auto& res) {
                 Reply(res, 200, TemplateCatalog());
               }));
    server.Post("/sessions", Wrap([this](const auto& req, auto& res) {
                  const json body = Body(req);
                  if (!body.is_object() || !body.contains("instance_id") ||
                      !body.at("instance_id").is_string()) {
                    ReplyError(res, 400, "invalid_config",
                               "instance_id is required",
                               json::array({{{"field", "instance_id"},
                                             {"message", "is required"}}}));
                    return;
                  }
                  SessionConfig config;
                  config.max_turns = body.value("max_turns", config.max_turns);
                  config.generator = body.value("generator", config.generator);
                  config.oracle_suggestion = body.value(
                      "oracle_suggestion", options.default_oracle_suggestion);
                  auto s = sessions.Create(body.at("instance_id").get<std::string>(),
                                           config);
                  Reply(res, 201, SessionView(sessions, *s));
                }));
    server.Get("/sessions", Wrap([this](const auto&, auto& res) {
                 json list = json::array();
                 for (const auto& s : sessions.List()) list.push_back(SessionSummary(*s));
                 Reply(res, 200, {{"sessions", list}});
               }));
    server.Get(R"(/sessions/([A-Za-z0-9_-]+))",
               Wrap([this](const auto& req, auto& res) {
                 auto s = sessions.Get(req.matches[1]);
                 Reply(res, 200, SessionView(sessions, *s));
               }));
    server.Post(R"(/sessions/([A-Za-z0-9_-]+)/feedback)",
                Wrap([this](const auto& req, auto& res) {
                  auto s = sessions.SubmitJson(req.matches[1], Body(req));
                  Reply(res, 200, SessionView(sessions, *s));
                }));
    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/trace)",
               Wrap([this](const auto& req, auto& res) {
                 Reply(res, 200, io::TraceToJson(sessions.ExportTrace(req.matches[1])));
               }));
  }
};

HttpService::HttpService(SessionManager& sessions, ServiceOptions options)
    : impl_(std::make_unique<Impl>(sessions, std::move(options))) {
  impl_->Routes();
}

HttpService::~HttpService() { Stop(); }

int HttpService::Bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(o.host);
  } else {
    impl_->port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (impl_->port < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  return impl_->port;
}

void HttpService::Serve() { impl_->server.listen_after_bind(); }

void HttpService::Stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace refine
