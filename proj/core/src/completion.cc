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

#include "refine/completion.h"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "refine/error.h"

namespace refine {
namespace {

class HttpTransport : public CompletionTransport {
 public:
  explicit HttpTransport(EndpointConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.url.find("://");
    const auto host_start =
        scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = config_.url.find('/', host_start);
    if (path_start == std::string::npos) {
      base_ = config_.url;
      path_ = "/";
    } else {
      base_ = config_.url.substr(0, path_start);
      path_ = config_.url.substr(path_start);
    }
    if (host_start >= config_.url.size()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "endpoint url \"" + config_.url + "\" has no host");
    }
  }

  std::string Complete(const CompletionRequest& request) override {
    httplib::Client client(base_);
    const auto seconds = config_.timeout_ms / 1000;
    const auto micros = (config_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers headers;
    if (!config_.key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.key);
    }
    const nlohmann::json body = {{"prompt", request.prompt},
                                 {"max_tokens", request.max_tokens},
                                 {"temperature", request.temperature},
                                 {"top_p", request.top_p}};
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      const ErrorCode code = err == httplib::Error::Read ||
                                     err == httplib::Error::Write ||
                                     err == httplib::Error::ConnectionTimeout
                                 ? ErrorCode::kTimeout
                                 : ErrorCode::kTransport;
      throw Error(code, "request to " + config_.url +
                            " failed: " + httplib::to_string(err));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kTransport, "endpoint " + config_.url +
                                             " answered HTTP " +
                                             std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kTransport,
                  "endpoint " + config_.url + " sent a malformed reply: " +
                      e.what());
    }
  }

 private:
  EndpointConfig config_;
  std::string base_;
  std::string path_;
};

}  // namespace

std::unique_ptr<CompletionTransport> MakeHttpTransport(EndpointConfig config) {
  return std::make_unique<HttpTransport>(std::move(config));
}

std::string CompleteWithRetry(CompletionTransport& transport,
                              const CompletionRequest& request,
                              const RetryPolicy& policy) {
  int backoff = policy.initial_backoff_ms;
  for (int attempt = 1;; ++attempt) {
    try {
      return transport.Complete(request);
    } catch (const Error& e) {
      const bool retryable = e.code() == ErrorCode::kTransport ||
                             e.code() == ErrorCode::kTimeout;
      if (!retryable || attempt >= policy.attempts) throw;
    }
    if (backoff > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
    }
    backoff *= 2;
  }
}

EndpointConfig EndpointFromEnv(const std::string& prefix) {
  EndpointConfig config;
  if (const char* url = std::getenv((prefix + "_URL").c_str())) config.url = url;
  if (const char* key = std::getenv((prefix + "_KEY").c_str())) config.key = key;
  return config;
}

}  // namespace refine
