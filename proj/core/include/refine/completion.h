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

#ifndef REFINE_COMPLETION_H_
#define REFINE_COMPLETION_H_

#include <functional>
#include <memory>
#include <string>

namespace refine {

// Wire protocol shared by remote generators and critics:
//   request  {"prompt", "max_tokens", "temperature", "top_p"}
//   response {"text"}
struct CompletionRequest {
  std::string prompt;
  int max_tokens = 256;
  double temperature = 0.0;
  double top_p = 1.0;
};

// Throws refine::Error with kTransport or kTimeout.
class CompletionTransport {
 public:
  virtual ~CompletionTransport() = default;
  virtual std::string Complete(const CompletionRequest& request) = 0;
};

struct EndpointConfig {
  std::string url;  // http://host:port/path
  std::string key;  // sent as a bearer token when non-empty
  int timeout_ms = 30000;
};

std::unique_ptr<CompletionTransport> MakeHttpTransport(EndpointConfig config);

// Test double and adapter for in-process models.
class FunctionTransport : public CompletionTransport {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  explicit FunctionTransport(Fn fn) : fn_(std::move(fn)) {}
  std::string Complete(const CompletionRequest& request) override {
    return fn_(request);
  }

 private:
  Fn fn_;
};

struct RetryPolicy {
  int attempts = 3;
  int initial_backoff_ms = 250;  // doubled after every failed attempt
};

// Retries transport and timeout failures; rethrows the last one.
std::string CompleteWithRetry(CompletionTransport& transport,
                              const CompletionRequest& request,
                              const RetryPolicy& policy);

// Reads `<prefix>_URL` and `<prefix>_KEY`. Returns an empty url when unset.
EndpointConfig EndpointFromEnv(const std::string& prefix);

}  // namespace refine

#endif  // REFINE_COMPLETION_H_
