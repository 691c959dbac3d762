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

#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "refine/feedback.h"
#include "testkit.h"

namespace refine {
namespace {

using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  void Start(std::optional<std::string> token = std::nullopt) {
    auto instances = testkit::MwpInstances(3, 5);
    for (auto& i : testkit::SnlrInstances(2, 6)) instances.push_back(std::move(i));
    manager_ = std::make_unique<SessionManager>(
        std::move(instances), TaskResources::Default(),
        DefaultSessionGenerators(TaskResources::Default()));
    ServiceOptions options;
    options.port = 0;
    options.token = token;
    service_ = std::make_unique<HttpService>(*manager_, options);
    port_ = service_->Bind();
    thread_ = std::thread([this] { service_->Serve(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    if (token) client_->set_bearer_token_auth(*token);
  }

  void TearDown() override {
    if (service_) service_->Stop();
    if (thread_.joinable()) thread_.join();
  }

  std::pair<int, json> Post(const std::string& path, const json& body) {
    auto res = client_->Post(path, body.dump(), "application/json");
    if (!res) return {0, {}};
    return {res->status, res->body.empty() ? json() : json::parse(res->body)};
  }

  std::pair<int, json> Get(const std::string& path) {
    auto res = client_->Get(path);
    if (!res) return {0, {}};
    return {res->status, json::parse(res->body)};
  }

  std::unique_ptr<SessionManager> manager_;
  std::unique_ptr<HttpService> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ServiceTest, SessionLifecycle) {
  Start();
  EXPECT_EQ(Get("/health").first, 200);
  auto [status, instances] = Get("/instances");
  EXPECT_EQ(status, 200);

  auto [created, view] = Post("/sessions", {{"instance_id", "mwp-00000"}, {"max_turns", 2}});
  ASSERT_EQ(created, 201);
  const std::string id = view.at("id");
  EXPECT_EQ(view.at("task"), "mwp");
  EXPECT_EQ(view.at("turn"), 1);
  EXPECT_FALSE(view.at("context").get<std::string>().empty());

  auto [ok, after] = Post("/sessions/" + id + "/feedback",
                          {{"structured", {{"type", "IncorrectOperators"}, {"step", 0}}}});
  EXPECT_EQ(ok, 200);
  EXPECT_EQ(after.at("turns").size(), 1u);

  EXPECT_EQ(Get("/sessions/" + id + "/trace").first, 409);
  auto [done, finished] = Post("/sessions/" + id + "/feedback", {{"no_hint", true}});
  EXPECT_EQ(done, 200);
  EXPECT_EQ(finished.at("state"), "finished");
  EXPECT_EQ(Post("/sessions/" + id + "/feedback", {{"no_hint", true}}).first, 409);

  auto [traced, trace] = Get("/sessions/" + id + "/trace");
  EXPECT_EQ(traced, 200);
  EXPECT_EQ(trace.at("instance_id"), "mwp-00000");
  EXPECT_EQ(Get("/sessions").second.at("sessions").size(), 1u);
}

TEST_F(ServiceTest, ErrorMapping) {
  Start();
  EXPECT_EQ(Get("/sessions/s424242").first, 404);
  auto [unknown, body] = Post("/sessions", {{"instance_id", "nope"}});
  EXPECT_EQ(unknown, 404);
  EXPECT_EQ(body.at("error").at("code"), "unknown_instance");
  EXPECT_EQ(Post("/sessions", json::object()).first, 400);
  EXPECT_EQ(Post("/sessions", {{"instance_id", "mwp-00000"}, {"max_turns", 0}}).first,
            400);

  auto [created, view] = Post("/sessions", {{"instance_id", "snlr-00000"}});
  ASSERT_EQ(created, 201);
  const std::string id = view.at("id");
  auto [bad, err] = Post("/sessions/" + id + "/feedback",
                         {{"structured", {{"type", "IncorrectOperators"}, {"step", 0}}}});
  EXPECT_EQ(bad, 422);
  EXPECT_EQ(err.at("error").at("fields").at(0).at("field"), "type");
  EXPECT_EQ(Post("/sessions/" + id + "/feedback", {{"text", 5}}).first, 422);
  auto raw = client_->Post("/sessions/" + id + "/feedback", "{oops", "application/json");
  ASSERT_TRUE(raw);
  EXPECT_EQ(raw->status, 400);
}

TEST_F(ServiceTest, BearerToken) {
  Start("sekrit");
  EXPECT_EQ(Get("/health").first, 200);
  httplib::Client anonymous("127.0.0.1", port_);
  auto res = anonymous.Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 401);
}

TEST_F(ServiceTest, TemplatesCoverTaxonomy) {
  Start();
  auto [status, body] = Get("/templates");
  ASSERT_EQ(status, 200);
  EXPECT_EQ(body, TemplateCatalog());
  const auto& rows = body.at("templates");
  ASSERT_EQ(rows.size(), static_cast<std::size_t>(kErrorKindCount));
  for (const auto& row : rows) {
    auto parsed = ParseFeedback(row.at("example").get<std::string>());
    ASSERT_TRUE(parsed.structured() != nullptr) << row.dump();
    EXPECT_EQ(ErrorKindName(KindOf(parsed.structured()->error)),
              row.at("type").get<std::string>());
  }
  EXPECT_EQ(body.at("no_hint"), "No hint");
}

TEST_F(ServiceTest, OracleSuggestionOptIn) {
  Start();
  auto [created, view] = Post("/sessions", {{"instance_id", "mwp-00001"},
                                            {"oracle_suggestion", true}});
  ASSERT_EQ(created, 201);
  EXPECT_FALSE(view.at("oracle_suggestion").is_null());
  auto [plain_status, plain] = Post("/sessions", {{"instance_id", "mwp-00001"}});
  EXPECT_TRUE(plain.at("oracle_suggestion").is_null());
}

}  // namespace
}  // namespace refine
