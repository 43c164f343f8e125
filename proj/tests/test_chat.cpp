/*
 * Copyright (C) 2026 The planforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "planforge/chat.hpp"
#include "planforge/executor.hpp"
#include "planforge/judge.hpp"
#include "test_support.hpp"

using namespace planforge;
using namespace pftest;
using json = nlohmann::json;

namespace {

/// Local chat-completions endpoint with a scriptable reply queue.
class MockServer {
public:
  explicit MockServer(int fail_first_n = 0) : fail_first_(fail_first_n) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   requests_ += 1;
                   last_body_ = req.body;
                   last_auth_ = req.get_header_value("Authorization");
                   if (fail_first_ > 0) {
                     fail_first_ -= 1;
                     res.status = 503;
                     res.set_content("overloaded", "text/plain");
                     return;
                   }
                   std::string content = "FINAL: Paris";
                   if (!replies_.empty()) {
                     content = replies_.front();
                     replies_.erase(replies_.begin());
                   }
                   json out;
                   out["choices"] = {{{"message", {{"role", "assistant"},
                                                   {"content", content}}}}};
                   out["usage"] = {{"prompt_tokens", 11}, {"completion_tokens", 7}};
                   res.set_content(out.dump(), "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
  }

  void push_reply(std::string r) { replies_.push_back(std::move(r)); }

  int requests() const { return requests_; }
  std::string last_body() const { return last_body_; }
  std::string last_auth() const { return last_auth_; }

private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> fail_first_;
  std::vector<std::string> replies_;
  std::atomic<int> requests_{0};
  std::string last_body_;
  std::string last_auth_;
};

HttpChatOptions fast_options(const MockServer& server) {
  HttpChatOptions o;
  o.base_url = server.base_url();
  o.api_key = "test-key";
  o.backoff_base_ms = 5;  // keep retry tests quick
  o.timeout_sec = 5;
  return o;
}

ChatRequest simple_request() {
  ChatRequest req;
  req.model = "agent";
  req.temperature = 0.25;
  req.max_tokens = 128;
  req.messages.push_back({"system", "be brief"});
  req.messages.push_back({"user", "capital of France?"});
  return req;
}

}  // namespace

TEST_CASE("http client: wire format, bearer token, usage parsing") {
  MockServer server;
  HttpChatClient client(fast_options(server));
  ChatResponse resp = client.complete(simple_request());
  CHECK(resp.content == "FINAL: Paris");
  CHECK(resp.tokens_in == 11);
  CHECK(resp.tokens_out == 7);
  CHECK(server.last_auth() == "Bearer test-key");

  json body = json::parse(server.last_body());
  CHECK(body["model"] == "agent");
  CHECK(body["temperature"] == 0.25);
  CHECK(body["max_tokens"] == 128);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
}

TEST_CASE("http client: 5xx retried with backoff until success") {
  MockServer server(/*fail_first_n=*/2);
  HttpChatClient client(fast_options(server));
  ChatResponse resp = client.complete(simple_request());
  CHECK(resp.content == "FINAL: Paris");
  CHECK(server.requests() == 3);
}

TEST_CASE("http client: exhausted retries raise a backend error") {
  MockServer server(/*fail_first_n=*/99);
  HttpChatOptions o = fast_options(server);
  o.max_attempts = 3;
  HttpChatClient client(o);
  CHECK_THROWS_AS(client.complete(simple_request()), BackendError);
  CHECK(server.requests() == 3);
}

TEST_CASE("http client: connection refused raises after retries") {
  HttpChatOptions o;
  o.base_url = "http://127.0.0.1:1/v1";  // nothing listens here
  o.max_attempts = 2;
  o.backoff_base_ms = 1;
  o.timeout_sec = 1;
  HttpChatClient client(o);
  CHECK_THROWS_AS(client.complete(simple_request()), BackendError);
}

TEST_CASE("llm planner: one call per completion") {
  MockServer server;
  server.push_reply("```plan\nnode A | task | t | lookup(capital, France)\n```");
  HttpChatClient client(fast_options(server));
  LlmPlanner planner(client, "planner-model");
  PlannerReply reply = planner.complete("system prompt", "Query: q");
  CHECK(reply.text.find("```plan") != std::string::npos);
  CHECK(reply.tokens_in == 11);
  CHECK(server.requests() == 1);
}

TEST_CASE("llm backend: tool turn then final answer") {
  MockServer server;
  server.push_reply("TOOL: lookup(capital, France)");
  server.push_reply("FINAL: Paris");
  HttpChatClient client(fast_options(server));
  ScriptedWorld world = tiny_world();
  LlmBackendOptions options;
  LlmBackend backend(client, world, options);

  Directive d;
  d.node = id("n01");
  d.instruction = "lookup(capital, France)";
  d.role = "searcher";
  DirectiveOutcome out = backend.execute(d, "Query: capital of France\n", {});
  CHECK(out.ok);
  CHECK(out.output == "Paris");
  CHECK(out.tokens_in == 22);  // two chat turns
  CHECK(server.requests() == 2);
}

TEST_CASE("llm backend: turn cap exceeded fails the node") {
  MockServer server;
  for (int i = 0; i < 8; ++i) server.push_reply("TOOL: note(thinking)");
  HttpChatClient client(fast_options(server));
  ScriptedWorld world = tiny_world();
  LlmBackendOptions options;
  options.turn_cap = 3;
  LlmBackend backend(client, world, options);
  Directive d;
  d.node = id("n01");
  d.instruction = "lookup(capital, France)";
  d.role = "searcher";
  DirectiveOutcome out = backend.execute(d, "", {});
  CHECK(!out.ok);
  CHECK(out.output.find("turn cap") != std::string::npos);
  CHECK(server.requests() == 3);
}

TEST_CASE("llm judge: rubric verdict parsed from the reply") {
  MockServer server;
  server.push_reply("VERDICT: correct");
  server.push_reply("VERDICT: incorrect");
  HttpChatClient client(fast_options(server));
  JudgeVerdict yes = judge_llm("q", "Paris", "Paris", client);
  CHECK(yes.success);
  JudgeVerdict no = judge_llm("q", "Lyon", "Paris", client);
  CHECK(!no.success);
}

TEST_CASE("options_from_env requires PF_BASE_URL") {
  unsetenv("PF_BASE_URL");
  CHECK_THROWS_AS(HttpChatClient::options_from_env(), ConfigError);
  setenv("PF_BASE_URL", "http://127.0.0.1:9/v1", 1);
  setenv("PF_API_KEY", "k", 1);
  HttpChatOptions o = HttpChatClient::options_from_env();
  CHECK(o.base_url == "http://127.0.0.1:9/v1");
  CHECK(o.api_key == "k");
  unsetenv("PF_BASE_URL");
  unsetenv("PF_API_KEY");
}

TEST_CASE("full episode over the llm backend") {
  MockServer server;
  // plan, then one node: tool turn + final
  server.push_reply("```plan\nnode n01 | task | find | lookup(capital, France)\n```");
  server.push_reply("TOOL: lookup(capital, France)");
  server.push_reply("FINAL: Paris");
  HttpChatClient client(fast_options(server));
  ScriptedWorld world = tiny_world();
  AgentSystemSpec spec = tiny_spec();
  LlmPlanner planner(client, "agent");
  LlmBackendOptions options;
  LlmBackend exec(client, world, options);
  BackendBundle bundle;
  bundle.planner = &planner;
  bundle.exec = &exec;
  bundle.judge_client = &client;
  EngineParams params;
  params.judge_mode = JudgeMode::ExactNormalized;
  EpisodeResult ep = run_episode("capital of France", std::optional<std::string>("Paris"),
                                 registry_lookup("OWL").config, spec, bundle, 0, params);
  CHECK(ep.trajectory.success);
  CHECK(ep.trajectory.aggregates.n_steps == 1);
  CHECK(ep.trajectory.aggregates.c_exec_tokens > 0);
}
