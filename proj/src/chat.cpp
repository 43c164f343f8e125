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

#include "planforge/chat.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace planforge {

using json = nlohmann::json;

HttpChatClient::HttpChatClient(HttpChatOptions options)
    : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw ConfigError("chat client needs a base URL");
  }
  // Normalize: no trailing slash.
  if (options_.base_url.back() == '/') {
    options_.base_url.pop_back();
  }
}

HttpChatClient::~HttpChatClient() = default;

HttpChatOptions HttpChatClient::options_from_env() {
  HttpChatOptions o;
  const char* base = std::getenv("PF_BASE_URL");
  if (!base || !*base) {
    throw ConfigError("PF_BASE_URL is not set");
  }
  o.base_url = base;
  if (const char* key = std::getenv("PF_API_KEY")) {
    o.api_key = key;
  }
  return o;
}

namespace {

/// Splits "http://host:port/prefix" into origin and path prefix.
std::pair<std::string, std::string> split_origin(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t path = scheme == std::string::npos
                         ? url.find('/')
                         : url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  return {url.substr(0, path), url.substr(path)};
}

}  // namespace

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
  json body;
  body["model"] = request.model;
  json messages = json::array();
  for (const ChatMessage& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  const std::string payload = body.dump();

  auto [origin, prefix] = split_origin(options_.base_url);
  const std::string path = prefix + "/chat/completions";

  std::string last_error;
  for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
    if (attempt > 0) {
      int delay = options_.backoff_base_ms << (attempt - 1);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    httplib::Client cli(origin);
    cli.set_connection_timeout(options_.timeout_sec, 0);
    cli.set_read_timeout(options_.timeout_sec, 0);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + options_.api_key);
    }
    httplib::Result res = cli.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error: HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("chat request failed: HTTP " +
                         std::to_string(res->status) + " " + res->body);
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) {
      throw BackendError("chat response is not valid JSON");
    }
    try {
      ChatResponse out;
      out.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      if (reply.contains("usage")) {
        const json& usage = reply["usage"];
        out.tokens_in = usage.value("prompt_tokens", 0);
        out.tokens_out = usage.value("completion_tokens", 0);
      }
      return out;
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed chat response: ") + e.what());
    }
  }
  throw BackendError("chat request failed after " +
                     std::to_string(options_.max_attempts) + " attempts: " +
                     last_error);
}

}  // namespace planforge
