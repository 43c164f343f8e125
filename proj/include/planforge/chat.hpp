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

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "planforge/errors.hpp"

namespace planforge {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 4096;
};

struct ChatResponse {
  std::string content;
  long tokens_in = 0;
  long tokens_out = 0;
};

/// Chat-completion transport. Implementations must be safe for concurrent
/// calls.
class ChatClient {
public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct HttpChatOptions {
  std::string base_url;     // e.g. http://localhost:8080/v1
  std::string api_key;      // sent as a bearer token
  int max_attempts = 4;     // 1 try + 3 retries
  int backoff_base_ms = 1000;  // 1s, 2s, 4s
  int timeout_sec = 60;
};

/// POSTs {model, messages, temperature, max_tokens} to
/// {base_url}/chat/completions and reads choices[0].message.content plus
/// usage token counts. Transport errors and 5xx responses are retried with
/// exponential backoff; exhaustion raises BackendError.
class HttpChatClient : public ChatClient {
public:
  explicit HttpChatClient(HttpChatOptions options);
  ~HttpChatClient() override;

  ChatResponse complete(const ChatRequest& request) override;

  /// Reads PF_BASE_URL / PF_API_KEY from the environment; throws
  /// ConfigError when PF_BASE_URL is unset.
  static HttpChatOptions options_from_env();

private:
  HttpChatOptions options_;
};

}  // namespace planforge
