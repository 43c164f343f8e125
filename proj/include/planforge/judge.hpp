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

#include <string>

#include "planforge/errors.hpp"

namespace planforge {

class ChatClient;  // chat.hpp

enum class JudgeMode { ExactNormalized, LlmJudge };

const char* to_string(JudgeMode m);
JudgeMode judge_mode_from_string(const std::string& s);

struct JudgeVerdict {
  bool success = false;
  std::string normalized_answer;
  std::string rationale;
  long tokens_in = 0;
  long tokens_out = 0;
};

/// Lowercase, trim, collapse internal whitespace, strip surrounding quotes
/// and trailing periods. Deterministic.
std::string normalize_answer(const std::string& text);

/// Exact-match verdict: normalized equality, except that two answers which
/// both parse as numbers compare with relative tolerance 1e-6.
JudgeVerdict judge_exact(const std::string& answer, const std::string& gold);

/// One chat call against a fixed rubric prompt; the reply must contain
/// VERDICT: correct|incorrect. Throws BackendError on transport failure.
JudgeVerdict judge_llm(const std::string& query, const std::string& answer,
                       const std::string& gold, ChatClient& client);

}  // namespace planforge
