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

#include "planforge/judge.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "planforge/chat.hpp"

namespace planforge {

const char* to_string(JudgeMode m) {
  return m == JudgeMode::ExactNormalized ? "exact" : "llm";
}

JudgeMode judge_mode_from_string(const std::string& s) {
  if (s == "exact") return JudgeMode::ExactNormalized;
  if (s == "llm") return JudgeMode::LlmJudge;
  throw SchemaError("unknown judge mode: " + s);
}

std::string normalize_answer(const std::string& text) {
  std::string s;
  s.reserve(text.size());
  for (char c : text) {
    s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  // trim
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  // strip surrounding quotes and trailing periods, repeatedly
  while (!s.empty()) {
    if (s.size() >= 2 &&
        ((s.front() == '"' && s.back() == '"') ||
         (s.front() == '\'' && s.back() == '\''))) {
      s = s.substr(1, s.size() - 2);
      continue;
    }
    if (s.back() == '.') {
      s.pop_back();
      continue;
    }
    break;
  }
  // collapse internal whitespace
  std::string out;
  bool in_ws = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out += ' ';
    in_ws = false;
    out += c;
  }
  return out;
}

namespace {

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size()) return std::nullopt;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

JudgeVerdict judge_exact(const std::string& answer, const std::string& gold) {
  JudgeVerdict v;
  std::string a = normalize_answer(answer);
  std::string g = normalize_answer(gold);
  v.normalized_answer = a;
  auto na = parse_number(a);
  auto ng = parse_number(g);
  if (na && ng) {
    double denom = std::max(std::abs(*na), std::abs(*ng));
    double rel = denom == 0.0 ? 0.0 : std::abs(*na - *ng) / denom;
    v.success = rel <= 1e-6;
    v.rationale = v.success ? "numeric match" : "numeric mismatch";
  } else {
    v.success = (a == g);
    v.rationale = v.success ? "exact match" : "mismatch";
  }
  return v;
}

JudgeVerdict judge_llm(const std::string& query, const std::string& answer,
                       const std::string& gold, ChatClient& client) {
  ChatRequest req;
  req.model = "judge";
  req.temperature = 0.0;
  req.max_tokens = 256;
  req.messages.push_back(
      {"system",
       "You grade an agent's final answer against a reference answer. "
       "Accept semantically equivalent phrasings. Reply with exactly one "
       "line: VERDICT: correct or VERDICT: incorrect."});
  req.messages.push_back({"user", "Question: " + query + "\nReference: " + gold +
                                      "\nAnswer: " + answer});
  ChatResponse resp = client.complete(req);
  JudgeVerdict v;
  v.tokens_in = resp.tokens_in;
  v.tokens_out = resp.tokens_out;
  v.normalized_answer = normalize_answer(answer);
  std::string lowered = normalize_answer(resp.content);
  v.success = lowered.find("verdict: correct") != std::string::npos;
  v.rationale = resp.content;
  return v;
}

}  // namespace planforge
