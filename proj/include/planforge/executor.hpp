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

#include <cstdint>
#include <optional>
#include <string>

#include "planforge/adaptation.hpp"
#include "planforge/chat.hpp"
#include "planforge/config.hpp"
#include "planforge/judge.hpp"
#include "planforge/paradigms.hpp"
#include "planforge/plan.hpp"
#include "planforge/planner.hpp"
#include "planforge/trajectory.hpp"
#include "planforge/world.hpp"

namespace planforge {

struct DirectiveOutcome {
  bool ok = false;
  std::string output;
  long tokens_in = 0;
  long tokens_out = 0;
  long wall_ms = 0;
  bool anomalous = false;
};

/// Executes one directive. Implementations must be safe for concurrent
/// calls; the engine bounds in-flight calls by max_concurrency.
class ExecBackend {
public:
  virtual ~ExecBackend() = default;
  virtual DirectiveOutcome execute(const Directive& directive,
                                   const std::string& context,
                                   const ToolContext& tools) = 0;
};

/// Parses the directive instruction as a single tool call and runs it
/// against the scripted world. wall_ms is always 0 so seeded episodes
/// encode byte-identically. Scheduled failures fail the node; scheduled
/// anomalies flag the observation; scheduled corruptions garble the output.
class ScriptedBackend : public ExecBackend {
public:
  ScriptedBackend(const ScriptedWorld& world, const AgentSystemSpec& spec)
      : world_(world), spec_(spec) {}

  DirectiveOutcome execute(const Directive& directive, const std::string& context,
                           const ToolContext& tools) override;

private:
  const ScriptedWorld& world_;
  const AgentSystemSpec& spec_;
};

struct LlmBackendOptions {
  std::string model = "agent";
  double temperature = 0.0;
  int max_tokens = 4096;
  int turn_cap = 6;  // chat turns per node
};

/// Chat-driven agent: the model is shown the context, the instruction, and
/// the tool list, then loops TOOL:/OBSERVATION: turns until it emits
/// FINAL: or exhausts the per-node turn cap. Tool calls run against the
/// scripted world.
class LlmBackend : public ExecBackend {
public:
  LlmBackend(ChatClient& client, const ScriptedWorld& world, LlmBackendOptions options)
      : client_(client), world_(world), options_(std::move(options)) {}

  DirectiveOutcome execute(const Directive& directive, const std::string& context,
                           const ToolContext& tools) override;

private:
  ChatClient& client_;
  const ScriptedWorld& world_;
  LlmBackendOptions options_;
};

/// One chat call per completion; used when planning is LLM-backed.
class LlmPlanner : public Planner {
public:
  LlmPlanner(ChatClient& client, std::string model, double temperature = 0.2)
      : client_(client), model_(std::move(model)), temperature_(temperature) {}

  PlannerReply complete(const std::string& system_prompt,
                        const std::string& context) override;

private:
  ChatClient& client_;
  std::string model_;
  double temperature_;
};

struct EngineParams {
  bool concurrent = false;        // execute batches through a thread pool
  JudgeMode judge_mode = JudgeMode::ExactNormalized;
  long max_tokens_per_call = 4096;  // budget overshoot allowance unit
};

struct BackendBundle {
  Planner* planner = nullptr;
  ExecBackend* exec = nullptr;
  ChatClient* judge_client = nullptr;  // required for JudgeMode::LlmJudge
  Critic critic = nullptr;             // consulted by CriticLoop triggers
};

struct EpisodeResult {
  Trajectory trajectory;
  PlanGraph final_graph;
};

/// Deterministic context rendering: the query, then summaries of Succeeded
/// nodes in id order (when the policy includes them), then the last
/// window_k events.
std::string aggregate_context(const Trajectory& trajectory, const PlanGraph& graph,
                              const ContextPolicy& policy);

/// Replaces ${node-id} references with that node's recorded result
/// (missing results substitute the empty string).
std::string substitute_refs(const std::string& instruction, const PlanGraph& graph);

/// Wraps backend execution of one directive; the outcome is not yet
/// applied to the graph or log.
DirectiveOutcome execute_directive(const Directive& directive,
                                   const std::string& context,
                                   const ToolContext& tools, ExecBackend& backend);

/// Verdict dispatch per mode. gold must be present.
JudgeVerdict run_judge(const std::string& query, const std::string& answer,
                       const std::string& gold, JudgeMode mode, ChatClient* client);

/// Runs one full episode: initialize, then dispatch/execute/adapt loops
/// until no work remains or a budget trips, then final-answer synthesis
/// and judging. With a scripted backend and fixed seed the encoded
/// trajectory is byte-identical across runs, and concurrent batch
/// execution (params.concurrent) merges completions in node-id order so it
/// matches sequential execution exactly.
EpisodeResult run_episode(const std::string& query,
                          const std::optional<std::string>& gold,
                          const PlanConfiguration& config,
                          const AgentSystemSpec& agent_spec,
                          const BackendBundle& backend, std::uint64_t seed,
                          const EngineParams& params);

}  // namespace planforge
