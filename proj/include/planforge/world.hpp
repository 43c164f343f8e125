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
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "planforge/errors.hpp"
#include "planforge/plan.hpp"

namespace planforge {

struct Fact {
  std::string entity;
  std::string relation;
  std::string value;
};

/// Scheduled failure injection. `node_id` may be "*" to hit whichever node
/// executes at that step. kind "fail" fails the node; kind "anomaly" lets
/// it succeed but flags the observation.
struct FailureEntry {
  int step = 0;
  std::string node_id;
  std::string kind = "fail";
};

struct ToolInfo {
  std::string name;
  std::string description;
};

/// The scripted tool registry shared by the scripted and LLM backends.
const std::vector<ToolInfo>& tool_registry();
std::vector<std::string> tool_names();
std::string tool_docs();

struct ToolOutcome {
  bool ok = false;
  std::string output;
};

/// Inputs a tool may draw on besides its argument string.
struct ToolContext {
  // (id, result) of succeeded predecessors, ascending id order.
  std::vector<std::pair<NodeId, std::string>> predecessor_results;
};

/// Desk-scale oracle environment: a (entity, relation) -> value fact store,
/// an arithmetic evaluator, and a seeded failure plan. Lookups are pure;
/// forced failures occur exactly as scheduled.
class ScriptedWorld {
public:
  ScriptedWorld() = default;

  void add_fact(Fact f);
  void schedule_failure(FailureEntry e);

  std::optional<std::string> lookup(const std::string& relation,
                                    const std::string& entity) const;

  /// The scheduled kind ("fail" / "anomaly") if (step, node) is covered.
  std::optional<std::string> forced_failure(int step, const NodeId& node) const;

  /// Executes `name(arg)` against the world. `arg` must already have
  /// ${ref} placeholders substituted. Unknown tool names are a failed
  /// outcome, not an exception.
  ToolOutcome run_tool(const std::string& name, const std::string& arg,
                       const ToolContext& ctx) const;

  std::size_t fact_count() const { return facts_.size(); }

  /// facts: line-delimited {entity, relation, value}.
  /// failures: line-delimited {step, node_id[, kind]}; optional file.
  static ScriptedWorld from_files(const std::string& facts_path,
                                  const std::string& failures_path = "");

private:
  std::map<std::pair<std::string, std::string>, std::string> facts_;
  std::vector<FailureEntry> failures_;
};

/// Evaluates `+ - * /` expressions with parentheses; throws ParseError on
/// malformed input.
double eval_arithmetic(const std::string& expr);

/// Numeric rendering used by scripted tools: integers without a decimal
/// point, otherwise shortest fixed form.
std::string format_number(double v);

/// Splits a tool-call argument list on top-level commas.
std::vector<std::string> split_args(const std::string& args);

}  // namespace planforge
