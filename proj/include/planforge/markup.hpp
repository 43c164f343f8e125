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
#include <vector>

#include "planforge/config.hpp"
#include "planforge/plan.hpp"
#include "planforge/topology.hpp"

namespace planforge {

// Planner completions carry structured content in fenced blocks:
//
//   ```plan
//   node <id> | <kind> | <title> | <instruction> [| role=<role>]
//   edge <from> -> <to>
//   ```
//
//   ```ops
//   add_node <id> | <kind> | <title> | <instruction> [| role=<role>]
//   remove_node <id>
//   add_edge <from> -> <to>
//   remove_edge <from> -> <to>
//   modify_node <id> | <field>=<value> [| <field>=<value> ...]
//   ```
//
//   ```config
//   topology = <kind>
//   init = <strategy>
//   triggers = <kind>[(<period>)][, ...]
//   navigation = <policy>[(<max_concurrency>)]
//   budgets = steps=<n>, tokens=<n>, retries=<n>
//   ```
//
// The first well-formed block of the requested tag is parsed; unknown
// fields and lines are ignored. Full grammar in docs/formats.md.

struct ParsedPlan {
  std::vector<PlanNode> nodes;
  std::vector<PlanEdge> edges;
};

/// Throws ParseError when no fenced `plan` block exists, on duplicate node
/// ids, or on a dependency naming an undeclared id.
ParsedPlan parse_plan_markup(const std::string& text);

/// Throws ParseError when no fenced `ops` block exists or a line is
/// malformed. An empty block parses to an empty batch.
std::vector<AtomicOp> parse_ops_markup(const std::string& text);

/// Throws ParseError when no fenced `config` block exists or the required
/// keys (topology, init, navigation) are missing.
PlanConfiguration parse_config_markup(const std::string& text);

/// True when the text contains a fenced block with the given tag.
bool has_fenced_block(const std::string& text, const std::string& tag);

std::string render_plan_markup(const ParsedPlan& plan);
std::string render_ops_markup(const std::vector<AtomicOp>& ops);
std::string render_config_markup(const PlanConfiguration& config);

}  // namespace planforge
