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

namespace planforge {

/// Violations are data, not failures: an empty report means valid.
struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string joined() const;
};

/// Checks every structural invariant of the graph: edge endpoints exist,
/// no self-loops, no duplicate edges, acyclicity, and the per-kind
/// constraints (Linear = one chain, Hierarchy = in-degree <= 1).
ValidationReport validate_graph(const PlanGraph& graph);

/// Budgets strictly positive, trigger periods >= 1, max_concurrency >= 1,
/// and Sequential navigation pinned to max_concurrency = 1.
ValidationReport validate_configuration(const PlanConfiguration& config);

/// Roster nonempty and every toolset entry resolving in `registry_tools`.
ValidationReport validate_agent_spec(const AgentSystemSpec& spec,
                                     const std::vector<std::string>& registry_tools);

}  // namespace planforge
