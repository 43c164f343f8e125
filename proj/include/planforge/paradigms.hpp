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
#include <string>
#include <vector>

#include "planforge/config.hpp"
#include "planforge/plan.hpp"
#include "planforge/planner.hpp"
#include "planforge/trajectory.hpp"

namespace planforge {

/// One catalogued planning paradigm: a name, the full configuration wiring
/// its four dimensions, and a short operator-facing description.
struct ParadigmEntry {
  std::string name;
  PlanConfiguration config;
  std::string description;
};

/// The seven catalogued paradigms, in canonical order:
/// OWL, OAgents, AgentOrchestra, Flash-Searcher, JoyAgent, FlowSearch,
/// Co-Sight. Immutable after first use.
const std::vector<ParadigmEntry>& paradigm_registry();

/// Throws ConfigError for unknown names.
const ParadigmEntry& registry_lookup(const std::string& name);

/// The registry matrix as a JSON document (array of entries with the four
/// dimension columns), for the CLI's `paradigms` command.
std::string registry_dump_json();

/// Documentation pack handed to meta-planner contexts: the markup grammar,
/// the scripted tool list, and one section per registry entry.
std::string meta_tool_docs();

/// System prompt used for the given initialization strategy; carries the
/// machine-readable shape marker the scripted planner keys on.
std::string init_prompt(InitStrategy strategy);

struct InitOutcome {
  PlanGraph graph;
  TrajectoryEvent event;  // PlanInit, step 0, Plan cost, all planner tokens
};

/// Instantiates a plan for `query` per config.init.strategy. Planner
/// completions are parsed from fenced markup and re-validated against the
/// configured topology kind; malformed completions are retried up to
/// config.init.parse_retries times with a corrective instruction appended.
/// Throws InitializationError when retries are exhausted. The returned
/// graph always passes validate_graph and has revision_count 0 (the
/// counter tracks post-initialization revisions).
InitOutcome initialize_plan(const std::string& query,
                            const PlanConfiguration& config, Planner& planner,
                            std::uint64_t seed);

}  // namespace planforge
