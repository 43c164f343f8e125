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
#include <utility>
#include <vector>

#include "planforge/config.hpp"
#include "planforge/plan.hpp"

namespace planforge {

/// Maps graph state to the next batch of directives under `policy`.
/// All policies draw from the ready set in ascending id order and never
/// exceed max_concurrency; ConcurrentPaths additionally admits Pending
/// nodes whose unmet predecessors all carry the aux_validated flag, and
/// GraphTraversal reorders by readiness score (satisfied-predecessor count
/// descending, then remaining depth to the sinks ascending, then id).
/// Directives get consecutive step numbers starting at `first_step`.
std::vector<Directive> next_directives(const PlanGraph& graph,
                                       const NavigationPolicy& policy,
                                       const std::vector<std::string>& roster,
                                       int first_step);

/// Role resolution: the node's declared role when present (must be in the
/// roster or a ConfigError is thrown); otherwise "verifier" for
/// Verification nodes when the roster has one; otherwise round-robin over
/// the sorted roster keyed by a stable hash of the node id, so roster
/// reordering does not change assignments.
std::string assign_role(const PlanNode& node, const std::vector<std::string>& roster);

struct VoteBallot {
  std::vector<std::pair<NodeId, std::string>> candidates;
};

/// Majority vote over normalized answers; ties go to the answer whose
/// smallest source node id is least. Permutation-invariant. Throws
/// StateError on an empty ballot.
std::string vote(const VoteBallot& ballot);

}  // namespace planforge
