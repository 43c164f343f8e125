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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "planforge/plan.hpp"

namespace planforge {

// ---------------------------------------------------------------------------
// Atomic revision operations
// ---------------------------------------------------------------------------

struct AddNode {
  PlanNode node;
};

struct RemoveNode {
  NodeId id;
};

struct AddEdge {
  PlanEdge edge;
};

struct RemoveEdge {
  PlanEdge edge;
};

/// Partial update of mutable node fields. Status and result are engine-owned
/// and cannot be patched.
struct NodePatch {
  std::optional<std::string> title;
  std::optional<std::string> instruction;
  std::optional<std::string> role;
  std::optional<bool> aux_validated;
};

struct ModifyNode {
  NodeId id;
  NodePatch patch;
};

using AtomicOp = std::variant<AddNode, RemoveNode, AddEdge, RemoveEdge, ModifyNode>;

/// Node id an op refers to (the added node's id for AddNode, the edge
/// source for edge ops). Used by the revision rules.
std::vector<NodeId> op_referenced_nodes(const AtomicOp& op);

/// One line per op, markup syntax; used for logging and tests.
std::string describe(const AtomicOp& op);

// ---------------------------------------------------------------------------
// Graph algorithms
// ---------------------------------------------------------------------------

/// Pending nodes whose predecessors are all Succeeded (no predecessors
/// counts as satisfied), ascending id order. Throws ValidationError if the
/// graph is invalid.
std::vector<NodeId> ready_set(const PlanGraph& graph);

/// Applies the whole batch or nothing. RemoveNode drops the node's incident
/// edges; removing a Dispatched node is illegal. The result must pass
/// validate_graph or the batch is rejected with a RevisionError naming the
/// violation (cycles list their node set). A nonempty applied batch bumps
/// revision_count by exactly 1; an empty batch is a no-op.
PlanGraph apply_atomic_ops(const PlanGraph& graph, const std::vector<AtomicOp>& ops);

/// Excises finished work. A node is pruned when it is Succeeded, has at
/// least one successor (sink results feed final-answer synthesis), every
/// predecessor is Succeeded or Pruned, and no successor is Dispatched.
/// Incident edges are removed; where a surviving node depended on another
/// surviving node only through pruned ones, a rewired edge is inserted so
/// transitive dependencies survive. Each pruned node's result is appended
/// to its former direct successors' notes (pruned nodes processed in id
/// order). Leaves the Pending-restricted ready set unchanged.
PlanGraph prune_completed(const PlanGraph& graph);

/// Deterministic topological order: among all admissible orders, the
/// lexicographically smallest by node id. Throws StateError on cycles.
std::vector<NodeId> topological_order(const PlanGraph& graph);

/// GraphViz DOT rendering. Node label = title + status, one fill color per
/// status; rewired edges are dashed.
std::string to_dot(const PlanGraph& graph);

/// Compact one-line-per-node text rendering used in planner contexts.
std::string summarize_graph(const PlanGraph& graph);

}  // namespace planforge
