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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planforge/errors.hpp"

namespace planforge {

/// Node identity. Plain text, unique within one graph, ordered
/// lexicographically so every tie-break in the engine is reproducible.
struct NodeId {
  std::string value;

  NodeId() = default;
  explicit NodeId(std::string v) : value(std::move(v)) {}

  auto operator<=>(const NodeId&) const = default;
};

/// Stable 64-bit FNV-1a over the id text. Used wherever an id must map to
/// a bucket (role round-robin) without depending on std::hash.
std::uint64_t stable_hash(const NodeId& id);

enum class NodeKind { Task, Verification, Aggregation, Resolution };

enum class NodeStatus { Pending, Dispatched, Succeeded, Failed, Pruned };

enum class TopologyKind {
  Linear,
  Dag,
  Hierarchy,
  ThoughtGraph,
  ModularGraph,
  CrossCheckNet
};

const char* to_string(NodeKind k);
const char* to_string(NodeStatus s);
const char* to_string(TopologyKind t);
NodeKind node_kind_from_string(const std::string& s);
NodeStatus node_status_from_string(const std::string& s);
TopologyKind topology_kind_from_string(const std::string& s);

/// One unit of plannable work.
struct PlanNode {
  NodeId id;
  std::string title;
  std::string instruction;
  NodeKind kind = NodeKind::Task;
  NodeStatus status = NodeStatus::Pending;
  std::optional<std::string> role;
  std::optional<std::string> result;
  int attempts = 0;
  // Set via revision ops; lets a navigation policy dispatch this node's
  // dependents before the node itself has finished.
  bool aux_validated = false;
  // Result text inherited from pruned predecessors, oldest first.
  std::vector<std::string> notes;

  bool operator==(const PlanNode&) const = default;
};

/// Dependency edge: `to` depends on `from`.
struct PlanEdge {
  NodeId from;
  NodeId to;
  // True when the edge was inserted by pruning to preserve a transitive
  // dependency; rendered dashed in DOT exports.
  bool rewired = false;

  bool operator==(const PlanEdge&) const = default;
};

/// Orders edges by endpoints only; the rewired flag is payload.
struct EdgeEndpointLess {
  bool operator()(const PlanEdge& a, const PlanEdge& b) const {
    if (a.from != b.from) return a.from < b.from;
    return a.to < b.to;
  }
};

/// A plan: nodes keyed by id, edges kept sorted by (from, to).
struct PlanGraph {
  std::map<NodeId, PlanNode> nodes;
  std::vector<PlanEdge> edges;
  TopologyKind topology_kind = TopologyKind::Dag;
  int revision_count = 0;

  bool has_node(const NodeId& id) const { return nodes.count(id) > 0; }
  const PlanNode* find_node(const NodeId& id) const;
  PlanNode* find_node(const NodeId& id);

  /// Throws StateError if the node does not exist.
  const PlanNode& node(const NodeId& id) const;
  PlanNode& node(const NodeId& id);

  bool has_edge(const NodeId& from, const NodeId& to) const;
  /// Inserts keeping the (from, to) sort order; duplicates are rejected.
  void insert_edge(PlanEdge e);
  void erase_edge(const NodeId& from, const NodeId& to);

  /// Predecessor / successor ids in ascending order.
  std::vector<NodeId> predecessors(const NodeId& id) const;
  std::vector<NodeId> successors(const NodeId& id) const;

  /// Nodes with no outgoing edge, ascending id order.
  std::vector<NodeId> sinks() const;

  bool operator==(const PlanGraph&) const = default;
};

/// True iff `from` -> `to` is an admissible status transition:
/// Pending->Dispatched, Dispatched->{Succeeded,Failed},
/// Failed->Dispatched (retry), Succeeded->Pruned.
bool is_legal_transition(NodeStatus from, NodeStatus to);

/// Applies a status transition, bumping `attempts` on each entry into
/// Dispatched. Throws StateError on an illegal transition.
void transition(PlanNode& node, NodeStatus to);

}  // namespace planforge
