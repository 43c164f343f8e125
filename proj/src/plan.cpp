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

#include "planforge/plan.hpp"

#include <algorithm>

namespace planforge {

std::uint64_t stable_hash(const NodeId& id) {
  // FNV-1a, 64-bit.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : id.value) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Task: return "task";
    case NodeKind::Verification: return "verification";
    case NodeKind::Aggregation: return "aggregation";
    case NodeKind::Resolution: return "resolution";
  }
  return "task";
}

const char* to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Pending: return "pending";
    case NodeStatus::Dispatched: return "dispatched";
    case NodeStatus::Succeeded: return "succeeded";
    case NodeStatus::Failed: return "failed";
    case NodeStatus::Pruned: return "pruned";
  }
  return "pending";
}

const char* to_string(TopologyKind t) {
  switch (t) {
    case TopologyKind::Linear: return "linear";
    case TopologyKind::Dag: return "dag";
    case TopologyKind::Hierarchy: return "hierarchy";
    case TopologyKind::ThoughtGraph: return "thought_graph";
    case TopologyKind::ModularGraph: return "modular_graph";
    case TopologyKind::CrossCheckNet: return "cross_check_net";
  }
  return "dag";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "task") return NodeKind::Task;
  if (s == "verification") return NodeKind::Verification;
  if (s == "aggregation") return NodeKind::Aggregation;
  if (s == "resolution") return NodeKind::Resolution;
  throw SchemaError("unknown node kind: " + s);
}

NodeStatus node_status_from_string(const std::string& s) {
  if (s == "pending") return NodeStatus::Pending;
  if (s == "dispatched") return NodeStatus::Dispatched;
  if (s == "succeeded") return NodeStatus::Succeeded;
  if (s == "failed") return NodeStatus::Failed;
  if (s == "pruned") return NodeStatus::Pruned;
  throw SchemaError("unknown node status: " + s);
}

TopologyKind topology_kind_from_string(const std::string& s) {
  if (s == "linear") return TopologyKind::Linear;
  if (s == "dag") return TopologyKind::Dag;
  if (s == "hierarchy") return TopologyKind::Hierarchy;
  if (s == "thought_graph") return TopologyKind::ThoughtGraph;
  if (s == "modular_graph") return TopologyKind::ModularGraph;
  if (s == "cross_check_net") return TopologyKind::CrossCheckNet;
  throw SchemaError("unknown topology kind: " + s);
}

const PlanNode* PlanGraph::find_node(const NodeId& id) const {
  auto it = nodes.find(id);
  return it == nodes.end() ? nullptr : &it->second;
}

PlanNode* PlanGraph::find_node(const NodeId& id) {
  auto it = nodes.find(id);
  return it == nodes.end() ? nullptr : &it->second;
}

const PlanNode& PlanGraph::node(const NodeId& id) const {
  if (const PlanNode* n = find_node(id)) return *n;
  throw StateError("no such node: " + id.value);
}

PlanNode& PlanGraph::node(const NodeId& id) {
  if (PlanNode* n = find_node(id)) return *n;
  throw StateError("no such node: " + id.value);
}

bool PlanGraph::has_edge(const NodeId& from, const NodeId& to) const {
  PlanEdge probe{from, to, false};
  auto it = std::lower_bound(edges.begin(), edges.end(), probe, EdgeEndpointLess{});
  return it != edges.end() && it->from == from && it->to == to;
}

void PlanGraph::insert_edge(PlanEdge e) {
  auto it = std::lower_bound(edges.begin(), edges.end(), e, EdgeEndpointLess{});
  if (it != edges.end() && it->from == e.from && it->to == e.to) {
    throw RevisionError("duplicate edge " + e.from.value + " -> " + e.to.value);
  }
  edges.insert(it, std::move(e));
}

void PlanGraph::erase_edge(const NodeId& from, const NodeId& to) {
  PlanEdge probe{from, to, false};
  auto it = std::lower_bound(edges.begin(), edges.end(), probe, EdgeEndpointLess{});
  if (it == edges.end() || it->from != from || it->to != to) {
    throw RevisionError("no such edge " + from.value + " -> " + to.value);
  }
  edges.erase(it);
}

std::vector<NodeId> PlanGraph::predecessors(const NodeId& id) const {
  std::vector<NodeId> out;
  for (const PlanEdge& e : edges) {
    if (e.to == id) out.push_back(e.from);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> PlanGraph::successors(const NodeId& id) const {
  std::vector<NodeId> out;
  for (const PlanEdge& e : edges) {
    if (e.from == id) out.push_back(e.to);
  }
  // edges are sorted by (from, to), so successors arrive in order already
  return out;
}

std::vector<NodeId> PlanGraph::sinks() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes) {
    if (successors(id).empty()) out.push_back(id);
  }
  return out;
}

bool is_legal_transition(NodeStatus from, NodeStatus to) {
  switch (from) {
    case NodeStatus::Pending:
      return to == NodeStatus::Dispatched;
    case NodeStatus::Dispatched:
      return to == NodeStatus::Succeeded || to == NodeStatus::Failed;
    case NodeStatus::Failed:
      return to == NodeStatus::Dispatched;
    case NodeStatus::Succeeded:
      return to == NodeStatus::Pruned;
    case NodeStatus::Pruned:
      return false;
  }
  return false;
}

void transition(PlanNode& node, NodeStatus to) {
  if (!is_legal_transition(node.status, to)) {
    throw StateError("illegal status transition " +
                     std::string(to_string(node.status)) + " -> " +
                     std::string(to_string(to)) + " at node " + node.id.value);
  }
  node.status = to;
  if (to == NodeStatus::Dispatched) node.attempts += 1;
}

}  // namespace planforge
