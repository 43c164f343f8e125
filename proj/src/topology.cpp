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

#include "planforge/topology.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "planforge/validate.hpp"

namespace planforge {

std::vector<NodeId> op_referenced_nodes(const AtomicOp& op) {
  struct Visitor {
    std::vector<NodeId> operator()(const AddNode& o) const { return {o.node.id}; }
    std::vector<NodeId> operator()(const RemoveNode& o) const { return {o.id}; }
    std::vector<NodeId> operator()(const AddEdge& o) const {
      return {o.edge.from, o.edge.to};
    }
    std::vector<NodeId> operator()(const RemoveEdge& o) const {
      return {o.edge.from, o.edge.to};
    }
    std::vector<NodeId> operator()(const ModifyNode& o) const { return {o.id}; }
  };
  return std::visit(Visitor{}, op);
}

std::string describe(const AtomicOp& op) {
  struct Visitor {
    std::string operator()(const AddNode& o) const {
      return "add_node " + o.node.id.value;
    }
    std::string operator()(const RemoveNode& o) const {
      return "remove_node " + o.id.value;
    }
    std::string operator()(const AddEdge& o) const {
      return "add_edge " + o.edge.from.value + " -> " + o.edge.to.value;
    }
    std::string operator()(const RemoveEdge& o) const {
      return "remove_edge " + o.edge.from.value + " -> " + o.edge.to.value;
    }
    std::string operator()(const ModifyNode& o) const {
      return "modify_node " + o.id.value;
    }
  };
  return std::visit(Visitor{}, op);
}

std::vector<NodeId> ready_set(const PlanGraph& g) {
  ValidationReport report = validate_graph(g);
  if (!report.ok()) {
    throw ValidationError("invalid graph: " + report.joined());
  }
  std::vector<NodeId> out;
  for (const auto& [id, n] : g.nodes) {
    if (n.status != NodeStatus::Pending) continue;
    bool ready = true;
    for (const NodeId& p : g.predecessors(id)) {
      if (g.node(p).status != NodeStatus::Succeeded) {
        ready = false;
        break;
      }
    }
    if (ready) out.push_back(id);
  }
  return out;  // map iteration is already ascending
}

namespace {

void apply_one(PlanGraph& g, const AtomicOp& op) {
  if (const auto* add = std::get_if<AddNode>(&op)) {
    if (g.has_node(add->node.id)) {
      throw RevisionError("add_node: id already exists: " + add->node.id.value);
    }
    g.nodes.emplace(add->node.id, add->node);
    return;
  }
  if (const auto* rem = std::get_if<RemoveNode>(&op)) {
    const PlanNode* n = g.find_node(rem->id);
    if (!n) {
      throw RevisionError("remove_node: no such node: " + rem->id.value);
    }
    if (n->status == NodeStatus::Dispatched) {
      throw RevisionError("remove_node: node is dispatched: " + rem->id.value);
    }
    std::erase_if(g.edges, [&](const PlanEdge& e) {
      return e.from == rem->id || e.to == rem->id;
    });
    g.nodes.erase(rem->id);
    return;
  }
  if (const auto* add = std::get_if<AddEdge>(&op)) {
    const PlanEdge& e = add->edge;
    if (e.from == e.to) {
      throw RevisionError("add_edge: self-loop at " + e.from.value);
    }
    if (!g.has_node(e.from) || !g.has_node(e.to)) {
      throw RevisionError("add_edge: dangling reference " + e.from.value +
                          " -> " + e.to.value);
    }
    g.insert_edge(e);
    return;
  }
  if (const auto* rem = std::get_if<RemoveEdge>(&op)) {
    g.erase_edge(rem->edge.from, rem->edge.to);
    return;
  }
  const auto& mod = std::get<ModifyNode>(op);
  PlanNode* n = g.find_node(mod.id);
  if (!n) {
    throw RevisionError("modify_node: no such node: " + mod.id.value);
  }
  if (mod.patch.title) n->title = *mod.patch.title;
  if (mod.patch.instruction) n->instruction = *mod.patch.instruction;
  if (mod.patch.role) n->role = *mod.patch.role;
  if (mod.patch.aux_validated) n->aux_validated = *mod.patch.aux_validated;
}

}  // namespace

PlanGraph apply_atomic_ops(const PlanGraph& graph, const std::vector<AtomicOp>& ops) {
  if (ops.empty()) return graph;
  PlanGraph out = graph;
  for (const AtomicOp& op : ops) {
    apply_one(out, op);
  }
  ValidationReport report = validate_graph(out);
  if (!report.ok()) {
    throw RevisionError("revision rejected: " + report.joined());
  }
  out.revision_count += 1;
  return out;
}

PlanGraph prune_completed(const PlanGraph& graph) {
  PlanGraph out = graph;

  std::set<NodeId> prunable;
  for (const auto& [id, n] : out.nodes) {
    if (n.status != NodeStatus::Succeeded) continue;
    // Sinks stay: their results are what final-answer synthesis reads.
    std::vector<NodeId> succs = out.successors(id);
    if (succs.empty()) continue;
    bool deps_resolved = true;
    for (const NodeId& p : out.predecessors(id)) {
      NodeStatus s = out.node(p).status;
      if (s != NodeStatus::Succeeded && s != NodeStatus::Pruned) {
        deps_resolved = false;
        break;
      }
    }
    if (!deps_resolved) continue;
    bool successor_in_flight = false;
    for (const NodeId& s : succs) {
      if (out.node(s).status == NodeStatus::Dispatched) {
        successor_in_flight = true;
        break;
      }
    }
    if (!successor_in_flight) prunable.insert(id);
  }
  if (prunable.empty()) return out;

  // Hand each pruned node's result down to its former direct successors.
  for (const NodeId& id : prunable) {
    const PlanNode& pruned = out.node(id);
    if (!pruned.result) continue;
    std::string note = "[" + id.value + "] " + *pruned.result;
    for (const NodeId& s : out.successors(id)) {
      out.node(s).notes.push_back(note);
    }
  }

  // Survivor pairs connected through pruned-only interior paths keep a
  // (rewired) edge so transitive dependencies are preserved.
  std::vector<PlanEdge> old_edges = out.edges;
  auto survives = [&](const NodeId& id) { return !prunable.count(id); };
  std::vector<PlanEdge> to_add;
  for (const auto& [src, n] : out.nodes) {
    if (!survives(src)) continue;
    // BFS through pruned nodes only.
    std::set<NodeId> visited;
    std::vector<NodeId> frontier;
    for (const PlanEdge& e : old_edges) {
      if (e.from == src && prunable.count(e.to) && visited.insert(e.to).second) {
        frontier.push_back(e.to);
      }
    }
    std::set<NodeId> reachable_survivors;
    while (!frontier.empty()) {
      NodeId cur = frontier.back();
      frontier.pop_back();
      for (const PlanEdge& e : old_edges) {
        if (e.from != cur) continue;
        if (prunable.count(e.to)) {
          if (visited.insert(e.to).second) frontier.push_back(e.to);
        } else {
          reachable_survivors.insert(e.to);
        }
      }
    }
    for (const NodeId& dst : reachable_survivors) {
      if (!out.has_edge(src, dst)) to_add.push_back(PlanEdge{src, dst, true});
    }
  }

  std::erase_if(out.edges, [&](const PlanEdge& e) {
    return prunable.count(e.from) || prunable.count(e.to);
  });
  for (PlanEdge& e : to_add) {
    out.insert_edge(std::move(e));
  }
  for (const NodeId& id : prunable) {
    transition(out.node(id), NodeStatus::Pruned);
  }
  return out;
}

std::vector<NodeId> topological_order(const PlanGraph& g) {
  std::map<NodeId, int> indeg;
  for (const auto& [id, n] : g.nodes) indeg[id] = 0;
  for (const PlanEdge& e : g.edges) indeg[e.to] += 1;

  std::set<NodeId> ready;
  for (const auto& [id, d] : indeg) {
    if (d == 0) ready.insert(id);
  }
  std::vector<NodeId> order;
  order.reserve(g.nodes.size());
  while (!ready.empty()) {
    // Always popping the smallest id yields the lexicographically least order.
    NodeId id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const NodeId& s : g.successors(id)) {
      if (--indeg[s] == 0) ready.insert(s);
    }
  }
  if (order.size() != g.nodes.size()) {
    std::string cyc;
    for (const auto& [id, d] : indeg) {
      if (d > 0) cyc += (cyc.empty() ? "" : ", ") + id.value;
    }
    throw StateError("cycle among {" + cyc + "}");
  }
  return order;
}

std::string to_dot(const PlanGraph& g) {
  auto fill = [](NodeStatus s) {
    switch (s) {
      case NodeStatus::Pending: return "white";
      case NodeStatus::Dispatched: return "lightyellow";
      case NodeStatus::Succeeded: return "palegreen";
      case NodeStatus::Failed: return "lightcoral";
      case NodeStatus::Pruned: return "lightgray";
    }
    return "white";
  };
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out;
  };
  std::ostringstream os;
  os << "digraph plan {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=box, style=filled];\n";
  for (const auto& [id, n] : g.nodes) {
    os << "  \"" << escape(id.value) << "\" [label=\"" << escape(n.title)
       << "\\n" << to_string(n.status) << "\", fillcolor=" << fill(n.status)
       << "];\n";
  }
  for (const PlanEdge& e : g.edges) {
    os << "  \"" << escape(e.from.value) << "\" -> \"" << escape(e.to.value)
       << "\"";
    if (e.rewired) os << " [style=dashed]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string summarize_graph(const PlanGraph& g) {
  std::ostringstream os;
  os << "topology: " << to_string(g.topology_kind)
     << " revisions: " << g.revision_count << "\n";
  for (const auto& [id, n] : g.nodes) {
    os << "node " << id.value << " [" << to_string(n.status) << "] " << n.title;
    if (n.result) os << " => " << *n.result;
    os << "\n";
  }
  for (const PlanEdge& e : g.edges) {
    os << "edge " << e.from.value << " -> " << e.to.value << "\n";
  }
  return os.str();
}

}  // namespace planforge
