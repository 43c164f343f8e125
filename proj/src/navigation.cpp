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

#include "planforge/navigation.hpp"

#include <algorithm>
#include <map>

#include "planforge/judge.hpp"
#include "planforge/topology.hpp"

namespace planforge {

namespace {

/// Longest path from each node to a sink (sinks score 0).
std::map<NodeId, int> depth_to_sinks(const PlanGraph& g) {
  std::map<NodeId, int> depth;
  std::vector<NodeId> order = topological_order(g);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int d = 0;
    for (const NodeId& s : g.successors(*it)) {
      d = std::max(d, depth[s] + 1);
    }
    depth[*it] = d;
  }
  return depth;
}

std::vector<NodeId> pick_candidates(const PlanGraph& g, const NavigationPolicy& policy) {
  std::vector<NodeId> ready = ready_set(g);
  switch (policy.kind) {
    case NavigationKind::Sequential: {
      if (ready.size() > 1) ready.resize(1);
      return ready;
    }
    case NavigationKind::ConcurrentPaths: {
      // Speculative admission: Pending nodes whose unmet dependencies are
      // all auxiliary-validated.
      std::vector<NodeId> merged = ready;
      for (const auto& [id, n] : g.nodes) {
        if (n.status != NodeStatus::Pending) continue;
        if (std::binary_search(ready.begin(), ready.end(), id)) continue;
        bool admissible = true;
        bool has_unmet = false;
        for (const NodeId& p : g.predecessors(id)) {
          const PlanNode& pred = g.node(p);
          if (pred.status == NodeStatus::Succeeded) continue;
          has_unmet = true;
          if (!pred.aux_validated) {
            admissible = false;
            break;
          }
        }
        if (admissible && has_unmet) merged.push_back(id);
      }
      std::sort(merged.begin(), merged.end());
      return merged;
    }
    case NavigationKind::GraphTraversal: {
      std::map<NodeId, int> depth = depth_to_sinks(g);
      auto satisfied = [&](const NodeId& id) {
        int k = 0;
        for (const NodeId& p : g.predecessors(id)) {
          if (g.node(p).status == NodeStatus::Succeeded) ++k;
        }
        return k;
      };
      std::stable_sort(ready.begin(), ready.end(),
                       [&](const NodeId& a, const NodeId& b) {
                         int sa = satisfied(a), sb = satisfied(b);
                         if (sa != sb) return sa > sb;
                         if (depth[a] != depth[b]) return depth[a] < depth[b];
                         return a < b;
                       });
      return ready;
    }
    case NavigationKind::DynamicDispatch:
    case NavigationKind::CentralizedRouting:
    case NavigationKind::JointDeliberation:
    case NavigationKind::ConflictResolution:
      return ready;
  }
  return ready;
}

}  // namespace

std::vector<Directive> next_directives(const PlanGraph& graph,
                                       const NavigationPolicy& policy,
                                       const std::vector<std::string>& roster,
                                       int first_step) {
  std::vector<NodeId> candidates = pick_candidates(graph, policy);
  if (static_cast<int>(candidates.size()) > policy.max_concurrency) {
    candidates.resize(policy.max_concurrency);
  }
  std::vector<Directive> out;
  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const PlanNode& n = graph.node(candidates[i]);
    Directive d;
    d.node = n.id;
    d.instruction = n.instruction;
    d.role = assign_role(n, roster);
    d.issued_at_step = first_step + static_cast<int>(i);
    out.push_back(std::move(d));
  }
  return out;
}

std::string assign_role(const PlanNode& node, const std::vector<std::string>& roster) {
  if (roster.empty()) {
    throw ConfigError("role assignment requires a nonempty roster");
  }
  if (node.role) {
    if (std::find(roster.begin(), roster.end(), *node.role) == roster.end()) {
      throw ConfigError("declared role '" + *node.role + "' absent from roster");
    }
    return *node.role;
  }
  if (node.kind == NodeKind::Verification &&
      std::find(roster.begin(), roster.end(), "verifier") != roster.end()) {
    return "verifier";
  }
  std::vector<std::string> sorted = roster;
  std::sort(sorted.begin(), sorted.end());
  return sorted[stable_hash(node.id) % sorted.size()];
}

std::string vote(const VoteBallot& ballot) {
  if (ballot.candidates.empty()) {
    throw StateError("vote requires a nonempty ballot");
  }
  struct Group {
    int count = 0;
    NodeId min_source;
    std::string text;  // text of the smallest-id member
  };
  std::map<std::string, Group> groups;
  for (const auto& [source, text] : ballot.candidates) {
    std::string key = normalize_answer(text);
    auto [it, inserted] = groups.try_emplace(key);
    Group& g = it->second;
    g.count += 1;
    if (inserted || source < g.min_source) {
      g.min_source = source;
      g.text = text;
    }
  }
  const Group* best = nullptr;
  for (const auto& [key, g] : groups) {
    if (!best || g.count > best->count ||
        (g.count == best->count && g.min_source < best->min_source)) {
      best = &g;
    }
  }
  return best->text;
}

}  // namespace planforge
