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

#include "planforge/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace planforge {

std::string ValidationReport::joined() const {
  std::string out;
  for (const std::string& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

namespace {

// Kahn's algorithm; returns false and fills `cycle_nodes` when a cycle exists.
bool check_acyclic(const PlanGraph& g, std::vector<NodeId>& cycle_nodes) {
  std::map<NodeId, int> indeg;
  for (const auto& [id, n] : g.nodes) indeg[id] = 0;
  for (const PlanEdge& e : g.edges) {
    if (indeg.count(e.from) && indeg.count(e.to)) indeg[e.to] += 1;
  }
  std::set<NodeId> ready;
  for (const auto& [id, d] : indeg) {
    if (d == 0) ready.insert(id);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    NodeId id = *ready.begin();
    ready.erase(ready.begin());
    ++seen;
    for (const PlanEdge& e : g.edges) {
      if (e.from == id && indeg.count(e.to)) {
        if (--indeg[e.to] == 0) ready.insert(e.to);
      }
    }
  }
  if (seen == g.nodes.size()) return true;
  for (const auto& [id, d] : indeg) {
    if (d > 0) cycle_nodes.push_back(id);
  }
  return false;
}

std::string join_ids(const std::vector<NodeId>& ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += ids[i].value;
  }
  out += "}";
  return out;
}

}  // namespace

ValidationReport validate_graph(const PlanGraph& g) {
  ValidationReport r;

  std::set<std::pair<NodeId, NodeId>> seen_edges;
  for (const PlanEdge& e : g.edges) {
    if (e.from == e.to) {
      r.violations.push_back("self-loop at " + e.from.value);
      continue;
    }
    if (!g.has_node(e.from)) {
      r.violations.push_back("edge references missing node " + e.from.value);
    }
    if (!g.has_node(e.to)) {
      r.violations.push_back("edge references missing node " + e.to.value);
    }
    if (!seen_edges.insert({e.from, e.to}).second) {
      r.violations.push_back("duplicate edge " + e.from.value + " -> " + e.to.value);
    }
  }
  for (const auto& [id, n] : g.nodes) {
    if (n.id != id) {
      r.violations.push_back("node map key mismatch at " + id.value);
    }
    if (n.attempts < 0) {
      r.violations.push_back("negative attempts at " + id.value);
    }
  }
  if (!r.ok()) return r;  // degree/cycle checks assume well-formed edges

  std::vector<NodeId> cyc;
  if (!check_acyclic(g, cyc)) {
    r.violations.push_back("cycle among " + join_ids(cyc));
    return r;
  }

  std::map<NodeId, int> indeg, outdeg;
  for (const auto& [id, n] : g.nodes) {
    indeg[id] = 0;
    outdeg[id] = 0;
  }
  for (const PlanEdge& e : g.edges) {
    outdeg[e.from] += 1;
    indeg[e.to] += 1;
  }

  switch (g.topology_kind) {
    case TopologyKind::Linear: {
      for (const auto& [id, d] : indeg) {
        if (d > 1) r.violations.push_back("in-degree > 1 at " + id.value);
      }
      for (const auto& [id, d] : outdeg) {
        if (d > 1) r.violations.push_back("out-degree > 1 at " + id.value);
      }
      // A single chain has exactly n-1 edges; with degrees <= 1 and no
      // cycles that also forces connectivity.
      if (!g.nodes.empty() &&
          g.edges.size() != g.nodes.size() - 1 && r.ok()) {
        r.violations.push_back("linear graph is not a single chain");
      }
      break;
    }
    case TopologyKind::Hierarchy: {
      for (const auto& [id, d] : indeg) {
        if (d > 1) r.violations.push_back("in-degree > 1 at " + id.value);
      }
      break;
    }
    default:
      break;  // Dag, ThoughtGraph, ModularGraph, CrossCheckNet: acyclic only
  }
  return r;
}

ValidationReport validate_configuration(const PlanConfiguration& c) {
  ValidationReport r;
  if (c.budgets.max_steps <= 0) {
    r.violations.push_back("budgets.max_steps must be > 0");
  }
  if (c.budgets.max_total_tokens <= 0) {
    r.violations.push_back("budgets.max_total_tokens must be > 0");
  }
  if (c.budgets.max_retries < 0) {
    r.violations.push_back("budgets.max_retries must be >= 0");
  }
  if (c.navigation.max_concurrency < 1) {
    r.violations.push_back("navigation.max_concurrency must be >= 1");
  }
  if (c.navigation.kind == NavigationKind::Sequential &&
      c.navigation.max_concurrency != 1) {
    r.violations.push_back("sequential navigation requires max_concurrency = 1");
  }
  for (const TriggerSpec& t : c.adaptation_triggers) {
    if ((t.kind == TriggerKind::Periodic || t.kind == TriggerKind::CriticLoop) &&
        t.period < 1) {
      r.violations.push_back("trigger period must be >= 1");
    }
  }
  if (c.init.parse_retries < 0) {
    r.violations.push_back("init.parse_retries must be >= 0");
  }
  if (c.init.max_depth < 1 || c.init.max_nodes < 1) {
    r.violations.push_back("flow construction bounds must be >= 1");
  }
  return r;
}

ValidationReport validate_agent_spec(const AgentSystemSpec& spec,
                                     const std::vector<std::string>& registry_tools) {
  ValidationReport r;
  if (spec.roster.empty()) {
    r.violations.push_back("roster must be nonempty");
  }
  std::set<std::string> known(registry_tools.begin(), registry_tools.end());
  for (const auto& [role, tools] : spec.toolset) {
    if (std::find(spec.roster.begin(), spec.roster.end(), role) == spec.roster.end()) {
      r.violations.push_back("toolset role not in roster: " + role);
    }
    for (const std::string& t : tools) {
      if (!known.count(t)) {
        r.violations.push_back("unknown tool '" + t + "' for role " + role);
      }
    }
  }
  if (spec.context_policy.window_k < 0) {
    r.violations.push_back("context window_k must be >= 0");
  }
  return r;
}

}  // namespace planforge
