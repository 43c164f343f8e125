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

#include "planforge/codec.hpp"

#include <fstream>

#include <json.hpp>

namespace planforge {

using json = nlohmann::json;  // std::map-backed: keys serialize sorted

namespace {

json parse_or_throw(const std::string& record) {
  json j = json::parse(record, nullptr, false);
  if (j.is_discarded()) {
    throw SchemaError("record is not valid JSON");
  }
  return j;
}

// Typed field access with first-offending-field error messages.
const json& need(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) {
    throw SchemaError(std::string("missing field \"") + field + "\"");
  }
  return *it;
}

std::string need_string(const json& j, const char* field) {
  const json& v = need(j, field);
  if (!v.is_string()) {
    throw SchemaError(std::string("field \"") + field + "\" must be a string");
  }
  return v.get<std::string>();
}

long need_integer(const json& j, const char* field) {
  const json& v = need(j, field);
  if (!v.is_number_integer()) {
    throw SchemaError(std::string("field \"") + field + "\" must be an integer");
  }
  return v.get<long>();
}

bool need_bool(const json& j, const char* field) {
  const json& v = need(j, field);
  if (!v.is_boolean()) {
    throw SchemaError(std::string("field \"") + field + "\" must be a boolean");
  }
  return v.get<bool>();
}

const json& need_array(const json& j, const char* field) {
  const json& v = need(j, field);
  if (!v.is_array()) {
    throw SchemaError(std::string("field \"") + field + "\" must be an array");
  }
  return v;
}

const json& need_object(const json& j, const char* field) {
  const json& v = need(j, field);
  if (!v.is_object()) {
    throw SchemaError(std::string("field \"") + field + "\" must be an object");
  }
  return v;
}

std::optional<std::string> optional_string(const json& j, const char* field) {
  const json& v = need(j, field);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) {
    throw SchemaError(std::string("field \"") + field +
                      "\" must be a string or null");
  }
  return v.get<std::string>();
}

json node_to_json(const PlanNode& n) {
  json j;
  j["id"] = n.id.value;
  j["title"] = n.title;
  j["instruction"] = n.instruction;
  j["kind"] = to_string(n.kind);
  j["status"] = to_string(n.status);
  j["role"] = n.role ? json(*n.role) : json(nullptr);
  j["result"] = n.result ? json(*n.result) : json(nullptr);
  j["attempts"] = n.attempts;
  j["aux_validated"] = n.aux_validated;
  j["notes"] = n.notes;
  return j;
}

PlanNode node_from_json(const json& j) {
  PlanNode n;
  n.id = NodeId(need_string(j, "id"));
  n.title = need_string(j, "title");
  n.instruction = need_string(j, "instruction");
  n.kind = node_kind_from_string(need_string(j, "kind"));
  n.status = node_status_from_string(need_string(j, "status"));
  n.role = optional_string(j, "role");
  n.result = optional_string(j, "result");
  n.attempts = static_cast<int>(need_integer(j, "attempts"));
  n.aux_validated = need_bool(j, "aux_validated");
  const json& notes = need_array(j, "notes");
  for (const json& note : notes) {
    if (!note.is_string()) throw SchemaError("field \"notes\" must hold strings");
    n.notes.push_back(note.get<std::string>());
  }
  return n;
}

json graph_to_json(const PlanGraph& g) {
  json j;
  j["topology_kind"] = to_string(g.topology_kind);
  j["revision_count"] = g.revision_count;
  json nodes = json::array();
  for (const auto& [id, n] : g.nodes) nodes.push_back(node_to_json(n));
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const PlanEdge& e : g.edges) {
    edges.push_back({{"from", e.from.value}, {"to", e.to.value}, {"rewired", e.rewired}});
  }
  j["edges"] = std::move(edges);
  return j;
}

PlanGraph graph_from_json(const json& j) {
  PlanGraph g;
  g.topology_kind = topology_kind_from_string(need_string(j, "topology_kind"));
  g.revision_count = static_cast<int>(need_integer(j, "revision_count"));
  for (const json& nj : need_array(j, "nodes")) {
    PlanNode n = node_from_json(nj);
    if (g.nodes.count(n.id)) {
      throw SchemaError("duplicate node id \"" + n.id.value + "\"");
    }
    g.nodes.emplace(n.id, std::move(n));
  }
  for (const json& ej : need_array(j, "edges")) {
    PlanEdge e;
    e.from = NodeId(need_string(ej, "from"));
    e.to = NodeId(need_string(ej, "to"));
    e.rewired = need_bool(ej, "rewired");
    g.insert_edge(std::move(e));
  }
  return g;
}

json trigger_to_json(const TriggerSpec& t) {
  json j;
  j["kind"] = to_string(t.kind);
  j["period"] = t.period;
  return j;
}

TriggerSpec trigger_from_json(const json& j) {
  TriggerSpec t;
  t.kind = trigger_kind_from_string(need_string(j, "kind"));
  t.period = static_cast<int>(need_integer(j, "period"));
  return t;
}

json config_to_json(const PlanConfiguration& c) {
  json j;
  j["topology_kind"] = to_string(c.topology_kind);
  j["init"] = {{"strategy", to_string(c.init.strategy)},
               {"parse_retries", c.init.parse_retries},
               {"max_depth", c.init.max_depth},
               {"max_nodes", c.init.max_nodes}};
  json triggers = json::array();
  for (const TriggerSpec& t : c.adaptation_triggers) triggers.push_back(trigger_to_json(t));
  j["adaptation_triggers"] = std::move(triggers);
  j["navigation"] = {{"policy", to_string(c.navigation.kind)},
                     {"max_concurrency", c.navigation.max_concurrency}};
  j["budgets"] = {{"max_steps", c.budgets.max_steps},
                  {"max_total_tokens", c.budgets.max_total_tokens},
                  {"max_retries", c.budgets.max_retries}};
  return j;
}

PlanConfiguration config_from_json(const json& j) {
  PlanConfiguration c;
  c.topology_kind = topology_kind_from_string(need_string(j, "topology_kind"));
  const json& init = need_object(j, "init");
  c.init.strategy = init_strategy_from_string(need_string(init, "strategy"));
  c.init.parse_retries = static_cast<int>(need_integer(init, "parse_retries"));
  c.init.max_depth = static_cast<int>(need_integer(init, "max_depth"));
  c.init.max_nodes = static_cast<int>(need_integer(init, "max_nodes"));
  for (const json& tj : need_array(j, "adaptation_triggers")) {
    c.adaptation_triggers.push_back(trigger_from_json(tj));
  }
  const json& nav = need_object(j, "navigation");
  c.navigation.kind = navigation_kind_from_string(need_string(nav, "policy"));
  c.navigation.max_concurrency = static_cast<int>(need_integer(nav, "max_concurrency"));
  const json& budgets = need_object(j, "budgets");
  c.budgets.max_steps = static_cast<int>(need_integer(budgets, "max_steps"));
  c.budgets.max_total_tokens = need_integer(budgets, "max_total_tokens");
  c.budgets.max_retries = static_cast<int>(need_integer(budgets, "max_retries"));
  return c;
}

json event_to_json(const TrajectoryEvent& e) {
  json j;
  j["step"] = e.step;
  j["kind"] = to_string(e.kind);
  j["tokens_in"] = e.tokens_in;
  j["tokens_out"] = e.tokens_out;
  j["wall_ms"] = e.wall_ms;
  j["cost_class"] = to_string(e.cost_class);
  j["node"] = e.node;
  j["detail"] = e.detail;
  j["anomalous"] = e.anomalous;
  return j;
}

TrajectoryEvent event_from_json(const json& j) {
  TrajectoryEvent e;
  e.step = static_cast<int>(need_integer(j, "step"));
  e.kind = event_kind_from_string(need_string(j, "kind"));
  e.tokens_in = need_integer(j, "tokens_in");
  e.tokens_out = need_integer(j, "tokens_out");
  e.wall_ms = need_integer(j, "wall_ms");
  e.cost_class = cost_class_from_string(need_string(j, "cost_class"));
  e.node = need_string(j, "node");
  e.detail = need_string(j, "detail");
  e.anomalous = need_bool(j, "anomalous");
  return e;
}

json trajectory_to_json(const Trajectory& t) {
  json j;
  j["query"] = t.query;
  json events = json::array();
  for (const TrajectoryEvent& e : t.events) events.push_back(event_to_json(e));
  j["events"] = std::move(events);
  j["final_answer"] = t.final_answer ? json(*t.final_answer) : json(nullptr);
  j["success"] = t.success;
  j["judged"] = t.judged;
  j["aggregates"] = {{"c_total_tokens", t.aggregates.c_total_tokens},
                     {"c_plan_tokens", t.aggregates.c_plan_tokens},
                     {"c_exec_tokens", t.aggregates.c_exec_tokens},
                     {"n_fail", t.aggregates.n_fail},
                     {"n_revisions", t.aggregates.n_revisions},
                     {"n_retries", t.aggregates.n_retries},
                     {"n_steps", t.aggregates.n_steps}};
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  t.query = need_string(j, "query");
  for (const json& ej : need_array(j, "events")) {
    t.events.push_back(event_from_json(ej));
  }
  t.final_answer = optional_string(j, "final_answer");
  t.success = need_bool(j, "success");
  t.judged = need_bool(j, "judged");
  const json& a = need_object(j, "aggregates");
  t.aggregates.c_total_tokens = need_integer(a, "c_total_tokens");
  t.aggregates.c_plan_tokens = need_integer(a, "c_plan_tokens");
  t.aggregates.c_exec_tokens = need_integer(a, "c_exec_tokens");
  t.aggregates.n_fail = static_cast<int>(need_integer(a, "n_fail"));
  t.aggregates.n_revisions = static_cast<int>(need_integer(a, "n_revisions"));
  t.aggregates.n_retries = static_cast<int>(need_integer(a, "n_retries"));
  t.aggregates.n_steps = static_cast<int>(need_integer(a, "n_steps"));
  return t;
}

json agent_spec_to_json(const AgentSystemSpec& s) {
  json j;
  j["roster"] = s.roster;
  json tools = json::object();
  for (const auto& [role, list] : s.toolset) tools[role] = list;
  j["toolset"] = std::move(tools);
  j["context_policy"] = {{"window_k", s.context_policy.window_k},
                         {"include_summaries", s.context_policy.include_summaries}};
  j["active_selector"] = s.active_selector;
  return j;
}

AgentSystemSpec agent_spec_from_json(const json& j) {
  AgentSystemSpec s;
  for (const json& r : need_array(j, "roster")) {
    if (!r.is_string()) throw SchemaError("field \"roster\" must hold strings");
    s.roster.push_back(r.get<std::string>());
  }
  const json& tools = need_object(j, "toolset");
  for (auto it = tools.begin(); it != tools.end(); ++it) {
    if (!it.value().is_array()) {
      throw SchemaError("field \"toolset\" entries must be arrays");
    }
    std::vector<std::string> list;
    for (const json& t : it.value()) {
      if (!t.is_string()) throw SchemaError("field \"toolset\" must hold strings");
      list.push_back(t.get<std::string>());
    }
    s.toolset[it.key()] = std::move(list);
  }
  const json& cp = need_object(j, "context_policy");
  s.context_policy.window_k = static_cast<int>(need_integer(cp, "window_k"));
  s.context_policy.include_summaries = need_bool(cp, "include_summaries");
  s.active_selector = need_string(j, "active_selector");
  return s;
}

}  // namespace

std::string encode(const PlanGraph& g) { return graph_to_json(g).dump(); }
std::string encode(const PlanConfiguration& c) { return config_to_json(c).dump(); }
std::string encode(const Trajectory& t) { return trajectory_to_json(t).dump(); }
std::string encode(const AgentSystemSpec& s) { return agent_spec_to_json(s).dump(); }

PlanGraph decode_graph(const std::string& record) {
  return graph_from_json(parse_or_throw(record));
}

PlanConfiguration decode_configuration(const std::string& record) {
  return config_from_json(parse_or_throw(record));
}

Trajectory decode_trajectory(const std::string& record) {
  return trajectory_from_json(parse_or_throw(record));
}

AgentSystemSpec decode_agent_spec(const std::string& record) {
  return agent_spec_from_json(parse_or_throw(record));
}

std::vector<std::string> read_record_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void write_record_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  for (const std::string& l : lines) {
    out << l << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace planforge
