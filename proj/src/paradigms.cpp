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

#include "planforge/paradigms.hpp"

#include <sstream>

#include <json.hpp>

#include "planforge/markup.hpp"
#include "planforge/topology.hpp"
#include "planforge/validate.hpp"

namespace planforge {

namespace {

PlanConfiguration make_config(TopologyKind topo, InitStrategy init,
                              std::vector<TriggerSpec> triggers,
                              NavigationKind nav, int concurrency) {
  PlanConfiguration c;
  c.topology_kind = topo;
  c.init.strategy = init;
  c.adaptation_triggers = std::move(triggers);
  c.navigation.kind = nav;
  c.navigation.max_concurrency = concurrency;
  return c;
}

std::vector<ParadigmEntry> build_registry() {
  std::vector<ParadigmEntry> r;
  r.push_back({"OWL",
               make_config(TopologyKind::Linear, InitStrategy::PlannerDecompose,
                           {{TriggerKind::OnFailureSignal, 1}},
                           NavigationKind::DynamicDispatch, 1),
               "Ordered task list executed front to back; worker failures "
               "trigger a re-planning pass that must address the failed item."});
  r.push_back({"OAgents",
               make_config(TopologyKind::ModularGraph, InitStrategy::SopConfiguration,
                           {{TriggerKind::CriticLoop, 3}},
                           NavigationKind::Sequential, 1),
               "Procedure graph with prerequisite edges and a closing report "
               "step, executed one node at a time; a critic reviews progress "
               "every 3 steps."});
  r.push_back({"AgentOrchestra",
               make_config(TopologyKind::Hierarchy, InitStrategy::RoleDefinition,
                           {{TriggerKind::EnvFeedback, 1}},
                           NavigationKind::CentralizedRouting, 2),
               "Orchestrator root above role-tagged subtasks; a router maps "
               "each directive to a roster role; anomalous observations "
               "trigger re-planning."});
  r.push_back({"Flash-Searcher",
               make_config(TopologyKind::Dag, InitStrategy::DependencyParsing,
                           {{TriggerKind::Periodic, 4}},
                           NavigationKind::ConcurrentPaths, 4),
               "Dependency-parsed parallel DAG; satisfied or speculatively "
               "validated nodes dispatch concurrently; finished work is "
               "pruned every 4 steps."});
  r.push_back({"JoyAgent",
               make_config(TopologyKind::Hierarchy, InitStrategy::HybridPlanning,
                           {{TriggerKind::Never, 1}},
                           NavigationKind::JointDeliberation, 2),
               "Supervisor chain whose nodes carry their own retry loop; "
               "terminal answers are settled by consensus vote over sink "
               "results."});
  r.push_back({"FlowSearch",
               make_config(TopologyKind::ThoughtGraph, InitStrategy::FlowConstruction,
                           {{TriggerKind::Periodic, 3}},
                           NavigationKind::GraphTraversal, 2),
               "Iteratively grown thought graph rooted at a synthesis node; "
               "dispatch favors the most execution-ready nodes; the plan is "
               "re-examined every 3 steps."});
  r.push_back({"Co-Sight",
               make_config(TopologyKind::CrossCheckNet, InitStrategy::InconsistencyTrigger,
                           {{TriggerKind::Inconsistency, 1}},
                           NavigationKind::ConflictResolution, 2),
               "Two redundant verification probes feeding one resolution "
               "node; disagreement between probes drives meta-verification "
               "and conflict resolution."});
  return r;
}

}  // namespace

const std::vector<ParadigmEntry>& paradigm_registry() {
  static const std::vector<ParadigmEntry> registry = build_registry();
  return registry;
}

const ParadigmEntry& registry_lookup(const std::string& name) {
  for (const ParadigmEntry& e : paradigm_registry()) {
    if (e.name == name) return e;
  }
  throw ConfigError("unknown paradigm: " + name);
}

std::string registry_dump_json() {
  nlohmann::json out = nlohmann::json::array();
  for (const ParadigmEntry& e : paradigm_registry()) {
    nlohmann::json row;
    row["name"] = e.name;
    row["topology"] = to_string(e.config.topology_kind);
    row["initialization"] = to_string(e.config.init.strategy);
    nlohmann::json triggers = nlohmann::json::array();
    for (const TriggerSpec& t : e.config.adaptation_triggers) {
      nlohmann::json tj;
      tj["kind"] = to_string(t.kind);
      tj["period"] = t.period;
      triggers.push_back(tj);
    }
    row["adaptation"] = triggers;
    row["navigation"] = to_string(e.config.navigation.kind);
    row["max_concurrency"] = e.config.navigation.max_concurrency;
    row["description"] = e.description;
    out.push_back(row);
  }
  return out.dump(2);
}

namespace {

const char* kMarkupGrammar =
    "Plan blocks:\n"
    "```plan\n"
    "node <id> | <task|verification|aggregation|resolution> | <title> | <instruction> [| role=<role>]\n"
    "edge <from> -> <to>\n"
    "```\n"
    "Revision blocks:\n"
    "```ops\n"
    "add_node <id> | <kind> | <title> | <instruction> [| role=<role>]\n"
    "remove_node <id> / add_edge a -> b / remove_edge a -> b\n"
    "modify_node <id> | <field>=<value>\n"
    "```\n"
    "Instructions call scripted tools: lookup(<relation>, <entity>), "
    "calc(<expr>), join(<refs...>), note(<text>), answer(<query>), "
    "resolve(). ${<node id>} interpolates that node's result.\n";

}  // namespace

std::string meta_tool_docs() {
  std::ostringstream os;
  os << "Available planning paradigms and their wiring:\n";
  for (const ParadigmEntry& e : paradigm_registry()) {
    os << "- " << e.name << ": topology=" << to_string(e.config.topology_kind)
       << ", init=" << to_string(e.config.init.strategy) << ", navigation="
       << to_string(e.config.navigation.kind) << " (max_concurrency="
       << e.config.navigation.max_concurrency << "). " << e.description << "\n";
  }
  os << "\n" << kMarkupGrammar;
  os << "\nConfiguration blocks:\n"
        "```config\n"
        "topology = <kind>\n"
        "init = <strategy>\n"
        "triggers = <kind>[(<period>)], ...\n"
        "navigation = <policy>(<max_concurrency>)\n"
        "budgets = steps=<n>, tokens=<n>, retries=<n>\n"
        "```\n";
  return os.str();
}

std::string init_prompt(InitStrategy strategy) {
  std::string base;
  switch (strategy) {
    case InitStrategy::PlannerDecompose:
      base =
          "Decompose the query into an ordered task list and emit it as one "
          "fenced plan block forming a single chain. [shape=chain]";
      break;
    case InitStrategy::SopConfiguration:
      base =
          "Write the standard operating procedure for the query: subtask "
          "nodes with prerequisite edges, ending in a report step. One "
          "fenced plan block. [shape=sop]";
      break;
    case InitStrategy::RoleDefinition:
      base =
          "Decompose the query into role-tagged subtasks (role=searcher / "
          "calculator / aggregator per node). One fenced plan block; keep "
          "in-degree at most one. [shape=roles]";
      break;
    case InitStrategy::DependencyParsing:
      base =
          "Parse the query's dependency structure and emit the full task "
          "graph in one fenced plan block; independent subtasks must not "
          "share edges. [shape=dag]";
      break;
    case InitStrategy::HybridPlanning:
      base =
          "Build a supervisor chain over the query's subtasks; each chain "
          "node is self-contained and retryable. One fenced plan block. "
          "[shape=chain]";
      break;
    case InitStrategy::FlowConstruction:
      base =
          "Grow the thought graph stepwise. Given the current graph, either "
          "emit one fenced ops block that adds prerequisite nodes/edges "
          "beneath the synthesis root, or reply 'done'. [shape=flow]";
      break;
    case InitStrategy::InconsistencyTrigger:
      base = "Fixed redundant-verification net; no planner output required.";
      break;
  }
  return base + "\n\n" + kMarkupGrammar;
}

namespace {

PlanGraph graph_from_parsed(const ParsedPlan& parsed, TopologyKind kind) {
  PlanGraph g;
  g.topology_kind = kind;
  for (const PlanNode& n : parsed.nodes) {
    PlanNode node = n;
    node.status = NodeStatus::Pending;
    node.attempts = 0;
    if (g.nodes.count(node.id)) {
      throw ParseError("duplicate node id '" + node.id.value + "'");
    }
    g.nodes.emplace(node.id, std::move(node));
  }
  for (const PlanEdge& e : parsed.edges) {
    g.insert_edge(e);
  }
  ValidationReport report = validate_graph(g);
  if (!report.ok()) {
    throw ValidationError(report.joined());
  }
  return g;
}

/// Root orchestrator placed above every entry node of the parsed plan.
PlanGraph add_orchestrator_root(PlanGraph g) {
  PlanNode root;
  root.id = NodeId("n00");
  root.kind = NodeKind::Task;
  root.title = "orchestrate";
  root.instruction = "note(distribute subtasks to specialist roles)";
  root.role = "orchestrator";
  if (g.nodes.count(root.id)) {
    throw ParseError("node id n00 is reserved for the orchestrator root");
  }
  std::vector<NodeId> heads;
  for (const auto& [id, n] : g.nodes) {
    if (g.predecessors(id).empty()) heads.push_back(id);
  }
  g.nodes.emplace(root.id, root);
  for (const NodeId& h : heads) {
    g.insert_edge(PlanEdge{root.id, h, false});
  }
  return g;
}

PlanGraph cross_check_net(const std::string& query) {
  PlanGraph g;
  g.topology_kind = TopologyKind::CrossCheckNet;
  auto probe = [&](const char* id) {
    PlanNode v;
    v.id = NodeId(id);
    v.kind = NodeKind::Verification;
    v.title = "verify answer";
    v.instruction = "answer(" + query + ")";
    return v;
  };
  PlanNode v1 = probe("v1");
  PlanNode v2 = probe("v2");
  PlanNode res;
  res.id = NodeId("r1");
  res.kind = NodeKind::Resolution;
  res.title = "resolve candidates";
  res.instruction = "resolve()";
  g.nodes.emplace(v1.id, v1);
  g.nodes.emplace(v2.id, v2);
  g.nodes.emplace(res.id, res);
  g.insert_edge(PlanEdge{v1.id, res.id, false});
  g.insert_edge(PlanEdge{v2.id, res.id, false});
  return g;
}

}  // namespace

InitOutcome initialize_plan(const std::string& query,
                            const PlanConfiguration& config, Planner& planner,
                            std::uint64_t seed) {
  (void)seed;  // scripted planners carry their own seed; kept for the contract
  TrajectoryEvent ev;
  ev.step = 0;
  ev.kind = EventKind::PlanInit;
  ev.cost_class = CostClass::Plan;
  ev.detail = to_string(config.init.strategy);

  const InitStrategy strategy = config.init.strategy;

  if (strategy == InitStrategy::InconsistencyTrigger) {
    return {cross_check_net(query), ev};
  }

  const std::string prompt = init_prompt(strategy);

  if (strategy == InitStrategy::FlowConstruction) {
    PlanGraph g;
    g.topology_kind = config.topology_kind;
    PlanNode root;
    root.id = NodeId("root");
    root.kind = NodeKind::Aggregation;
    root.title = "synthesize answer";
    root.instruction = "join()";
    g.nodes.emplace(root.id, root);

    for (int round = 0; round < config.init.max_depth; ++round) {
      std::ostringstream ctx;
      ctx << "Query: " << query << "\n";
      ctx << "round: " << round << "\n";
      ctx << "graph:\n" << summarize_graph(g);
      PlannerReply reply = planner.complete(prompt, ctx.str());
      ev.tokens_in += reply.tokens_in;
      ev.tokens_out += reply.tokens_out;
      if (reply.text.find("done") != std::string::npos &&
          !has_fenced_block(reply.text, "ops")) {
        break;
      }
      std::vector<AtomicOp> ops;
      try {
        ops = parse_ops_markup(reply.text);
      } catch (const ParseError&) {
        break;  // unusable expansion ends construction
      }
      int additions = 0;
      for (const AtomicOp& op : ops) {
        if (std::holds_alternative<AddNode>(op)) ++additions;
      }
      if (static_cast<int>(g.nodes.size()) + additions > config.init.max_nodes) {
        break;  // width bound reached
      }
      try {
        PlanGraph next = apply_atomic_ops(g, ops);
        next.revision_count = g.revision_count;  // construction, not revision
        g = std::move(next);
      } catch (const RevisionError&) {
        break;
      }
      if (ops.empty()) break;  // fixpoint
    }
    ValidationReport report = validate_graph(g);
    if (!report.ok()) {
      throw InitializationError("flow construction produced invalid graph: " +
                                report.joined());
    }
    g.revision_count = 0;
    return {g, ev};
  }

  // Single-call strategies: one plan block, retried on malformed output.
  std::string correction;
  std::string last_error;
  for (int attempt = 0; attempt <= config.init.parse_retries; ++attempt) {
    std::ostringstream ctx;
    ctx << "Query: " << query << "\n";
    if (!correction.empty()) ctx << correction;
    PlannerReply reply = planner.complete(prompt, ctx.str());
    ev.tokens_in += reply.tokens_in;
    ev.tokens_out += reply.tokens_out;
    try {
      ParsedPlan parsed = parse_plan_markup(reply.text);
      PlanGraph g = graph_from_parsed(parsed, config.topology_kind);
      if (strategy == InitStrategy::RoleDefinition) {
        g = add_orchestrator_root(std::move(g));
        ValidationReport report = validate_graph(g);
        if (!report.ok()) throw ValidationError(report.joined());
      }
      g.revision_count = 0;
      return {g, ev};
    } catch (const BackendError&) {
      throw;  // transport trouble is not a parse problem
    } catch (const Error& e) {
      last_error = e.what();
      correction = "Correction: previous output was rejected (" + last_error +
                   "). Respond with exactly one fenced plan block.\n";
    }
  }
  throw InitializationError("plan initialization failed after " +
                            std::to_string(config.init.parse_retries + 1) +
                            " attempts: " + last_error);
}

}  // namespace planforge
