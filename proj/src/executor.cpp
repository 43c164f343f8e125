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

#include "planforge/executor.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <sstream>

#include "planforge/navigation.hpp"
#include "planforge/topology.hpp"

namespace planforge {

namespace {

constexpr std::size_t kDetailCap = 200;

std::string clip(const std::string& s) {
  if (s.size() <= kDetailCap) return s;
  return s.substr(0, kDetailCap) + "...";
}

std::pair<std::string, std::string> split_tool_call(const std::string& instruction) {
  std::size_t open = instruction.find('(');
  std::size_t close = instruction.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    return {"", ""};
  }
  std::string name = instruction.substr(0, open);
  std::size_t b = name.find_first_not_of(" \t");
  std::size_t e = name.find_last_not_of(" \t");
  name = (b == std::string::npos) ? "" : name.substr(b, e - b + 1);
  return {name, instruction.substr(open + 1, close - open - 1)};
}

bool role_may_use(const AgentSystemSpec& spec, const std::string& role,
                  const std::string& tool) {
  auto it = spec.toolset.find(role);
  if (it == spec.toolset.end()) return true;  // no entry: unrestricted
  return std::find(it->second.begin(), it->second.end(), tool) != it->second.end();
}

}  // namespace

DirectiveOutcome ScriptedBackend::execute(const Directive& directive,
                                          const std::string& context,
                                          const ToolContext& tools) {
  DirectiveOutcome out;
  out.tokens_in = synthetic_tokens(context + directive.instruction);

  std::optional<std::string> scheduled =
      world_.forced_failure(directive.issued_at_step, directive.node);
  if (scheduled && *scheduled == "fail") {
    out.ok = false;
    out.output = "forced failure (scheduled)";
    out.tokens_out = synthetic_tokens(out.output);
    return out;
  }

  auto [name, arg] = split_tool_call(directive.instruction);
  if (name.empty()) {
    out.ok = false;
    out.output = "cannot parse instruction as a tool call: " +
                 clip(directive.instruction);
    out.tokens_out = synthetic_tokens(out.output);
    return out;
  }
  if (!role_may_use(spec_, directive.role, name)) {
    out.ok = false;
    out.output = "tool '" + name + "' not permitted for role '" + directive.role + "'";
    out.tokens_out = synthetic_tokens(out.output);
    return out;
  }
  ToolOutcome result = world_.run_tool(name, arg, tools);
  out.ok = result.ok;
  out.output = result.output;
  if (scheduled && *scheduled == "anomaly") out.anomalous = true;
  if (scheduled && *scheduled == "corrupt" && out.ok) {
    out.output = "[corrupted] " + out.output;
  }
  out.tokens_out = synthetic_tokens(out.output);
  return out;
}

DirectiveOutcome LlmBackend::execute(const Directive& directive,
                                     const std::string& context,
                                     const ToolContext& tools) {
  auto started = std::chrono::steady_clock::now();
  DirectiveOutcome out;

  ChatRequest req;
  req.model = options_.model;
  req.temperature = options_.temperature;
  req.max_tokens = options_.max_tokens;
  req.messages.push_back(
      {"system",
       "You are the agent acting as role '" + directive.role + "'.\n" +
           tool_docs() +
           "Reply with exactly one line per turn: either\n"
           "TOOL: <name>(<args>)\n"
           "or\n"
           "FINAL: <answer for this node>"});
  req.messages.push_back(
      {"user", context + "\nInstruction: " + directive.instruction});

  for (int turn = 0; turn < options_.turn_cap; ++turn) {
    ChatResponse resp = client_.complete(req);
    out.tokens_in += resp.tokens_in;
    out.tokens_out += resp.tokens_out;
    std::string content = resp.content;
    std::size_t fin = content.find("FINAL:");
    if (fin != std::string::npos) {
      std::string answer = content.substr(fin + 6);
      std::size_t b = answer.find_first_not_of(" \t\r\n");
      std::size_t e = answer.find_last_not_of(" \t\r\n");
      out.output = (b == std::string::npos) ? "" : answer.substr(b, e - b + 1);
      out.ok = true;
      break;
    }
    std::size_t tool = content.find("TOOL:");
    if (tool == std::string::npos) {
      out.ok = false;
      out.output = "agent reply had neither TOOL: nor FINAL:";
      break;
    }
    auto [name, arg] = split_tool_call(content.substr(tool + 5));
    ToolOutcome t = name.empty()
                        ? ToolOutcome{false, "unparseable tool call"}
                        : world_.run_tool(name, arg, tools);
    req.messages.push_back({"assistant", content});
    req.messages.push_back(
        {"user", std::string("OBSERVATION: ") + (t.ok ? t.output : "ERROR: " + t.output)});
    if (turn == options_.turn_cap - 1) {
      out.ok = false;
      out.output = "per-node turn cap exceeded";
    }
  }
  out.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started)
                    .count();
  return out;
}

PlannerReply LlmPlanner::complete(const std::string& system_prompt,
                                  const std::string& context) {
  ChatRequest req;
  req.model = model_;
  req.temperature = temperature_;
  req.messages.push_back({"system", system_prompt});
  req.messages.push_back({"user", context});
  ChatResponse resp = client_.complete(req);
  return {resp.content, resp.tokens_in, resp.tokens_out};
}

std::string aggregate_context(const Trajectory& trajectory, const PlanGraph& graph,
                              const ContextPolicy& policy) {
  std::ostringstream os;
  os << "Query: " << trajectory.query << "\n";
  if (policy.include_summaries) {
    bool any = false;
    for (const auto& [id, n] : graph.nodes) {
      if (n.status != NodeStatus::Succeeded || !n.result) continue;
      if (!any) {
        os << "completed:\n";
        any = true;
      }
      os << "  [" << id.value << "] " << n.title << " => " << clip(*n.result) << "\n";
    }
  }
  if (policy.window_k > 0 && !trajectory.events.empty()) {
    os << "recent events:\n";
    std::size_t window = static_cast<std::size_t>(policy.window_k);
    std::size_t from =
        trajectory.events.size() > window ? trajectory.events.size() - window : 0;
    for (std::size_t i = from; i < trajectory.events.size(); ++i) {
      const TrajectoryEvent& e = trajectory.events[i];
      os << "  step " << e.step << " " << to_string(e.kind);
      if (!e.node.empty()) os << " " << e.node;
      if (!e.detail.empty()) os << " " << clip(e.detail);
      os << "\n";
    }
  }
  return os.str();
}

std::string substitute_refs(const std::string& instruction, const PlanGraph& graph) {
  std::string out;
  std::size_t pos = 0;
  while (pos < instruction.size()) {
    std::size_t open = instruction.find("${", pos);
    if (open == std::string::npos) {
      out += instruction.substr(pos);
      break;
    }
    std::size_t close = instruction.find('}', open + 2);
    if (close == std::string::npos) {
      out += instruction.substr(pos);
      break;
    }
    out += instruction.substr(pos, open - pos);
    NodeId id(instruction.substr(open + 2, close - open - 2));
    if (const PlanNode* n = graph.find_node(id); n && n->result) {
      out += *n->result;
    }
    pos = close + 1;
  }
  return out;
}

DirectiveOutcome execute_directive(const Directive& directive,
                                   const std::string& context,
                                   const ToolContext& tools, ExecBackend& backend) {
  return backend.execute(directive, context, tools);
}

JudgeVerdict run_judge(const std::string& query, const std::string& answer,
                       const std::string& gold, JudgeMode mode, ChatClient* client) {
  if (mode == JudgeMode::ExactNormalized) {
    return judge_exact(answer, gold);
  }
  if (!client) {
    throw ConfigError("llm judge requested without a judge client");
  }
  return judge_llm(query, answer, gold, *client);
}

// ---------------------------------------------------------------------------
// Episode engine
// ---------------------------------------------------------------------------

namespace {

struct PreparedDirective {
  Directive directive;
  std::string context;
  ToolContext tools;
};

ToolContext tool_context_for(const PlanGraph& g, const NodeId& id) {
  ToolContext ctx;
  for (const NodeId& p : g.predecessors(id)) {
    const PlanNode& pred = g.node(p);
    if (pred.status == NodeStatus::Succeeded && pred.result) {
      ctx.predecessor_results.emplace_back(p, *pred.result);
    }
  }
  return ctx;
}

/// Failed nodes still inside their retry budget, ascending id order.
std::vector<NodeId> retryable_failed(const PlanGraph& g, int max_retries) {
  std::vector<NodeId> out;
  for (const auto& [id, n] : g.nodes) {
    if (n.status == NodeStatus::Failed && n.attempts <= max_retries) {
      out.push_back(id);
    }
  }
  return out;
}

bool any_pending(const PlanGraph& g) {
  for (const auto& [id, n] : g.nodes) {
    if (n.status == NodeStatus::Pending) return true;
  }
  return false;
}

void push_event(Trajectory& t, TrajectoryEvent e) {
  t.events.push_back(std::move(e));
}

TrajectoryEvent make_event(int step, EventKind kind, CostClass cc,
                           const std::string& node, const std::string& detail) {
  TrajectoryEvent e;
  e.step = step;
  e.kind = kind;
  e.cost_class = cc;
  e.node = node;
  e.detail = clip(detail);
  return e;
}

/// Succeeded sinks with recorded results, ascending id order.
std::vector<std::pair<NodeId, std::string>> succeeded_sinks(const PlanGraph& g) {
  std::vector<std::pair<NodeId, std::string>> out;
  for (const NodeId& id : g.sinks()) {
    const PlanNode& n = g.node(id);
    if (n.status == NodeStatus::Succeeded && n.result) {
      out.emplace_back(id, *n.result);
    }
  }
  return out;
}

/// Terminal-answer synthesis per navigation policy. May append a synthetic
/// aggregation node holding the combined answer.
std::optional<std::string> synthesize_answer(PlanGraph& g,
                                             const NavigationPolicy& policy) {
  if (policy.kind == NavigationKind::ConflictResolution) {
    // The latest resolution verdict wins.
    std::optional<std::string> answer;
    for (const auto& [id, n] : g.nodes) {
      if (n.kind == NodeKind::Resolution && n.status == NodeStatus::Succeeded &&
          n.result) {
        answer = *n.result;  // map order: the greatest id is kept last
      }
    }
    if (answer) return answer;
  }
  std::vector<std::pair<NodeId, std::string>> sinks = succeeded_sinks(g);
  if (sinks.empty()) return std::nullopt;
  if (policy.kind == NavigationKind::JointDeliberation) {
    VoteBallot ballot;
    ballot.candidates = sinks;
    return vote(ballot);
  }
  if (sinks.size() == 1) return sinks[0].second;

  // Multiple sinks: concatenate in id order through one aggregation node.
  std::string combined;
  for (std::size_t i = 0; i < sinks.size(); ++i) {
    if (i) combined += "; ";
    combined += sinks[i].second;
  }
  PlanNode agg;
  agg.id = NodeId("zz_final");
  agg.kind = NodeKind::Aggregation;
  agg.title = "synthesized answer";
  agg.instruction = "join()";
  agg.status = NodeStatus::Succeeded;
  agg.result = combined;
  if (!g.has_node(agg.id)) {
    g.nodes.emplace(agg.id, std::move(agg));
  }
  return combined;
}

}  // namespace

EpisodeResult run_episode(const std::string& query,
                          const std::optional<std::string>& gold,
                          const PlanConfiguration& config,
                          const AgentSystemSpec& agent_spec,
                          const BackendBundle& backend, std::uint64_t seed,
                          const EngineParams& params) {
  if (!backend.planner || !backend.exec) {
    throw ConfigError("episode needs a planner and an execution backend");
  }
  Trajectory t;
  t.query = query;

  InitOutcome init = initialize_plan(query, config, *backend.planner, seed);
  PlanGraph graph = std::move(init.graph);
  push_event(t, init.event);
  t.aggregates = recompute_aggregates(t);

  const Budgets& budgets = config.budgets;
  int next_step = 1;
  std::string final_reason = "completed";

  while (true) {
    std::vector<NodeId> retries = retryable_failed(graph, budgets.max_retries);
    if (!any_pending(graph) && retries.empty()) break;

    if (t.aggregates.n_steps >= budgets.max_steps) {
      final_reason = "budget";
      break;
    }
    long remaining = budgets.max_total_tokens - t.aggregates.c_total_tokens;
    if (remaining <= 0) {
      final_reason = "budget";
      break;
    }

    // Cap the batch so a near-exhausted token budget can overshoot by at
    // most one call's worth.
    int cap = config.navigation.max_concurrency;
    long budget_cap = std::max(1L, remaining / std::max(1L, params.max_tokens_per_call));
    cap = static_cast<int>(std::min<long>(cap, budget_cap));

    // Failed-node retries take priority, then policy picks from the ready set.
    std::vector<Directive> batch;
    for (const NodeId& id : retries) {
      if (static_cast<int>(batch.size()) >= cap) break;
      const PlanNode& n = graph.node(id);
      Directive d;
      d.node = id;
      d.instruction = n.instruction;
      d.role = assign_role(n, agent_spec.roster);
      batch.push_back(std::move(d));
    }
    if (static_cast<int>(batch.size()) < cap) {
      std::vector<Directive> nav =
          next_directives(graph, config.navigation, agent_spec.roster, 0);
      for (Directive& d : nav) {
        if (static_cast<int>(batch.size()) >= cap) break;
        batch.push_back(std::move(d));
      }
    }
    if (batch.empty()) {
      // Pending nodes remain but nothing is dispatchable: dependencies are
      // permanently failed or gated.
      final_reason = "stalled";
      break;
    }
    // Policies choose membership; step numbering inside a batch follows
    // node-id order so the log merge stays monotone.
    std::sort(batch.begin(), batch.end(),
              [](const Directive& a, const Directive& b) { return a.node < b.node; });

    // Dispatch: stamp step numbers, mark nodes, snapshot contexts. Contexts
    // are taken before any member of the batch executes so concurrent and
    // sequential execution observe identical state; the per-directive events
    // are appended as one dispatch/call/observation group at merge time.
    std::vector<PreparedDirective> prepared;
    prepared.reserve(batch.size());
    for (Directive& d : batch) {
      d.issued_at_step = next_step++;
      transition(graph.node(d.node), NodeStatus::Dispatched);
    }
    for (Directive& d : batch) {
      PreparedDirective p;
      p.context = aggregate_context(t, graph, agent_spec.context_policy);
      p.tools = tool_context_for(graph, d.node);
      p.directive = std::move(d);
      p.directive.instruction = substitute_refs(p.directive.instruction, graph);
      prepared.push_back(std::move(p));
    }

    // Execute the batch, then merge completions in node-id order.
    std::vector<DirectiveOutcome> outcomes(prepared.size());
    auto run_one = [&](std::size_t i) -> DirectiveOutcome {
      try {
        return execute_directive(prepared[i].directive, prepared[i].context,
                                 prepared[i].tools, *backend.exec);
      } catch (const BackendError& e) {
        DirectiveOutcome out;
        out.ok = false;
        out.output = std::string("backend failure: ") + e.what();
        return out;
      }
    };
    if (params.concurrent && prepared.size() > 1) {
      std::vector<std::future<DirectiveOutcome>> futures;
      futures.reserve(prepared.size());
      for (std::size_t i = 0; i < prepared.size(); ++i) {
        futures.push_back(std::async(std::launch::async, run_one, i));
      }
      for (std::size_t i = 0; i < prepared.size(); ++i) {
        outcomes[i] = futures[i].get();
      }
    } else {
      for (std::size_t i = 0; i < prepared.size(); ++i) {
        outcomes[i] = run_one(i);
      }
    }

    std::vector<std::size_t> order(prepared.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return prepared[a].directive.node < prepared[b].directive.node;
    });
    for (std::size_t i : order) {
      const Directive& d = prepared[i].directive;
      const DirectiveOutcome& out = outcomes[i];
      push_event(t, make_event(d.issued_at_step, EventKind::Dispatch, CostClass::Plan,
                               d.node.value, "role=" + d.role));
      TrajectoryEvent call = make_event(d.issued_at_step, EventKind::ToolCall,
                                        CostClass::Exec, d.node.value,
                                        d.instruction);
      call.tokens_in = out.tokens_in;
      call.tokens_out = out.tokens_out;
      call.wall_ms = out.wall_ms;
      push_event(t, std::move(call));
      TrajectoryEvent obs = make_event(d.issued_at_step, EventKind::Observation,
                                       CostClass::Exec, d.node.value, out.output);
      obs.anomalous = out.anomalous;
      push_event(t, std::move(obs));
      PlanNode& node = graph.node(d.node);
      if (out.ok) {
        transition(node, NodeStatus::Succeeded);
        node.result = out.output;
      } else {
        transition(node, NodeStatus::Failed);
        push_event(t, make_event(d.issued_at_step, EventKind::FailureSignal,
                                 CostClass::Exec, d.node.value, out.output));
      }
    }
    t.aggregates = recompute_aggregates(t);

    // Serialization point: adaptation runs only between batches.
    AdaptDecision decision =
        should_adapt(t, graph, config.adaptation_triggers, backend.critic);
    if (!decision.fired) continue;

    const int at_step = next_step - 1;
    if (decision.reason == TriggerKind::Inconsistency &&
        graph.topology_kind == TopologyKind::CrossCheckNet) {
      MetaVerifyResult mv = meta_verify(graph);
      if (mv.decision.fired && !mv.ops.empty()) {
        try {
          graph = apply_atomic_ops(graph, mv.ops);
          push_event(t, make_event(at_step, EventKind::Revision, CostClass::Plan,
                                   mv.decision.node,
                                   "meta_verify: " + mv.decision.evidence));
        } catch (const RevisionError& e) {
          push_event(t, make_event(at_step, EventKind::FailureSignal,
                                   CostClass::Plan, "",
                                   std::string("revision rejected: ") + e.what()));
        }
        t.aggregates = recompute_aggregates(t);
      }
      continue;
    }
    if (decision.reason == TriggerKind::Periodic &&
        graph.topology_kind == TopologyKind::Dag) {
      // Maintenance pruning; not a revision batch.
      int period = 1;
      for (const TriggerSpec& trig : config.adaptation_triggers) {
        if (trig.kind == TriggerKind::Periodic) period = trig.period;
      }
      if (auto pruned = prune_trigger(graph, t, period)) {
        graph = std::move(*pruned);
      }
      continue;
    }

    // Planner-proposed revision; degrades to a no-op on repeated rejection.
    long tin = 0, tout = 0;
    bool applied = false;
    std::string last_error;
    for (int attempt = 0; attempt <= config.init.parse_retries && !applied; ++attempt) {
      std::vector<AtomicOp> ops;
      try {
        ops = propose_revision(graph, t, *backend.planner, decision,
                               config.init.parse_retries, tin, tout);
      } catch (const ParseError& e) {
        last_error = e.what();
        break;
      }
      try {
        graph = apply_atomic_ops(graph, ops);
        TrajectoryEvent rev = make_event(
            at_step, EventKind::Revision, CostClass::Plan, decision.node,
            std::string(to_string(decision.reason)) + ": " +
                std::to_string(ops.size()) + " ops");
        rev.tokens_in = tin;
        rev.tokens_out = tout;
        push_event(t, std::move(rev));
        applied = true;
      } catch (const RevisionError& e) {
        last_error = e.what();
      }
    }
    if (!applied) {
      TrajectoryEvent fail =
          make_event(at_step, EventKind::FailureSignal, CostClass::Plan, "",
                     "revision rejected: " + last_error);
      fail.tokens_in = tin;
      fail.tokens_out = tout;
      push_event(t, std::move(fail));
    }
    t.aggregates = recompute_aggregates(t);
  }

  const int last_step = next_step - 1;
  if (final_reason == "completed") {
    t.final_answer = synthesize_answer(graph, config.navigation);
    if (gold) {
      try {
        JudgeVerdict verdict = run_judge(query, t.final_answer.value_or(""), *gold,
                                         params.judge_mode, backend.judge_client);
        TrajectoryEvent je = make_event(last_step, EventKind::Judge, CostClass::Plan,
                                        "", verdict.rationale);
        je.tokens_in = verdict.tokens_in;
        je.tokens_out = verdict.tokens_out;
        push_event(t, std::move(je));
        t.success = verdict.success;
      } catch (const BackendError& e) {
        push_event(t, make_event(last_step, EventKind::Judge, CostClass::Plan, "",
                                 std::string("judge error: ") + e.what()));
        t.success = false;
        final_reason = "judge_error";
      }
      t.judged = true;
    }
  } else {
    // Budget and stall outcomes are failures by rule; no judge call.
    t.success = false;
    t.judged = true;
  }
  push_event(t, make_event(last_step, EventKind::Final, CostClass::Plan, "",
                           final_reason));
  t.aggregates = recompute_aggregates(t);
  return {std::move(t), std::move(graph)};
}

}  // namespace planforge
