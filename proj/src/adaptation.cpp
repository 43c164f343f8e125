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

#include "planforge/adaptation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "planforge/judge.hpp"
#include "planforge/markup.hpp"

namespace planforge {

namespace {

bool periodic_hit(const Trajectory& t, int period) {
  int steps = t.aggregates.n_steps;
  return steps > 0 && period > 0 && steps % period == 0;
}

const TrajectoryEvent* last_event(const Trajectory& t) {
  return t.events.empty() ? nullptr : &t.events.back();
}

const TrajectoryEvent* last_observation(const Trajectory& t) {
  for (auto it = t.events.rbegin(); it != t.events.rend(); ++it) {
    if (it->kind == EventKind::Observation) return &*it;
  }
  return nullptr;
}

/// First pair of succeeded Verification nodes probing the same question
/// whose results disagree, in id order.
std::optional<std::pair<NodeId, NodeId>> find_disagreement(const PlanGraph& g) {
  std::map<std::string, std::vector<NodeId>> by_question;
  for (const auto& [id, n] : g.nodes) {
    if (n.kind == NodeKind::Verification && n.status == NodeStatus::Succeeded &&
        n.result) {
      by_question[normalize_answer(n.instruction)].push_back(id);
    }
  }
  for (const auto& [q, ids] : by_question) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const std::string a = normalize_answer(*g.node(ids[i]).result);
        const std::string b = normalize_answer(*g.node(ids[j]).result);
        if (a != b) return std::make_pair(ids[i], ids[j]);
      }
    }
  }
  return std::nullopt;
}

}  // namespace

AdaptDecision should_adapt(const Trajectory& trajectory, const PlanGraph& graph,
                           const std::vector<TriggerSpec>& triggers,
                           const Critic& critic) {
  for (const TriggerSpec& trig : triggers) {
    switch (trig.kind) {
      case TriggerKind::Never:
        break;
      case TriggerKind::Periodic:
        if (periodic_hit(trajectory, trig.period)) {
          return {true, TriggerKind::Periodic,
                  "n_steps=" + std::to_string(trajectory.aggregates.n_steps) +
                      " period=" + std::to_string(trig.period),
                  ""};
        }
        break;
      case TriggerKind::OnFailureSignal: {
        const TrajectoryEvent* e = last_event(trajectory);
        if (e && e->kind == EventKind::FailureSignal) {
          return {true, TriggerKind::OnFailureSignal,
                  "failure at node " + e->node, e->node};
        }
        break;
      }
      case TriggerKind::CriticLoop:
        if (periodic_hit(trajectory, trig.period) &&
            (!critic || critic(trajectory, graph))) {
          return {true, TriggerKind::CriticLoop,
                  "critic review at step " +
                      std::to_string(trajectory.aggregates.n_steps),
                  ""};
        }
        break;
      case TriggerKind::EnvFeedback: {
        const TrajectoryEvent* obs = last_observation(trajectory);
        if (obs && obs->anomalous) {
          return {true, TriggerKind::EnvFeedback,
                  "anomalous observation at node " + obs->node, obs->node};
        }
        break;
      }
      case TriggerKind::Inconsistency: {
        auto pair = find_disagreement(graph);
        if (pair) {
          return {true, TriggerKind::Inconsistency,
                  pair->first.value + " and " + pair->second.value +
                      " disagree",
                  pair->first.value};
        }
        break;
      }
    }
  }
  return {};
}

std::vector<AtomicOp> propose_revision(const PlanGraph& graph,
                                       const Trajectory& trajectory,
                                       Planner& planner,
                                       const AdaptDecision& reason,
                                       int parse_retries, long& tokens_in,
                                       long& tokens_out) {
  if (!reason.fired) {
    throw StateError("propose_revision requires a fired decision");
  }
  const std::string prompt =
      std::string("[revision] The plan below is executing; propose a minimal "
                  "batch of atomic operations addressing the stated reason. "
                  "Respond with one fenced ops block (an empty block means no "
                  "change).\n\n") +
      "Ops lines: add_node / remove_node / add_edge / remove_edge / "
      "modify_node (see docs).";

  std::string correction;
  std::string last_error;
  for (int attempt = 0; attempt <= parse_retries; ++attempt) {
    std::ostringstream ctx;
    ctx << "Query: " << trajectory.query << "\n";
    ctx << "reason: " << to_string(reason.reason) << ": " << reason.evidence << "\n";
    if (reason.reason == TriggerKind::OnFailureSignal && !reason.node.empty()) {
      ctx << "failed_node: " << reason.node << "\n";
    }
    ctx << "graph:\n" << summarize_graph(graph);
    ctx << "recent events:\n";
    std::size_t from = trajectory.events.size() > 5 ? trajectory.events.size() - 5 : 0;
    for (std::size_t i = from; i < trajectory.events.size(); ++i) {
      const TrajectoryEvent& e = trajectory.events[i];
      ctx << "  step " << e.step << " " << to_string(e.kind) << " " << e.node
          << " " << e.detail << "\n";
    }
    if (!correction.empty()) ctx << correction;

    PlannerReply reply = planner.complete(prompt, ctx.str());
    tokens_in += reply.tokens_in;
    tokens_out += reply.tokens_out;
    try {
      std::vector<AtomicOp> ops = parse_ops_markup(reply.text);
      if (reason.reason == TriggerKind::OnFailureSignal && !reason.node.empty()) {
        bool mentions_failed = false;
        for (const AtomicOp& op : ops) {
          for (const NodeId& id : op_referenced_nodes(op)) {
            if (id.value == reason.node) mentions_failed = true;
          }
        }
        if (!mentions_failed) {
          last_error = "proposal does not address failed node " + reason.node;
          correction = "Correction: " + last_error +
                       "; include a retry-modify or replacement for it.\n";
          continue;
        }
      }
      return ops;
    } catch (const ParseError& e) {
      last_error = e.what();
      correction = std::string("Correction: previous output was rejected (") +
                   last_error + "). Respond with one fenced ops block.\n";
    }
  }
  throw ParseError("revision proposal failed after " +
                   std::to_string(parse_retries + 1) + " attempts: " + last_error);
}

MetaVerifyResult meta_verify(const PlanGraph& graph) {
  if (graph.topology_kind != TopologyKind::CrossCheckNet) {
    throw StateError("meta_verify requires a cross-check net");
  }
  MetaVerifyResult out;
  auto pair = find_disagreement(graph);
  if (!pair) return out;

  out.decision = {true, TriggerKind::Inconsistency,
                  pair->first.value + " and " + pair->second.value + " disagree",
                  pair->first.value};

  // Reuse an existing resolution node that already depends on both.
  for (const auto& [id, n] : graph.nodes) {
    if (n.kind != NodeKind::Resolution) continue;
    std::vector<NodeId> preds = graph.predecessors(id);
    bool covers_first = std::count(preds.begin(), preds.end(), pair->first) > 0;
    bool covers_second = std::count(preds.begin(), preds.end(), pair->second) > 0;
    if (covers_first && covers_second) return out;  // fired, no ops needed
  }

  PlanNode res;
  res.id = NodeId("r_" + pair->first.value + "_" + pair->second.value);
  res.kind = NodeKind::Resolution;
  res.title = "resolve disagreement";
  res.instruction = "resolve()";
  out.ops.push_back(AddNode{res});
  out.ops.push_back(AddEdge{PlanEdge{pair->first, res.id, false}});
  out.ops.push_back(AddEdge{PlanEdge{pair->second, res.id, false}});
  return out;
}

std::optional<PlanGraph> prune_trigger(const PlanGraph& graph,
                                       const Trajectory& trajectory,
                                       int period_n) {
  if (graph.topology_kind != TopologyKind::Dag) {
    throw StateError("prune_trigger requires a dag topology");
  }
  if (!periodic_hit(trajectory, period_n)) return std::nullopt;
  return prune_completed(graph);
}

}  // namespace planforge
