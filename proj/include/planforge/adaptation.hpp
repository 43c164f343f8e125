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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "planforge/config.hpp"
#include "planforge/plan.hpp"
#include "planforge/planner.hpp"
#include "planforge/topology.hpp"
#include "planforge/trajectory.hpp"

namespace planforge {

struct AdaptDecision {
  bool fired = false;
  TriggerKind reason = TriggerKind::Never;
  std::string evidence;  // empty whenever fired is false
  std::string node;      // involved node id, when one exists
};

/// Boolean reviewer consulted by CriticLoop triggers.
using Critic = std::function<bool(const Trajectory&, const PlanGraph&)>;

/// Pure decision function; the first trigger (in declared order) whose
/// condition holds provides the reason.
///   Periodic(p)      n_steps > 0 and n_steps mod p == 0
///   OnFailureSignal  the most recent event is a FailureSignal
///   CriticLoop(p)    on its period, and the critic (when given) approves
///   EnvFeedback      the most recent Observation is flagged anomalous
///   Inconsistency    two succeeded Verification nodes probing the same
///                    question disagree under normalized comparison
///   Never            never fires
AdaptDecision should_adapt(const Trajectory& trajectory, const PlanGraph& graph,
                           const std::vector<TriggerSpec>& triggers,
                           const Critic& critic = nullptr);

/// Asks the planner for an ops block given the graph summary, recent
/// events, and the fired reason. OnFailureSignal proposals must mention
/// the failed node or they are rejected and retried. Throws ParseError
/// once `parse_retries` corrective retries are exhausted. The planner
/// token cost is accumulated into `tokens_in`/`tokens_out`.
std::vector<AtomicOp> propose_revision(const PlanGraph& graph,
                                       const Trajectory& trajectory,
                                       Planner& planner,
                                       const AdaptDecision& reason,
                                       int parse_retries, long& tokens_in,
                                       long& tokens_out);

struct MetaVerifyResult {
  AdaptDecision decision;
  std::vector<AtomicOp> ops;  // resolution-node insertion, when needed
};

/// Cross-check audit: compares succeeded Verification nodes that probe the
/// same question. On disagreement the result carries ops creating one
/// Resolution node depending on both (unless one already exists).
/// Requires topology_kind == CrossCheckNet.
MetaVerifyResult meta_verify(const PlanGraph& graph);

/// Every `period_n` steps, returns prune_completed(graph); otherwise
/// nullopt. Requires topology_kind == Dag.
std::optional<PlanGraph> prune_trigger(const PlanGraph& graph,
                                       const Trajectory& trajectory,
                                       int period_n);

}  // namespace planforge
