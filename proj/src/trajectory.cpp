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

#include "planforge/trajectory.hpp"

#include <set>
#include <string>

namespace planforge {

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::PlanInit: return "plan_init";
    case EventKind::Dispatch: return "dispatch";
    case EventKind::ToolCall: return "tool_call";
    case EventKind::Observation: return "observation";
    case EventKind::Revision: return "revision";
    case EventKind::FailureSignal: return "failure_signal";
    case EventKind::Judge: return "judge";
    case EventKind::Final: return "final";
  }
  return "dispatch";
}

const char* to_string(CostClass c) {
  return c == CostClass::Plan ? "plan" : "exec";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "plan_init") return EventKind::PlanInit;
  if (s == "dispatch") return EventKind::Dispatch;
  if (s == "tool_call") return EventKind::ToolCall;
  if (s == "observation") return EventKind::Observation;
  if (s == "revision") return EventKind::Revision;
  if (s == "failure_signal") return EventKind::FailureSignal;
  if (s == "judge") return EventKind::Judge;
  if (s == "final") return EventKind::Final;
  throw SchemaError("unknown event kind: " + s);
}

CostClass cost_class_from_string(const std::string& s) {
  if (s == "plan") return CostClass::Plan;
  if (s == "exec") return CostClass::Exec;
  throw SchemaError("unknown cost class: " + s);
}

Aggregates recompute_aggregates(const Trajectory& t) {
  Aggregates a;
  int last_step = 0;
  std::set<std::string> dispatched;
  int dispatch_events = 0;
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    const TrajectoryEvent& e = t.events[i];
    if (e.step < last_step) {
      throw StateError("events out of order at index " + std::to_string(i));
    }
    last_step = e.step;
    long tok = e.tokens_in + e.tokens_out;
    if (e.cost_class == CostClass::Plan) {
      a.c_plan_tokens += tok;
    } else {
      a.c_exec_tokens += tok;
    }
    switch (e.kind) {
      case EventKind::FailureSignal: a.n_fail += 1; break;
      case EventKind::Revision: a.n_revisions += 1; break;
      case EventKind::Dispatch:
        dispatch_events += 1;
        dispatched.insert(e.node);
        break;
      default: break;
    }
  }
  a.n_steps = dispatch_events;
  a.n_retries = dispatch_events - static_cast<int>(dispatched.size());
  a.c_total_tokens = a.c_plan_tokens + a.c_exec_tokens;
  return a;
}

}  // namespace planforge
