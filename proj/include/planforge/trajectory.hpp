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

#include <optional>
#include <string>
#include <vector>

#include "planforge/errors.hpp"

namespace planforge {

enum class EventKind {
  PlanInit,
  Dispatch,
  ToolCall,
  Observation,
  Revision,
  FailureSignal,
  Judge,
  Final
};

enum class CostClass { Plan, Exec };

const char* to_string(EventKind k);
const char* to_string(CostClass c);
EventKind event_kind_from_string(const std::string& s);
CostClass cost_class_from_string(const std::string& s);

/// One entry in the episode log. PlanInit/Revision always carry Plan cost;
/// ToolCall/Observation always carry Exec cost. `node` is empty for events
/// not tied to a node. `anomalous` is only meaningful on Observation.
struct TrajectoryEvent {
  int step = 0;
  EventKind kind = EventKind::Dispatch;
  long tokens_in = 0;
  long tokens_out = 0;
  long wall_ms = 0;
  CostClass cost_class = CostClass::Plan;
  std::string node;
  std::string detail;
  bool anomalous = false;

  bool operator==(const TrajectoryEvent&) const = default;
};

struct Aggregates {
  long c_total_tokens = 0;
  long c_plan_tokens = 0;
  long c_exec_tokens = 0;
  int n_fail = 0;
  int n_revisions = 0;
  int n_retries = 0;
  int n_steps = 0;

  bool operator==(const Aggregates&) const = default;
};

/// The ordered event record of one episode. `aggregates` is always exactly
/// reproducible from `events` via recompute_aggregates.
struct Trajectory {
  std::string query;
  std::vector<TrajectoryEvent> events;
  std::optional<std::string> final_answer;
  bool success = false;
  bool judged = false;
  Aggregates aggregates;

  bool operator==(const Trajectory&) const = default;
};

/// Single deterministic fold over the event list:
///   c_plan / c_exec  = sum of tokens_in + tokens_out per cost class
///   n_fail           = FailureSignal events
///   n_revisions      = Revision events
///   n_steps          = Dispatch events
///   n_retries        = Dispatch events minus distinct dispatched nodes
/// Throws StateError if event steps are not nondecreasing. Idempotent.
Aggregates recompute_aggregates(const Trajectory& t);

}  // namespace planforge
