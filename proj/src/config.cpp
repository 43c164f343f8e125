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

#include "planforge/config.hpp"

namespace planforge {

const char* to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::PlannerDecompose: return "planner_decompose";
    case InitStrategy::SopConfiguration: return "sop_configuration";
    case InitStrategy::RoleDefinition: return "role_definition";
    case InitStrategy::DependencyParsing: return "dependency_parsing";
    case InitStrategy::HybridPlanning: return "hybrid_planning";
    case InitStrategy::FlowConstruction: return "flow_construction";
    case InitStrategy::InconsistencyTrigger: return "inconsistency_trigger";
  }
  return "dependency_parsing";
}

const char* to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::Periodic: return "periodic";
    case TriggerKind::OnFailureSignal: return "on_failure_signal";
    case TriggerKind::CriticLoop: return "critic_loop";
    case TriggerKind::EnvFeedback: return "env_feedback";
    case TriggerKind::Inconsistency: return "inconsistency";
    case TriggerKind::Never: return "never";
  }
  return "never";
}

const char* to_string(NavigationKind k) {
  switch (k) {
    case NavigationKind::Sequential: return "sequential";
    case NavigationKind::DynamicDispatch: return "dynamic_dispatch";
    case NavigationKind::ConcurrentPaths: return "concurrent_paths";
    case NavigationKind::CentralizedRouting: return "centralized_routing";
    case NavigationKind::GraphTraversal: return "graph_traversal";
    case NavigationKind::JointDeliberation: return "joint_deliberation";
    case NavigationKind::ConflictResolution: return "conflict_resolution";
  }
  return "dynamic_dispatch";
}

InitStrategy init_strategy_from_string(const std::string& s) {
  if (s == "planner_decompose") return InitStrategy::PlannerDecompose;
  if (s == "sop_configuration") return InitStrategy::SopConfiguration;
  if (s == "role_definition") return InitStrategy::RoleDefinition;
  if (s == "dependency_parsing") return InitStrategy::DependencyParsing;
  if (s == "hybrid_planning") return InitStrategy::HybridPlanning;
  if (s == "flow_construction") return InitStrategy::FlowConstruction;
  if (s == "inconsistency_trigger") return InitStrategy::InconsistencyTrigger;
  throw SchemaError("unknown init strategy: " + s);
}

TriggerKind trigger_kind_from_string(const std::string& s) {
  if (s == "periodic") return TriggerKind::Periodic;
  if (s == "on_failure_signal") return TriggerKind::OnFailureSignal;
  if (s == "critic_loop") return TriggerKind::CriticLoop;
  if (s == "env_feedback") return TriggerKind::EnvFeedback;
  if (s == "inconsistency") return TriggerKind::Inconsistency;
  if (s == "never") return TriggerKind::Never;
  throw SchemaError("unknown trigger kind: " + s);
}

NavigationKind navigation_kind_from_string(const std::string& s) {
  if (s == "sequential") return NavigationKind::Sequential;
  if (s == "dynamic_dispatch") return NavigationKind::DynamicDispatch;
  if (s == "concurrent_paths") return NavigationKind::ConcurrentPaths;
  if (s == "centralized_routing") return NavigationKind::CentralizedRouting;
  if (s == "graph_traversal") return NavigationKind::GraphTraversal;
  if (s == "joint_deliberation") return NavigationKind::JointDeliberation;
  if (s == "conflict_resolution") return NavigationKind::ConflictResolution;
  throw SchemaError("unknown navigation kind: " + s);
}

}  // namespace planforge
