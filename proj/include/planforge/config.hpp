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

#include <map>
#include <string>
#include <vector>

#include "planforge/plan.hpp"

namespace planforge {

enum class InitStrategy {
  PlannerDecompose,
  SopConfiguration,
  RoleDefinition,
  DependencyParsing,
  HybridPlanning,
  FlowConstruction,
  InconsistencyTrigger
};

enum class TriggerKind {
  Periodic,
  OnFailureSignal,
  CriticLoop,
  EnvFeedback,
  Inconsistency,
  Never
};

enum class NavigationKind {
  Sequential,
  DynamicDispatch,
  ConcurrentPaths,
  CentralizedRouting,
  GraphTraversal,
  JointDeliberation,
  ConflictResolution
};

const char* to_string(InitStrategy s);
const char* to_string(TriggerKind k);
const char* to_string(NavigationKind k);
InitStrategy init_strategy_from_string(const std::string& s);
TriggerKind trigger_kind_from_string(const std::string& s);
NavigationKind navigation_kind_from_string(const std::string& s);

/// When to consider restructuring the plan. `period` applies to Periodic
/// and CriticLoop and must be >= 1.
struct TriggerSpec {
  TriggerKind kind = TriggerKind::Never;
  int period = 1;

  bool operator==(const TriggerSpec&) const = default;
};

struct InitParams {
  InitStrategy strategy = InitStrategy::DependencyParsing;
  int parse_retries = 2;
  // FlowConstruction bounds.
  int max_depth = 4;
  int max_nodes = 24;

  bool operator==(const InitParams&) const = default;
};

struct NavigationPolicy {
  NavigationKind kind = NavigationKind::DynamicDispatch;
  int max_concurrency = 1;

  bool operator==(const NavigationPolicy&) const = default;
};

struct Budgets {
  int max_steps = 40;
  long max_total_tokens = 200000;
  int max_retries = 2;

  bool operator==(const Budgets&) const = default;
};

/// The full planning configuration: topology shape, how the plan is
/// instantiated, when it is revised, and how directives are issued.
struct PlanConfiguration {
  TopologyKind topology_kind = TopologyKind::Dag;
  InitParams init;
  std::vector<TriggerSpec> adaptation_triggers;
  NavigationPolicy navigation;
  Budgets budgets;

  bool operator==(const PlanConfiguration&) const = default;
};

/// An executable instruction bound to one node.
struct Directive {
  NodeId node;
  std::string instruction;
  std::string role;
  int issued_at_step = 0;
};

struct ContextPolicy {
  int window_k = 6;
  bool include_summaries = true;

  bool operator==(const ContextPolicy&) const = default;
};

/// The execution substrate: which roles exist, which tools each role may
/// call, and how much history a directive context carries.
struct AgentSystemSpec {
  std::vector<std::string> roster;
  std::map<std::string, std::vector<std::string>> toolset;
  ContextPolicy context_policy;
  std::string active_selector = "role_or_round_robin";

  bool operator==(const AgentSystemSpec&) const = default;
};

}  // namespace planforge
