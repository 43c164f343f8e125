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

#include <cstdint>
#include <string>
#include <vector>

#include "planforge/errors.hpp"

namespace planforge {

struct PlannerReply {
  std::string text;
  long tokens_in = 0;
  long tokens_out = 0;
};

/// Text-in/text-out generation contract used by plan initialization,
/// revision proposals, and the data pipeline's meta planner.
/// Implementations must be safe for concurrent calls.
class Planner {
public:
  virtual ~Planner() = default;
  virtual PlannerReply complete(const std::string& system_prompt,
                                const std::string& context) = 0;
};

/// Synthetic token accounting used by every scripted component:
/// one token per four characters, rounded down.
long synthetic_tokens(const std::string& text);

/// Returns a canned response per call, cycling when exhausted. Tests use
/// this to feed exact markup (including malformed markup) into the
/// initialization and revision paths.
class CannedPlanner : public Planner {
public:
  explicit CannedPlanner(std::vector<std::string> responses);

  PlannerReply complete(const std::string& system_prompt,
                        const std::string& context) override;

  int calls() const { return calls_; }

private:
  std::vector<std::string> responses_;
  int calls_ = 0;
};

// ---------------------------------------------------------------------------
// Scripted planner: deterministic decomposition of structured queries
// ---------------------------------------------------------------------------

/// The structured query grammar the scripted planner understands:
///
///   query  := ("sum of"|"product of"|"difference of") part " and " part
///           | part (" and " part)+
///           | part
///   part   := relation " of " arg
///   arg    := "(" part ")" | entity text
///
/// e.g. "capital of France and currency of Japan",
///      "capital of (country of Eiffel Tower)",
///      "sum of population of Metropolis and population of Gotham".
struct QueryHop {
  std::string relation;
  std::string entity;      // literal, or empty when chained to previous hop
  bool chained = false;
};

struct QueryBranch {
  std::vector<QueryHop> hops;  // innermost lookup first
};

enum class QueryCombine { None, Join, Sum, Product, Difference };

struct QueryShape {
  std::vector<QueryBranch> branches;
  QueryCombine combine = QueryCombine::None;
  bool parsed = false;  // false: grammar did not match, fall back to answer()
};

QueryShape parse_query_shape(const std::string& query);

/// Deterministic table-driven planner. It reads the query from the
/// "Query:" line of the context and honors the shape marker the caller put
/// in the system prompt ([shape=dag], [shape=chain], [shape=sop],
/// [shape=roles], [shape=flow], [revision]), emitting the corresponding
/// fenced markup. Same seed, same inputs, byte-identical output.
class ScriptedPlanner : public Planner {
public:
  explicit ScriptedPlanner(std::uint64_t seed = 0) : seed_(seed) {}

  PlannerReply complete(const std::string& system_prompt,
                        const std::string& context) override;

private:
  std::uint64_t seed_;
};

/// Extracts the value of a single-line "key: value" pair from planner
/// context; empty string when absent.
std::string context_field(const std::string& context, const std::string& key);

}  // namespace planforge
