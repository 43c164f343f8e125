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

#include "planforge/planner.hpp"

#include <cstdio>
#include <sstream>

#include "planforge/markup.hpp"

namespace planforge {

long synthetic_tokens(const std::string& text) {
  return static_cast<long>(text.size() / 4);
}

CannedPlanner::CannedPlanner(std::vector<std::string> responses)
    : responses_(std::move(responses)) {
  if (responses_.empty()) {
    throw ConfigError("canned planner needs at least one response");
  }
}

PlannerReply CannedPlanner::complete(const std::string& system_prompt,
                                     const std::string& context) {
  const std::string& text = responses_[calls_ % responses_.size()];
  calls_ += 1;
  return {text, synthetic_tokens(system_prompt + context), synthetic_tokens(text)};
}

std::string context_field(const std::string& context, const std::string& key) {
  std::istringstream in(context);
  std::string line;
  std::string prefix = key + ":";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) {
      std::string v = line.substr(prefix.size());
      std::size_t b = v.find_first_not_of(" \t");
      if (b == std::string::npos) return "";
      std::size_t e = v.find_last_not_of(" \t\r");
      return v.substr(b, e - b + 1);
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// Query grammar
// ---------------------------------------------------------------------------

namespace {

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n?.");
  if (e == std::string::npos || e < b) return "";
  return s.substr(b, e - b + 1);
}

/// Splits on `sep` occurrences at parenthesis depth zero.
std::vector<std::string> split_top(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '(') {
      ++depth;
      ++i;
    } else if (s[i] == ')') {
      --depth;
      ++i;
    } else if (depth == 0 && s.compare(i, sep.size(), sep) == 0) {
      out.push_back(s.substr(start, i - start));
      i += sep.size();
      start = i;
    } else {
      ++i;
    }
  }
  out.push_back(s.substr(start));
  return out;
}

std::optional<QueryBranch> parse_atom(const std::string& raw) {
  std::string s = strip(raw);
  // first " of " at depth zero separates relation from argument
  int depth = 0;
  std::size_t pos = std::string::npos;
  for (std::size_t i = 0; i + 4 <= s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth == 0 && s.compare(i, 4, " of ") == 0) {
      pos = i;
      break;
    }
  }
  if (pos == std::string::npos) return std::nullopt;
  std::string relation = strip(s.substr(0, pos));
  std::string arg = strip(s.substr(pos + 4));
  if (relation.empty() || arg.empty()) return std::nullopt;
  if (arg.front() == '(' && arg.back() == ')') {
    auto inner = parse_atom(arg.substr(1, arg.size() - 2));
    if (!inner) return std::nullopt;
    QueryBranch branch = *inner;
    branch.hops.push_back(QueryHop{relation, "", true});
    return branch;
  }
  return QueryBranch{{QueryHop{relation, arg, false}}};
}

}  // namespace

QueryShape parse_query_shape(const std::string& query) {
  QueryShape shape;
  std::string s = strip(query);
  if (s.empty()) return shape;

  struct Prefix {
    const char* text;
    QueryCombine combine;
  };
  static const Prefix kPrefixes[] = {{"sum of ", QueryCombine::Sum},
                                     {"product of ", QueryCombine::Product},
                                     {"difference of ", QueryCombine::Difference}};
  for (const Prefix& p : kPrefixes) {
    if (s.rfind(p.text, 0) == 0) {
      std::vector<std::string> parts = split_top(s.substr(std::string(p.text).size()), " and ");
      if (parts.size() != 2) return shape;
      for (const std::string& part : parts) {
        auto b = parse_atom(part);
        if (!b) return shape;
        shape.branches.push_back(std::move(*b));
      }
      shape.combine = p.combine;
      shape.parsed = true;
      return shape;
    }
  }

  std::vector<std::string> parts = split_top(s, " and ");
  for (const std::string& part : parts) {
    auto b = parse_atom(part);
    if (!b) return QueryShape{};
    shape.branches.push_back(std::move(*b));
  }
  shape.combine = parts.size() > 1 ? QueryCombine::Join : QueryCombine::None;
  shape.parsed = true;
  return shape;
}

// ---------------------------------------------------------------------------
// ScriptedPlanner
// ---------------------------------------------------------------------------

namespace {

std::string node_id_for(int index) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "n%02d", index);
  return buf;
}

struct Built {
  ParsedPlan plan;
  std::vector<NodeId> branch_tails;
};

/// Lookup chains for every branch, branch-major ids n01, n02, ...
/// `chain_across_branches` threads an edge from each branch tail into the
/// next branch head (list-style plans); otherwise branches are parallel.
Built build_hops(const QueryShape& q, bool chain_across_branches,
                 const std::optional<std::string>& role) {
  Built out;
  int next = 1;
  NodeId prev_tail;
  for (const QueryBranch& branch : q.branches) {
    NodeId prev;
    for (std::size_t h = 0; h < branch.hops.size(); ++h) {
      const QueryHop& hop = branch.hops[h];
      PlanNode n;
      n.id = NodeId(node_id_for(next++));
      n.kind = NodeKind::Task;
      n.title = "lookup " + hop.relation;
      if (hop.chained) {
        n.instruction = "lookup(" + hop.relation + ", ${" + prev.value + "})";
      } else {
        n.instruction = "lookup(" + hop.relation + ", " + hop.entity + ")";
      }
      n.role = role;
      if (h > 0) {
        out.plan.edges.push_back(PlanEdge{prev, n.id, false});
      } else if (chain_across_branches && !prev_tail.value.empty()) {
        out.plan.edges.push_back(PlanEdge{prev_tail, n.id, false});
      }
      prev = n.id;
      out.plan.nodes.push_back(std::move(n));
    }
    out.branch_tails.push_back(prev);
    prev_tail = prev;
  }
  return out;
}

std::string combine_instruction(const QueryShape& q, const std::vector<NodeId>& tails) {
  auto ref = [&](std::size_t i) { return "${" + tails[i].value + "}"; };
  switch (q.combine) {
    case QueryCombine::Sum: return "calc(" + ref(0) + " + " + ref(1) + ")";
    case QueryCombine::Product: return "calc(" + ref(0) + " * " + ref(1) + ")";
    case QueryCombine::Difference: return "calc(" + ref(0) + " - " + ref(1) + ")";
    default: {
      std::string args;
      for (std::size_t i = 0; i < tails.size(); ++i) {
        if (i) args += ", ";
        args += ref(i);
      }
      return "join(" + args + ")";
    }
  }
}

bool is_arithmetic(QueryCombine c) {
  return c == QueryCombine::Sum || c == QueryCombine::Product ||
         c == QueryCombine::Difference;
}

ParsedPlan fallback_plan(const std::string& query) {
  PlanNode n;
  n.id = NodeId("n01");
  n.kind = NodeKind::Task;
  n.title = "answer directly";
  n.instruction = "answer(" + query + ")";
  return ParsedPlan{{n}, {}};
}

/// Shapes a parsed query per the requested plan style. See the strategy
/// table in paradigms.cpp for which style each initialization uses.
ParsedPlan scripted_plan(const std::string& style, const std::string& query) {
  QueryShape q = parse_query_shape(query);
  if (!q.parsed) return fallback_plan(query);

  if (style == "chain" || style == "roles") {
    bool with_roles = (style == "roles");
    Built built = build_hops(q, /*chain_across_branches=*/true,
                             with_roles ? std::optional<std::string>("searcher")
                                        : std::nullopt);
    if (q.combine != QueryCombine::None) {
      PlanNode tail;
      tail.id = NodeId(node_id_for(static_cast<int>(built.plan.nodes.size()) + 1));
      tail.kind = NodeKind::Aggregation;
      tail.title = is_arithmetic(q.combine) ? "compute result" : "combine results";
      tail.instruction = combine_instruction(q, built.branch_tails);
      if (with_roles) {
        tail.role = is_arithmetic(q.combine) ? "calculator" : "aggregator";
      }
      built.plan.edges.push_back(
          PlanEdge{built.plan.nodes.back().id, tail.id, false});
      built.plan.nodes.push_back(std::move(tail));
    }
    return built.plan;
  }

  // dag / sop: parallel branches
  Built built = build_hops(q, /*chain_across_branches=*/false, std::nullopt);
  NodeId last_tail;
  if (is_arithmetic(q.combine)) {
    PlanNode calc;
    calc.id = NodeId(node_id_for(static_cast<int>(built.plan.nodes.size()) + 1));
    calc.kind = NodeKind::Aggregation;
    calc.title = "compute result";
    calc.instruction = combine_instruction(q, built.branch_tails);
    for (const NodeId& t : built.branch_tails) {
      built.plan.edges.push_back(PlanEdge{t, calc.id, false});
    }
    last_tail = calc.id;
    built.plan.nodes.push_back(std::move(calc));
  }
  if (style == "sop") {
    // procedure plans always end with an explicit report step
    PlanNode report;
    report.id = NodeId(node_id_for(static_cast<int>(built.plan.nodes.size()) + 1));
    report.kind = NodeKind::Aggregation;
    report.title = "compile report";
    if (!last_tail.value.empty()) {
      report.instruction = "join(${" + last_tail.value + "})";
      built.plan.edges.push_back(PlanEdge{last_tail, report.id, false});
    } else {
      report.instruction = combine_instruction(
          QueryShape{q.branches, QueryCombine::Join, true}, built.branch_tails);
      for (const NodeId& t : built.branch_tails) {
        built.plan.edges.push_back(PlanEdge{t, report.id, false});
      }
    }
    built.plan.nodes.push_back(std::move(report));
  }
  return built.plan;
}

/// Flow expansion: ops that grow prerequisite structure beneath the
/// existing synthesis root and point the root at the branch tails.
std::string scripted_flow_expansion(const std::string& query) {
  QueryShape q = parse_query_shape(query);
  std::vector<AtomicOp> ops;
  if (!q.parsed) {
    ParsedPlan p = fallback_plan(query);
    ops.push_back(AddNode{p.nodes[0]});
    ops.push_back(AddEdge{PlanEdge{p.nodes[0].id, NodeId("root"), false}});
    return render_ops_markup(ops);
  }
  Built built = build_hops(q, /*chain_across_branches=*/false, std::nullopt);
  for (const PlanNode& n : built.plan.nodes) ops.push_back(AddNode{n});
  for (const PlanEdge& e : built.plan.edges) ops.push_back(AddEdge{e});
  for (const NodeId& t : built.branch_tails) {
    ops.push_back(AddEdge{PlanEdge{t, NodeId("root"), false}});
  }
  ModifyNode mod;
  mod.id = NodeId("root");
  mod.patch.instruction = combine_instruction(q, built.branch_tails);
  ops.push_back(std::move(mod));
  return render_ops_markup(ops);
}

std::string marker_value(const std::string& prompt, const std::string& name) {
  std::string open = "[" + name + "=";
  std::size_t b = prompt.find(open);
  if (b == std::string::npos) return "";
  b += open.size();
  std::size_t e = prompt.find(']', b);
  if (e == std::string::npos) return "";
  return prompt.substr(b, e - b);
}

}  // namespace

PlannerReply ScriptedPlanner::complete(const std::string& system_prompt,
                                       const std::string& context) {
  std::string text;
  std::string query = context_field(context, "Query");

  if (system_prompt.find("[revision]") != std::string::npos) {
    std::string failed = context_field(context, "failed_node");
    std::vector<AtomicOp> ops;
    if (!failed.empty()) {
      ModifyNode mod;
      mod.id = NodeId(failed);
      mod.patch.title = "retry";
      ops.push_back(std::move(mod));
    }
    text = render_ops_markup(ops);
  } else {
    std::string style = marker_value(system_prompt, "shape");
    if (style == "flow") {
      text = context_field(context, "round") == "0" ? scripted_flow_expansion(query)
                                                    : "done";
    } else if (style.empty()) {
      text = render_plan_markup(scripted_plan("dag", query));
    } else {
      text = render_plan_markup(scripted_plan(style, query));
    }
  }
  return {text, synthetic_tokens(system_prompt + context), synthetic_tokens(text)};
}

}  // namespace planforge
