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

#include "planforge/world.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "planforge/codec.hpp"
#include "planforge/judge.hpp"
#include "planforge/planner.hpp"

namespace planforge {

const std::vector<ToolInfo>& tool_registry() {
  static const std::vector<ToolInfo> registry = {
      {"lookup", "lookup(<relation>, <entity>): fetch one fact"},
      {"calc", "calc(<expr>): evaluate + - * / arithmetic"},
      {"join", "join(<v1>, <v2>, ...): concatenate values with '; '; with no "
               "arguments, concatenates predecessor results in id order"},
      {"note", "note(<text>): record a coordination note"},
      {"answer", "answer(<query>): one-shot answer attempt; reliable only "
                 "for single-fact queries"},
      {"resolve", "resolve(): majority value among predecessor results, "
                  "ties to the smallest node id"},
  };
  return registry;
}

std::vector<std::string> tool_names() {
  std::vector<std::string> out;
  for (const ToolInfo& t : tool_registry()) out.push_back(t.name);
  return out;
}

std::string tool_docs() {
  std::string out = "Tools:\n";
  for (const ToolInfo& t : tool_registry()) {
    out += "- " + t.description + "\n";
  }
  return out;
}

void ScriptedWorld::add_fact(Fact f) {
  facts_[{f.entity, f.relation}] = f.value;
}

void ScriptedWorld::schedule_failure(FailureEntry e) {
  failures_.push_back(std::move(e));
}

std::optional<std::string> ScriptedWorld::lookup(const std::string& relation,
                                                 const std::string& entity) const {
  auto it = facts_.find({entity, relation});
  if (it == facts_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> ScriptedWorld::forced_failure(int step,
                                                         const NodeId& node) const {
  for (const FailureEntry& f : failures_) {
    if (f.step == step && (f.node_id == "*" || f.node_id == node.value)) {
      return f.kind;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Arithmetic
// ---------------------------------------------------------------------------

namespace {

struct ExprParser {
  const std::string& s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  double parse_expr() {
    double v = parse_term();
    while (true) {
      if (eat('+')) {
        v += parse_term();
      } else if (eat('-')) {
        v -= parse_term();
      } else {
        return v;
      }
    }
  }

  double parse_term() {
    double v = parse_factor();
    while (true) {
      if (eat('*')) {
        v *= parse_factor();
      } else if (eat('/')) {
        double d = parse_factor();
        if (d == 0.0) throw ParseError("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  double parse_factor() {
    skip_ws();
    if (eat('(')) {
      double v = parse_expr();
      if (!eat(')')) throw ParseError("expected ')' in expression");
      return v;
    }
    bool neg = eat('-');
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) {
      ++pos;
    }
    if (start == pos) {
      throw ParseError("expected number in expression at offset " +
                       std::to_string(pos));
    }
    double v = std::stod(s.substr(start, pos - start));
    return neg ? -v : v;
  }
};

}  // namespace

double eval_arithmetic(const std::string& expr) {
  ExprParser p{expr};
  double v = p.parse_expr();
  p.skip_ws();
  if (p.pos != expr.size()) {
    throw ParseError("trailing characters in expression: '" + expr + "'");
  }
  return v;
}

std::string format_number(double v) {
  double rounded = std::round(v);
  if (std::abs(v - rounded) < 1e-9 && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f", rounded);
    return buf;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::vector<std::string> split_args(const std::string& args) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : args) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    cur += c;
  }
  out.push_back(cur);
  // trim each
  for (std::string& a : out) {
    std::size_t b = a.find_first_not_of(" \t");
    std::size_t e = a.find_last_not_of(" \t");
    a = (b == std::string::npos) ? "" : a.substr(b, e - b + 1);
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

// ---------------------------------------------------------------------------
// Tools
// ---------------------------------------------------------------------------

namespace {

ToolOutcome tool_answer(const ScriptedWorld& world, const std::string& query) {
  QueryShape shape = parse_query_shape(query);
  if (!shape.parsed || shape.branches.empty()) {
    return {true, "unknown"};
  }
  const QueryBranch& first = shape.branches.front();
  const QueryHop& hop = first.hops.front();
  auto v = world.lookup(hop.relation, hop.entity);
  bool single_fact = shape.branches.size() == 1 && first.hops.size() == 1 &&
                     shape.combine == QueryCombine::None;
  if (single_fact) {
    if (!v) return {false, "fact not found: " + hop.relation + " of " + hop.entity};
    return {true, *v};
  }
  // Multi-part query attempted in one shot: only the first fact is
  // recovered, so the answer is partial at best.
  return {true, v ? *v : "unknown"};
}

}  // namespace

ToolOutcome ScriptedWorld::run_tool(const std::string& name, const std::string& arg,
                                    const ToolContext& ctx) const {
  if (name == "lookup") {
    std::vector<std::string> parts = split_args(arg);
    if (parts.size() != 2) {
      return {false, "lookup expects (relation, entity), got '" + arg + "'"};
    }
    auto v = lookup(parts[0], parts[1]);
    if (!v) {
      return {false, "fact not found: " + parts[0] + " of " + parts[1]};
    }
    return {true, *v};
  }
  if (name == "calc") {
    try {
      return {true, format_number(eval_arithmetic(arg))};
    } catch (const ParseError& e) {
      return {false, std::string("calc failed: ") + e.what()};
    }
  }
  if (name == "join") {
    std::vector<std::string> parts = split_args(arg);
    if (parts.empty()) {
      for (const auto& [id, result] : ctx.predecessor_results) {
        parts.push_back(result);
      }
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += "; ";
      out += parts[i];
    }
    return {true, out};
  }
  if (name == "note") {
    return {true, arg};
  }
  if (name == "answer") {
    return tool_answer(*this, arg);
  }
  if (name == "resolve") {
    if (ctx.predecessor_results.empty()) {
      return {false, "resolve: no candidate results"};
    }
    // Majority of normalized values; ties to the smallest source id.
    std::map<std::string, std::pair<int, std::pair<NodeId, std::string>>> groups;
    for (const auto& [id, result] : ctx.predecessor_results) {
      std::string key = normalize_answer(result);
      auto [it, inserted] = groups.try_emplace(key, 0, std::make_pair(id, result));
      it->second.first += 1;
      if (!inserted && id < it->second.second.first) {
        it->second.second = {id, result};
      }
    }
    const std::pair<NodeId, std::string>* best = nullptr;
    int best_count = 0;
    for (const auto& [key, entry] : groups) {
      if (!best || entry.first > best_count ||
          (entry.first == best_count && entry.second.first < best->first)) {
        best = &entry.second;
        best_count = entry.first;
      }
    }
    return {true, best->second};
  }
  return {false, "unknown tool: " + name};
}

ScriptedWorld ScriptedWorld::from_files(const std::string& facts_path,
                                        const std::string& failures_path) {
  using json = nlohmann::json;
  ScriptedWorld world;
  for (const std::string& line : read_record_lines(facts_path)) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw SchemaError("bad fact record: " + line);
    }
    Fact f;
    try {
      f.entity = j.at("entity").get<std::string>();
      f.relation = j.at("relation").get<std::string>();
      f.value = j.at("value").get<std::string>();
    } catch (const json::exception&) {
      throw SchemaError("fact record needs entity/relation/value: " + line);
    }
    world.add_fact(std::move(f));
  }
  if (!failures_path.empty()) {
    for (const std::string& line : read_record_lines(failures_path)) {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw SchemaError("bad failure record: " + line);
      }
      FailureEntry e;
      try {
        e.step = j.at("step").get<int>();
        e.node_id = j.at("node_id").get<std::string>();
        e.kind = j.value("kind", "fail");
      } catch (const json::exception&) {
        throw SchemaError("failure record needs step/node_id: " + line);
      }
      world.schedule_failure(std::move(e));
    }
  }
  return world;
}

}  // namespace planforge
