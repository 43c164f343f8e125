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

#include "planforge/markup.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace planforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(trim(s.substr(pos)));
      return out;
    }
    out.push_back(trim(s.substr(pos, next - pos)));
    pos = next + sep.size();
  }
}

/// Lines of the first fenced block tagged `tag`; empty optional if none.
std::optional<std::vector<std::string>> fenced_lines(const std::string& text,
                                                     const std::string& tag) {
  std::istringstream in(text);
  std::string line;
  bool inside = false;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (!inside) {
      if (t == "```" + tag) inside = true;
      continue;
    }
    if (t == "```") return lines;
    lines.push_back(t);
  }
  return std::nullopt;  // no opener, or block never closed
}

/// "<from> -> <to>"
std::pair<NodeId, NodeId> parse_arrow(const std::string& rest, const std::string& where) {
  std::size_t pos = rest.find("->");
  if (pos == std::string::npos) {
    throw ParseError(where + ": expected '<from> -> <to>', got '" + rest + "'");
  }
  std::string from = trim(rest.substr(0, pos));
  std::string to = trim(rest.substr(pos + 2));
  if (from.empty() || to.empty()) {
    throw ParseError(where + ": empty endpoint in '" + rest + "'");
  }
  return {NodeId(from), NodeId(to)};
}

PlanNode parse_node_fields(const std::vector<std::string>& fields,
                           const std::string& where) {
  if (fields.size() < 4) {
    throw ParseError(where + ": expected '<id> | <kind> | <title> | <instruction>'");
  }
  PlanNode n;
  n.id = NodeId(fields[0]);
  if (n.id.value.empty()) throw ParseError(where + ": empty node id");
  n.kind = node_kind_from_string(fields[1]);
  n.title = fields[2];
  n.instruction = fields[3];
  for (std::size_t i = 4; i < fields.size(); ++i) {
    std::size_t eq = fields[i].find('=');
    if (eq == std::string::npos) continue;  // unknown fields ignored
    std::string key = trim(fields[i].substr(0, eq));
    std::string value = trim(fields[i].substr(eq + 1));
    if (key == "role") n.role = value;
  }
  return n;
}

}  // namespace

bool has_fenced_block(const std::string& text, const std::string& tag) {
  return fenced_lines(text, tag).has_value();
}

ParsedPlan parse_plan_markup(const std::string& text) {
  auto lines = fenced_lines(text, "plan");
  if (!lines) throw ParseError("no fenced plan block");
  ParsedPlan plan;
  std::set<NodeId> ids;
  for (const std::string& line : *lines) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("node ", 0) == 0) {
      PlanNode n = parse_node_fields(split(line.substr(5), "|"), "node");
      if (!ids.insert(n.id).second) {
        throw ParseError("duplicate node id '" + n.id.value + "'");
      }
      plan.nodes.push_back(std::move(n));
    } else if (line.rfind("edge ", 0) == 0) {
      auto [from, to] = parse_arrow(line.substr(5), "edge");
      plan.edges.push_back(PlanEdge{from, to, false});
    }
    // other lines ignored
  }
  for (const PlanEdge& e : plan.edges) {
    if (!ids.count(e.from)) {
      throw ParseError("dependency references undeclared id '" + e.from.value + "'");
    }
    if (!ids.count(e.to)) {
      throw ParseError("dependency references undeclared id '" + e.to.value + "'");
    }
  }
  return plan;
}

std::vector<AtomicOp> parse_ops_markup(const std::string& text) {
  auto lines = fenced_lines(text, "ops");
  if (!lines) throw ParseError("no fenced ops block");
  std::vector<AtomicOp> ops;
  for (const std::string& line : *lines) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("add_node ", 0) == 0) {
      ops.push_back(AddNode{parse_node_fields(split(line.substr(9), "|"), "add_node")});
    } else if (line.rfind("remove_node ", 0) == 0) {
      std::string id = trim(line.substr(12));
      if (id.empty()) throw ParseError("remove_node: empty id");
      ops.push_back(RemoveNode{NodeId(id)});
    } else if (line.rfind("add_edge ", 0) == 0) {
      auto [from, to] = parse_arrow(line.substr(9), "add_edge");
      ops.push_back(AddEdge{PlanEdge{from, to, false}});
    } else if (line.rfind("remove_edge ", 0) == 0) {
      auto [from, to] = parse_arrow(line.substr(12), "remove_edge");
      ops.push_back(RemoveEdge{PlanEdge{from, to, false}});
    } else if (line.rfind("modify_node ", 0) == 0) {
      std::vector<std::string> fields = split(line.substr(12), "|");
      if (fields.empty() || fields[0].empty()) {
        throw ParseError("modify_node: expected '<id> | <field>=<value> ...'");
      }
      ModifyNode mod;
      mod.id = NodeId(fields[0]);
      for (std::size_t i = 1; i < fields.size(); ++i) {
        std::size_t eq = fields[i].find('=');
        if (eq == std::string::npos) {
          throw ParseError("modify_node: expected <field>=<value>, got '" +
                           fields[i] + "'");
        }
        std::string key = trim(fields[i].substr(0, eq));
        std::string value = trim(fields[i].substr(eq + 1));
        if (key == "title") {
          mod.patch.title = value;
        } else if (key == "instruction") {
          mod.patch.instruction = value;
        } else if (key == "role") {
          mod.patch.role = value;
        } else if (key == "aux_validated") {
          mod.patch.aux_validated = (value == "true" || value == "1");
        }
        // unknown fields ignored
      }
      ops.push_back(std::move(mod));
    }
    // other lines ignored
  }
  return ops;
}

namespace {

/// "name" or "name(arg)"; returns {name, arg-or-empty}.
std::pair<std::string, std::string> parse_call(const std::string& s) {
  std::size_t open = s.find('(');
  if (open == std::string::npos) return {trim(s), ""};
  std::size_t close = s.rfind(')');
  if (close == std::string::npos || close < open) {
    throw ParseError("unbalanced parentheses in '" + s + "'");
  }
  return {trim(s.substr(0, open)), trim(s.substr(open + 1, close - open - 1))};
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": expected integer, got '" + s + "'");
  }
}

}  // namespace

PlanConfiguration parse_config_markup(const std::string& text) {
  auto lines = fenced_lines(text, "config");
  if (!lines) throw ParseError("no fenced config block");
  PlanConfiguration c;
  bool saw_topology = false, saw_init = false, saw_navigation = false;
  for (const std::string& line : *lines) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "topology") {
        c.topology_kind = topology_kind_from_string(value);
        saw_topology = true;
      } else if (key == "init") {
        c.init.strategy = init_strategy_from_string(value);
        saw_init = true;
      } else if (key == "triggers") {
        c.adaptation_triggers.clear();
        for (const std::string& part : split(value, ",")) {
          if (part.empty()) continue;
          auto [name, arg] = parse_call(part);
          TriggerSpec t;
          t.kind = trigger_kind_from_string(name);
          if (!arg.empty()) t.period = parse_int(arg, "trigger period");
          c.adaptation_triggers.push_back(t);
        }
      } else if (key == "navigation") {
        auto [name, arg] = parse_call(value);
        c.navigation.kind = navigation_kind_from_string(name);
        if (!arg.empty()) {
          c.navigation.max_concurrency = parse_int(arg, "max_concurrency");
        } else if (c.navigation.kind == NavigationKind::Sequential) {
          c.navigation.max_concurrency = 1;
        }
        saw_navigation = true;
      } else if (key == "budgets") {
        for (const std::string& part : split(value, ",")) {
          std::size_t peq = part.find('=');
          if (peq == std::string::npos) continue;
          std::string k = trim(part.substr(0, peq));
          std::string v = trim(part.substr(peq + 1));
          if (k == "steps") c.budgets.max_steps = parse_int(v, "budgets.steps");
          if (k == "tokens") c.budgets.max_total_tokens = parse_int(v, "budgets.tokens");
          if (k == "retries") c.budgets.max_retries = parse_int(v, "budgets.retries");
        }
      }
      // unknown keys ignored
    } catch (const SchemaError& e) {
      throw ParseError(std::string("config block: ") + e.what());
    }
  }
  if (!saw_topology) throw ParseError("config block: missing 'topology'");
  if (!saw_init) throw ParseError("config block: missing 'init'");
  if (!saw_navigation) throw ParseError("config block: missing 'navigation'");
  return c;
}

std::string render_plan_markup(const ParsedPlan& plan) {
  std::ostringstream os;
  os << "```plan\n";
  for (const PlanNode& n : plan.nodes) {
    os << "node " << n.id.value << " | " << to_string(n.kind) << " | " << n.title
       << " | " << n.instruction;
    if (n.role) os << " | role=" << *n.role;
    os << "\n";
  }
  for (const PlanEdge& e : plan.edges) {
    os << "edge " << e.from.value << " -> " << e.to.value << "\n";
  }
  os << "```\n";
  return os.str();
}

std::string render_ops_markup(const std::vector<AtomicOp>& ops) {
  std::ostringstream os;
  os << "```ops\n";
  for (const AtomicOp& op : ops) {
    if (const auto* add = std::get_if<AddNode>(&op)) {
      const PlanNode& n = add->node;
      os << "add_node " << n.id.value << " | " << to_string(n.kind) << " | "
         << n.title << " | " << n.instruction;
      if (n.role) os << " | role=" << *n.role;
      os << "\n";
    } else if (const auto* rem = std::get_if<RemoveNode>(&op)) {
      os << "remove_node " << rem->id.value << "\n";
    } else if (const auto* add = std::get_if<AddEdge>(&op)) {
      os << "add_edge " << add->edge.from.value << " -> " << add->edge.to.value << "\n";
    } else if (const auto* rem = std::get_if<RemoveEdge>(&op)) {
      os << "remove_edge " << rem->edge.from.value << " -> " << rem->edge.to.value << "\n";
    } else if (const auto* mod = std::get_if<ModifyNode>(&op)) {
      os << "modify_node " << mod->id.value;
      if (mod->patch.title) os << " | title=" << *mod->patch.title;
      if (mod->patch.instruction) os << " | instruction=" << *mod->patch.instruction;
      if (mod->patch.role) os << " | role=" << *mod->patch.role;
      if (mod->patch.aux_validated) {
        os << " | aux_validated=" << (*mod->patch.aux_validated ? "true" : "false");
      }
      os << "\n";
    }
  }
  os << "```\n";
  return os.str();
}

std::string render_config_markup(const PlanConfiguration& c) {
  std::ostringstream os;
  os << "```config\n";
  os << "topology = " << to_string(c.topology_kind) << "\n";
  os << "init = " << to_string(c.init.strategy) << "\n";
  os << "triggers = ";
  if (c.adaptation_triggers.empty()) {
    os << "never";
  } else {
    for (std::size_t i = 0; i < c.adaptation_triggers.size(); ++i) {
      const TriggerSpec& t = c.adaptation_triggers[i];
      if (i) os << ", ";
      os << to_string(t.kind);
      if (t.kind == TriggerKind::Periodic || t.kind == TriggerKind::CriticLoop) {
        os << "(" << t.period << ")";
      }
    }
  }
  os << "\n";
  os << "navigation = " << to_string(c.navigation.kind) << "("
     << c.navigation.max_concurrency << ")\n";
  os << "budgets = steps=" << c.budgets.max_steps
     << ", tokens=" << c.budgets.max_total_tokens
     << ", retries=" << c.budgets.max_retries << "\n";
  os << "```\n";
  return os.str();
}

}  // namespace planforge
