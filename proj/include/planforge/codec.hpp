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

#include <string>
#include <vector>

#include "planforge/config.hpp"
#include "planforge/plan.hpp"
#include "planforge/trajectory.hpp"

namespace planforge {

// Canonical single-line JSON records: keys sorted, all fields present
// (null for unset optionals), nodes sorted by id and edges by (from, to).
// Byte equality of two encodings therefore implies value equality.
// Schemas are documented in docs/formats.md.

std::string encode(const PlanGraph& g);
std::string encode(const PlanConfiguration& c);
std::string encode(const Trajectory& t);
std::string encode(const AgentSystemSpec& s);

// Decoders throw SchemaError naming the first offending field.
PlanGraph decode_graph(const std::string& record);
PlanConfiguration decode_configuration(const std::string& record);
Trajectory decode_trajectory(const std::string& record);
AgentSystemSpec decode_agent_spec(const std::string& record);

/// Reads a line-delimited record file, skipping blank lines.
std::vector<std::string> read_record_lines(const std::string& path);

/// Writes records one per line (trailing newline included).
void write_record_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace planforge
