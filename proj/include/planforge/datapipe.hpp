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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "planforge/config.hpp"
#include "planforge/executor.hpp"
#include "planforge/impedance.hpp"
#include "planforge/planner.hpp"
#include "planforge/trajectory.hpp"
#include "planforge/world.hpp"

namespace planforge {

// ---------------------------------------------------------------------------
// Contexts and reference exemplars
// ---------------------------------------------------------------------------

struct ReferenceExemplar {
  std::string name;
  std::string encoded_config;  // canonical configuration record
  std::string description;
};

/// The registry entries as reference exemplars, in registry order.
std::vector<ReferenceExemplar> default_reference_pool();

/// Meta-planner input: query, role prompt, generated tool docs, and exactly
/// three reference exemplars sampled without replacement (emitted in pool
/// order).
struct MetaContext {
  std::string query;
  std::string system_prompt;
  std::string tool_docs;
  std::vector<ReferenceExemplar> references;
  std::uint64_t seed = 0;
};

std::string encode(const MetaContext& c);
MetaContext decode_meta_context(const std::string& record);

/// Deterministic given seed; regenerates tool_docs from the live registry.
/// Throws ConfigError when the pool holds fewer than 3 exemplars.
MetaContext build_context(const std::string& query, const std::string& system_prompt,
                          const std::vector<ReferenceExemplar>& pool,
                          std::uint64_t seed);

/// The context rendered as planner input text.
std::string render_context(const MetaContext& c);

// ---------------------------------------------------------------------------
// Candidate synthesis and filtering
// ---------------------------------------------------------------------------

struct SynthesizedCandidate {
  PlanConfiguration config;
  std::string completion;  // raw planner text the config was parsed from
  bool fallback = false;   // unparseable output replaced by the registry fallback
  long tokens_in = 0;
  long tokens_out = 0;
};

/// k independent meta-planner calls, each parsed into a PlanConfiguration.
/// Unparseable outputs are replaced by the registry fallback configuration
/// and flagged; if all k fail, throws ParseError. Requires k >= 2.
std::vector<SynthesizedCandidate> exploratory_synthesis(const MetaContext& context,
                                                        Planner& meta_planner, int k);

struct CandidateResult {
  MetaContext context;
  SynthesizedCandidate candidate;
  Trajectory trajectory;
  ImpedanceBreakdown impedance;
};

/// Keeps the candidates whose trajectory succeeded, order preserved.
/// Throws StateError when a candidate is unjudged.
std::vector<CandidateResult> execution_judge_filter(
    const std::vector<CandidateResult>& candidates);

// ---------------------------------------------------------------------------
// Preference construction
// ---------------------------------------------------------------------------

/// Minimum impedance gap for success-success pairs. Relative mode scales
/// by the winner's impedance (default 0.1 x winner); absolute mode uses
/// `value` directly.
struct GapRule {
  bool relative = true;
  double value = 0.1;

  double threshold(double winner_impedance) const {
    return relative ? value * winner_impedance : value;
  }
};

struct SftRecord {
  MetaContext context;
  std::string target;  // config markup plus the instantiated plan markup
};

struct PreferenceRecord {
  MetaContext context;
  PlanConfiguration winner;
  PlanConfiguration loser;
  double winner_impedance = 0.0;
  double loser_impedance = 0.0;
  bool winner_success = false;
  bool loser_success = false;
  double gap_threshold = 0.0;  // effective delta this pair had to clear
};

/// Throws ValidationError when the record violates the preference
/// invariant (winner succeeded; loser failed or the impedance gap exceeds
/// the recorded threshold).
void validate_preference(const PreferenceRecord& r);

/// Hierarchical pairing over all unordered candidate pairs:
///   success beats failure (always emitted),
///   failure-failure pairs are discarded,
///   success-success pairs are emitted only when the impedance gap is
///   strictly above the rule threshold; lower impedance wins.
std::vector<PreferenceRecord> build_preference_pairs(
    const std::vector<CandidateResult>& candidates, const GapRule& rule);

// ---------------------------------------------------------------------------
// Corpus emission
// ---------------------------------------------------------------------------

using CorpusRecord = std::variant<SftRecord, PreferenceRecord>;

std::string encode(const SftRecord& r);
std::string encode(const PreferenceRecord& r);
SftRecord decode_sft_record(const std::string& record);
PreferenceRecord decode_preference_record(const std::string& record);

/// Writes one corpus file (line-delimited, canonical records) and returns
/// the record count. All records must be the same type or a DataError is
/// thrown; every preference record is re-validated before writing.
std::size_t emit_corpora(const std::vector<CorpusRecord>& records,
                         const std::string& path);

// ---------------------------------------------------------------------------
// Scripted meta planner and the end-to-end pipeline
// ---------------------------------------------------------------------------

/// Deterministic meta planner: call j proposes the registry entry at index
/// (seed + 3*j) mod 7, so any 4 consecutive calls propose 4 distinct
/// paradigms.
class ScriptedMetaPlanner : public Planner {
public:
  explicit ScriptedMetaPlanner(std::uint64_t seed) : seed_(seed) {}

  PlannerReply complete(const std::string& system_prompt,
                        const std::string& context) override;

private:
  std::uint64_t seed_;
  int calls_ = 0;
};

struct PipelineTask {
  std::string id;
  std::string query;
  std::optional<std::string> gold;
};

/// Line-delimited {id, query, gold} task file.
std::vector<PipelineTask> load_tasks(const std::string& path);

struct PipelineParams {
  int k = 4;
  GapRule delta;
  ImpedanceParams impedance;
  AgentSystemSpec agent_spec;
  std::string meta_prompt =
      "You design planning configurations. Study the references and emit "
      "one fenced config block tailored to the query.";
  int jobs = 4;
};

struct PipelineOutput {
  std::vector<CandidateResult> candidates;  // per task, k entries, in order
  std::vector<SftRecord> sft;
  std::vector<PreferenceRecord> pairs;
};

/// Bootstrap-and-filter over a task list with the scripted world and
/// scripted planners: build context, synthesize k candidates, execute and
/// judge each, filter, and pair. Candidate episodes run on a bounded
/// worker pool; outputs are ordered by (task, candidate) regardless of
/// scheduling.
PipelineOutput run_pipeline(const std::vector<PipelineTask>& tasks,
                            const ScriptedWorld& world, std::uint64_t seed,
                            const PipelineParams& params);

}  // namespace planforge
