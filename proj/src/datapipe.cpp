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

#include "planforge/datapipe.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "planforge/codec.hpp"
#include "planforge/markup.hpp"
#include "planforge/paradigms.hpp"

namespace planforge {

using json = nlohmann::json;

std::vector<ReferenceExemplar> default_reference_pool() {
  std::vector<ReferenceExemplar> pool;
  for (const ParadigmEntry& e : paradigm_registry()) {
    pool.push_back({e.name, encode(e.config), e.description});
  }
  return pool;
}

namespace {

json exemplar_to_json(const ReferenceExemplar& r) {
  json j;
  j["name"] = r.name;
  j["encoded_config"] = r.encoded_config;
  j["description"] = r.description;
  return j;
}

ReferenceExemplar exemplar_from_json(const json& j) {
  ReferenceExemplar r;
  r.name = j.at("name").get<std::string>();
  r.encoded_config = j.at("encoded_config").get<std::string>();
  r.description = j.at("description").get<std::string>();
  return r;
}

json context_to_json(const MetaContext& c) {
  json j;
  j["query"] = c.query;
  j["system_prompt"] = c.system_prompt;
  j["tool_docs"] = c.tool_docs;
  json refs = json::array();
  for (const ReferenceExemplar& r : c.references) refs.push_back(exemplar_to_json(r));
  j["references"] = std::move(refs);
  j["seed"] = c.seed;
  return j;
}

MetaContext context_from_json(const json& j) {
  MetaContext c;
  try {
    c.query = j.at("query").get<std::string>();
    c.system_prompt = j.at("system_prompt").get<std::string>();
    c.tool_docs = j.at("tool_docs").get<std::string>();
    for (const json& r : j.at("references")) {
      c.references.push_back(exemplar_from_json(r));
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad meta context: ") + e.what());
  }
  return c;
}

}  // namespace

std::string encode(const MetaContext& c) { return context_to_json(c).dump(); }

MetaContext decode_meta_context(const std::string& record) {
  json j = json::parse(record, nullptr, false);
  if (j.is_discarded()) throw SchemaError("meta context record is not valid JSON");
  return context_from_json(j);
}

MetaContext build_context(const std::string& query, const std::string& system_prompt,
                          const std::vector<ReferenceExemplar>& pool,
                          std::uint64_t seed) {
  if (pool.size() < 3) {
    throw ConfigError("reference pool must hold at least 3 exemplars");
  }
  MetaContext c;
  c.query = query;
  c.system_prompt = system_prompt;
  c.tool_docs = meta_tool_docs();
  c.seed = seed;

  // Sample 3 distinct indices, then emit in pool order.
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < 3; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<std::size_t> chosen(idx.begin(), idx.begin() + 3);
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t i : chosen) c.references.push_back(pool[i]);
  return c;
}

std::string render_context(const MetaContext& c) {
  std::ostringstream os;
  os << "Query: " << c.query << "\n\n";
  os << c.tool_docs << "\n";
  os << "Reference configurations:\n";
  for (const ReferenceExemplar& r : c.references) {
    os << "- " << r.name << ": " << r.description << "\n  " << r.encoded_config
       << "\n";
  }
  return os.str();
}

std::vector<SynthesizedCandidate> exploratory_synthesis(const MetaContext& context,
                                                        Planner& meta_planner,
                                                        int k) {
  if (k < 2) {
    throw ConfigError("exploratory synthesis requires k >= 2");
  }
  const std::string rendered = render_context(context);
  std::vector<SynthesizedCandidate> out;
  int parsed_count = 0;
  for (int i = 0; i < k; ++i) {
    PlannerReply reply = meta_planner.complete(context.system_prompt, rendered);
    SynthesizedCandidate cand;
    cand.completion = reply.text;
    cand.tokens_in = reply.tokens_in;
    cand.tokens_out = reply.tokens_out;
    try {
      cand.config = parse_config_markup(reply.text);
      parsed_count += 1;
    } catch (const ParseError&) {
      cand.config = registry_lookup("Flash-Searcher").config;
      cand.fallback = true;
    }
    out.push_back(std::move(cand));
  }
  if (parsed_count == 0) {
    throw ParseError("all " + std::to_string(k) + " candidate completions were unparseable");
  }
  return out;
}

std::vector<CandidateResult> execution_judge_filter(
    const std::vector<CandidateResult>& candidates) {
  std::vector<CandidateResult> out;
  for (const CandidateResult& c : candidates) {
    if (!c.trajectory.judged) {
      throw StateError("execution filter saw an unjudged candidate");
    }
    if (c.trajectory.success) out.push_back(c);
  }
  return out;
}

void validate_preference(const PreferenceRecord& r) {
  if (!r.winner_success) {
    throw ValidationError("preference record winner did not succeed");
  }
  if (r.loser_success &&
      !(r.loser_impedance - r.winner_impedance > r.gap_threshold)) {
    throw ValidationError(
        "success-success preference record lacks a significant impedance gap");
  }
}

std::vector<PreferenceRecord> build_preference_pairs(
    const std::vector<CandidateResult>& candidates, const GapRule& rule) {
  for (const CandidateResult& c : candidates) {
    if (!c.trajectory.judged) {
      throw StateError("preference construction saw an unjudged candidate");
    }
  }
  std::vector<PreferenceRecord> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      const CandidateResult& a = candidates[i];
      const CandidateResult& b = candidates[j];
      const bool sa = a.trajectory.success;
      const bool sb = b.trajectory.success;
      if (!sa && !sb) continue;  // noise filtering

      const CandidateResult* win = nullptr;
      const CandidateResult* lose = nullptr;
      double threshold = 0.0;
      if (sa != sb) {
        win = sa ? &a : &b;
        lose = sa ? &b : &a;
      } else {
        // Expert tie: lower impedance wins when the gap is significant.
        win = a.impedance.impedance <= b.impedance.impedance ? &a : &b;
        lose = win == &a ? &b : &a;
        threshold = rule.threshold(win->impedance.impedance);
        if (!(lose->impedance.impedance - win->impedance.impedance > threshold)) {
          continue;
        }
      }
      PreferenceRecord rec;
      rec.context = a.context;
      rec.winner = win->candidate.config;
      rec.loser = lose->candidate.config;
      rec.winner_impedance = win->impedance.impedance;
      rec.loser_impedance = lose->impedance.impedance;
      rec.winner_success = win->trajectory.success;
      rec.loser_success = lose->trajectory.success;
      rec.gap_threshold = threshold;
      validate_preference(rec);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::string encode(const SftRecord& r) {
  json j;
  j["context"] = context_to_json(r.context);
  j["target"] = r.target;
  return j.dump();
}

std::string encode(const PreferenceRecord& r) {
  json j;
  j["context"] = context_to_json(r.context);
  j["winner"] = json::parse(encode(r.winner));
  j["loser"] = json::parse(encode(r.loser));
  j["winner_impedance"] = r.winner_impedance;
  j["loser_impedance"] = r.loser_impedance;
  j["winner_success"] = r.winner_success;
  j["loser_success"] = r.loser_success;
  j["gap_threshold"] = r.gap_threshold;
  return j.dump();
}

SftRecord decode_sft_record(const std::string& record) {
  json j = json::parse(record, nullptr, false);
  if (j.is_discarded()) throw SchemaError("sft record is not valid JSON");
  SftRecord r;
  try {
    r.context = context_from_json(j.at("context"));
    r.target = j.at("target").get<std::string>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad sft record: ") + e.what());
  }
  return r;
}

PreferenceRecord decode_preference_record(const std::string& record) {
  json j = json::parse(record, nullptr, false);
  if (j.is_discarded()) throw SchemaError("preference record is not valid JSON");
  PreferenceRecord r;
  try {
    r.context = context_from_json(j.at("context"));
    r.winner = decode_configuration(j.at("winner").dump());
    r.loser = decode_configuration(j.at("loser").dump());
    r.winner_impedance = j.at("winner_impedance").get<double>();
    r.loser_impedance = j.at("loser_impedance").get<double>();
    r.winner_success = j.at("winner_success").get<bool>();
    r.loser_success = j.at("loser_success").get<bool>();
    r.gap_threshold = j.at("gap_threshold").get<double>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad preference record: ") + e.what());
  }
  return r;
}

std::size_t emit_corpora(const std::vector<CorpusRecord>& records,
                         const std::string& path) {
  bool has_sft = false, has_pref = false;
  for (const CorpusRecord& r : records) {
    if (std::holds_alternative<SftRecord>(r)) has_sft = true;
    if (std::holds_alternative<PreferenceRecord>(r)) has_pref = true;
  }
  if (has_sft && has_pref) {
    throw DataError("corpus write mixes sft and preference records");
  }
  std::vector<std::string> lines;
  lines.reserve(records.size());
  for (const CorpusRecord& r : records) {
    if (const SftRecord* s = std::get_if<SftRecord>(&r)) {
      lines.push_back(encode(*s));
    } else {
      const PreferenceRecord& p = std::get<PreferenceRecord>(r);
      validate_preference(p);
      lines.push_back(encode(p));
    }
  }
  write_record_lines(path, lines);
  return lines.size();
}

// ---------------------------------------------------------------------------
// Scripted meta planner and pipeline
// ---------------------------------------------------------------------------

PlannerReply ScriptedMetaPlanner::complete(const std::string& system_prompt,
                                           const std::string& context) {
  const auto& registry = paradigm_registry();
  std::size_t index =
      static_cast<std::size_t>((seed_ + 3 * static_cast<std::uint64_t>(calls_)) %
                               registry.size());
  calls_ += 1;
  const ParadigmEntry& entry = registry[index];
  std::string text = "Proposed configuration (" + entry.name + " pattern):\n" +
                     render_config_markup(entry.config);
  return {text, synthetic_tokens(system_prompt + context), synthetic_tokens(text)};
}

std::vector<PipelineTask> load_tasks(const std::string& path) {
  std::vector<PipelineTask> tasks;
  for (const std::string& line : read_record_lines(path)) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw SchemaError("bad task record: " + line);
    }
    PipelineTask t;
    try {
      t.id = j.at("id").get<std::string>();
      t.query = j.at("query").get<std::string>();
      if (j.contains("gold") && !j["gold"].is_null()) {
        t.gold = j["gold"].get<std::string>();
      }
    } catch (const json::exception&) {
      throw SchemaError("task record needs id/query: " + line);
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

PipelineOutput run_pipeline(const std::vector<PipelineTask>& tasks,
                            const ScriptedWorld& world, std::uint64_t seed,
                            const PipelineParams& params) {
  const std::vector<ReferenceExemplar> pool = default_reference_pool();

  struct Slot {
    MetaContext context;
    SynthesizedCandidate candidate;
    std::optional<std::string> gold;
    std::string query;
    std::uint64_t episode_seed = 0;
  };
  std::vector<Slot> slots;
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const PipelineTask& task = tasks[ti];
    std::uint64_t task_seed = seed + ti;
    MetaContext context =
        build_context(task.query, params.meta_prompt, pool, task_seed);
    ScriptedMetaPlanner meta(task_seed);
    std::vector<SynthesizedCandidate> cands =
        exploratory_synthesis(context, meta, params.k);
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      Slot s;
      s.context = context;
      s.candidate = std::move(cands[ci]);
      s.gold = task.gold;
      s.query = task.query;
      s.episode_seed = task_seed * 1000 + ci;
      slots.push_back(std::move(s));
    }
  }

  // Execute candidate episodes on a bounded pool; results land in fixed
  // slots so scheduling cannot reorder them.
  std::vector<CandidateResult> results(slots.size());
  unsigned jobs = std::max(1, params.jobs);
  unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(jobs, slots.size()));
  std::vector<std::exception_ptr> worker_errors(workers == 0 ? 1 : workers);
  auto work = [&](unsigned tid) {
    try {
    for (std::size_t i = tid; i < slots.size(); i += workers) {
      const Slot& s = slots[i];
      ScriptedPlanner exec_planner(s.episode_seed);
      ScriptedBackend exec(world, params.agent_spec);
      BackendBundle bundle;
      bundle.planner = &exec_planner;
      bundle.exec = &exec;
      EngineParams engine;
      EpisodeResult ep = run_episode(s.query, s.gold, s.candidate.config,
                                     params.agent_spec, bundle, s.episode_seed,
                                     engine);
      CandidateResult r;
      r.context = s.context;
      r.candidate = s.candidate;
      r.impedance = impedance(ep.trajectory, params.impedance);
      r.trajectory = std::move(ep.trajectory);
      results[i] = std::move(r);
    }
    } catch (...) {
      worker_errors[tid] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool_threads;
    for (unsigned tidx = 0; tidx < workers; ++tidx) {
      pool_threads.emplace_back(work, tidx);
    }
    for (std::thread& th : pool_threads) th.join();
  }
  for (const std::exception_ptr& e : worker_errors) {
    if (e) std::rethrow_exception(e);
  }

  PipelineOutput out;
  out.candidates = std::move(results);

  // SFT: successful candidates, target = config markup + instantiated plan.
  for (const CandidateResult& c : execution_judge_filter(out.candidates)) {
    ScriptedPlanner replanner(c.context.seed);
    ParsedPlan plan;
    InitOutcome init =
        initialize_plan(c.context.query, c.candidate.config, replanner, c.context.seed);
    for (const auto& [id, n] : init.graph.nodes) plan.nodes.push_back(n);
    for (const PlanEdge& e : init.graph.edges) plan.edges.push_back(e);
    SftRecord rec;
    rec.context = c.context;
    rec.target = c.candidate.completion + "\n" + render_plan_markup(plan);
    out.sft.push_back(std::move(rec));
  }

  // Preference pairs are built within each task's candidate group.
  std::size_t offset = 0;
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    std::vector<CandidateResult> group(
        out.candidates.begin() + offset,
        out.candidates.begin() + offset + params.k);
    offset += params.k;
    std::vector<PreferenceRecord> pairs = build_preference_pairs(group, params.delta);
    for (PreferenceRecord& p : pairs) out.pairs.push_back(std::move(p));
  }
  return out;
}

}  // namespace planforge
