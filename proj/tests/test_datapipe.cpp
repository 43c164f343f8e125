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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "planforge/codec.hpp"
#include "planforge/datapipe.hpp"
#include "test_support.hpp"

using namespace planforge;
using namespace pftest;

namespace {

CandidateResult candidate(bool success, double imp, const std::string& tag) {
  CandidateResult c;
  c.context.query = "q";
  c.context.seed = 1;
  c.candidate.config = registry_lookup("Flash-Searcher").config;
  c.candidate.completion = "cand-" + tag;
  c.trajectory.judged = true;
  c.trajectory.success = success;
  c.impedance.impedance = imp;
  return c;
}

}  // namespace

TEST_CASE("build_context: pool of exactly three is taken in pool order") {
  std::vector<ReferenceExemplar> pool = {
      {"P1", "cfg1", "d1"}, {"P2", "cfg2", "d2"}, {"P3", "cfg3", "d3"}};
  MetaContext c = build_context("q", "prompt", pool, 99);
  REQUIRE(c.references.size() == 3);
  CHECK(c.references[0].name == "P1");
  CHECK(c.references[1].name == "P2");
  CHECK(c.references[2].name == "P3");
}

TEST_CASE("build_context: pool smaller than three rejected") {
  std::vector<ReferenceExemplar> pool = {{"P1", "c", "d"}, {"P2", "c", "d"}};
  CHECK_THROWS_AS(build_context("q", "p", pool, 0), ConfigError);
}

TEST_CASE("build_context: three distinct references, pool order, seed-dependent") {
  std::vector<ReferenceExemplar> pool = default_reference_pool();
  REQUIRE(pool.size() == 7);
  std::set<std::string> selections;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    MetaContext c = build_context("q", "p", pool, seed);
    REQUIRE(c.references.size() == 3);
    std::set<std::string> names;
    std::vector<std::size_t> positions;
    for (const ReferenceExemplar& r : c.references) {
      names.insert(r.name);
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].name == r.name) positions.push_back(i);
      }
    }
    CHECK(names.size() == 3);  // without replacement
    for (std::size_t i = 1; i < positions.size(); ++i) {
      CHECK(positions[i - 1] < positions[i]);  // emitted in pool order
    }
    std::string key;
    for (const auto& n : names) key += n + "|";
    selections.insert(key);
  }
  CHECK(selections.size() > 1);  // different seeds generally differ
}

TEST_CASE("build_context: same seed, identical encoding") {
  std::vector<ReferenceExemplar> pool = default_reference_pool();
  MetaContext a = build_context("q", "p", pool, 5);
  MetaContext b = build_context("q", "p", pool, 5);
  CHECK(encode(a) == encode(b));
  CHECK(decode_meta_context(encode(a)).query == "q");
}

TEST_CASE("exploratory_synthesis: scripted meta planner cycles distinct paradigms") {
  MetaContext ctx = build_context("q", "p", default_reference_pool(), 0);
  ScriptedMetaPlanner meta(0);
  std::vector<SynthesizedCandidate> cands = exploratory_synthesis(ctx, meta, 4);
  REQUIRE(cands.size() == 4);
  std::set<std::string> encoded;
  for (const SynthesizedCandidate& c : cands) {
    CHECK(!c.fallback);
    encoded.insert(encode(c.config));
  }
  CHECK(encoded.size() == 4);  // stride-3 over 7 entries: all distinct
}

TEST_CASE("exploratory_synthesis: malformed outputs fall back and are flagged") {
  MetaContext ctx = build_context("q", "p", default_reference_pool(), 0);
  CannedPlanner mixed({"no config block",
                       "```config\ntopology = dag\ninit = dependency_parsing\n"
                       "navigation = concurrent_paths(4)\n```\n",
                       "gibberish"});
  std::vector<SynthesizedCandidate> cands = exploratory_synthesis(ctx, mixed, 3);
  REQUIRE(cands.size() == 3);
  CHECK(cands[0].fallback);
  CHECK(!cands[1].fallback);
  CHECK(cands[2].fallback);
  CHECK(cands[0].config == registry_lookup("Flash-Searcher").config);
}

TEST_CASE("exploratory_synthesis: all unparseable is a synthesis error; k >= 2") {
  MetaContext ctx = build_context("q", "p", default_reference_pool(), 0);
  CannedPlanner garbage({"nothing useful"});
  CHECK_THROWS_AS(exploratory_synthesis(ctx, garbage, 3), ParseError);
  ScriptedMetaPlanner meta(0);
  CHECK_THROWS_AS(exploratory_synthesis(ctx, meta, 1), ConfigError);
}

TEST_CASE("execution_judge_filter: keeps successes in order, rejects unjudged") {
  std::vector<CandidateResult> cands = {candidate(true, 1.0, "a"),
                                        candidate(false, 2.0, "b"),
                                        candidate(true, 3.0, "c")};
  std::vector<CandidateResult> kept = execution_judge_filter(cands);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].candidate.completion == "cand-a");
  CHECK(kept[1].candidate.completion == "cand-c");

  CHECK(execution_judge_filter({candidate(false, 1, "x"), candidate(false, 2, "y")})
            .empty());
  std::vector<CandidateResult> all_good = {candidate(true, 1, "p"),
                                           candidate(true, 2, "q")};
  CHECK(execution_judge_filter(all_good).size() == 2);

  CandidateResult unjudged = candidate(true, 1.0, "u");
  unjudged.trajectory.judged = false;
  CHECK_THROWS_AS(execution_judge_filter({unjudged}), StateError);
}

// ---------------------------------------------------------------------------
// Preference pairing
// ---------------------------------------------------------------------------

TEST_CASE("build_preference_pairs: the worked three-candidate example") {
  // {(R=1, I=3.0), (R=1, I=3.5), (R=0, I=1.0)}, absolute delta 0.2
  std::vector<CandidateResult> cands = {candidate(true, 3.0, "c1"),
                                        candidate(true, 3.5, "c2"),
                                        candidate(false, 1.0, "c3")};
  GapRule rule;
  rule.relative = false;
  rule.value = 0.2;
  std::vector<PreferenceRecord> pairs = build_preference_pairs(cands, rule);
  REQUIRE(pairs.size() == 3);
  // (c1 ≻ c2): both succeeded, gap 0.5 > 0.2
  CHECK(pairs[0].winner_impedance == doctest::Approx(3.0));
  CHECK(pairs[0].loser_impedance == doctest::Approx(3.5));
  CHECK(pairs[0].loser_success);
  // (c1 ≻ c3) and (c2 ≻ c3): success beats failure
  CHECK(pairs[1].winner_impedance == doctest::Approx(3.0));
  CHECK(!pairs[1].loser_success);
  CHECK(pairs[2].winner_impedance == doctest::Approx(3.5));
  CHECK(!pairs[2].loser_success);
  for (const PreferenceRecord& p : pairs) validate_preference(p);
}

TEST_CASE("build_preference_pairs: sub-threshold gap emits nothing") {
  GapRule rule;
  rule.relative = false;
  rule.value = 0.2;
  std::vector<CandidateResult> cands = {candidate(true, 3.0, "a"),
                                        candidate(true, 3.1, "b")};
  CHECK(build_preference_pairs(cands, rule).empty());
}

TEST_CASE("build_preference_pairs: both-failed pairs discarded") {
  std::vector<CandidateResult> cands = {candidate(false, 1.0, "a"),
                                        candidate(false, 9.0, "b")};
  CHECK(build_preference_pairs(cands, GapRule{}).empty());
}

TEST_CASE("build_preference_pairs: exhaustive rule table") {
  GapRule rule;
  rule.relative = false;
  rule.value = 0.5;
  // Enumerate success combinations and gap regimes against the hand table.
  struct Case {
    bool s1, s2;
    double i1, i2;
    int expected_pairs;
  };
  const Case table[] = {
      {false, false, 1.0, 9.0, 0},  // noise filtered
      {true, false, 9.0, 1.0, 1},   // success wins regardless of impedance
      {false, true, 1.0, 9.0, 1},
      {true, true, 1.0, 9.0, 1},    // gap 8 > 0.5
      {true, true, 1.0, 1.4, 0},    // gap 0.4 < 0.5
      {true, true, 1.0, 1.5, 0},    // gap exactly delta: strict, no pair
      {true, true, 2.0, 1.0, 1},    // order independent, lower wins
  };
  for (const Case& c : table) {
    std::vector<CandidateResult> cands = {candidate(c.s1, c.i1, "x"),
                                          candidate(c.s2, c.i2, "y")};
    std::vector<PreferenceRecord> pairs = build_preference_pairs(cands, rule);
    CHECK(static_cast<int>(pairs.size()) == c.expected_pairs);
    for (const PreferenceRecord& p : pairs) {
      CHECK(p.winner_success);
      if (p.loser_success) {
        CHECK(p.loser_impedance - p.winner_impedance > rule.value);
        CHECK(p.winner_impedance <= p.loser_impedance);
      }
      validate_preference(p);
    }
  }
}

TEST_CASE("build_preference_pairs: relative delta scales with the winner") {
  GapRule rule;  // relative 0.1 by default
  // winner 10.0: threshold 1.0; loser 10.9 is below it, 11.1 above
  CHECK(build_preference_pairs({candidate(true, 10.0, "a"),
                                candidate(true, 10.9, "b")},
                               rule)
            .empty());
  CHECK(build_preference_pairs({candidate(true, 10.0, "a"),
                                candidate(true, 11.1, "b")},
                               rule)
            .size() == 1);
}

TEST_CASE("validate_preference rejects broken records") {
  PreferenceRecord bad;
  bad.winner_success = false;
  CHECK_THROWS_AS(validate_preference(bad), ValidationError);

  PreferenceRecord thin;
  thin.winner_success = true;
  thin.loser_success = true;
  thin.winner_impedance = 1.0;
  thin.loser_impedance = 1.05;
  thin.gap_threshold = 0.1;
  CHECK_THROWS_AS(validate_preference(thin), ValidationError);
}

// ---------------------------------------------------------------------------
// Corpus emission
// ---------------------------------------------------------------------------

TEST_CASE("emit_corpora: empty corpus, round-trip, mixed-type error") {
  const std::string path = "/tmp/pf_test_corpus.jsonl";
  CHECK(emit_corpora({}, path) == 0);
  CHECK(read_record_lines(path).empty());

  MetaContext ctx = build_context("q", "p", default_reference_pool(), 3);
  std::vector<CorpusRecord> sft_records;
  for (int i = 0; i < 5; ++i) {
    SftRecord r;
    r.context = ctx;
    r.target = "target-" + std::to_string(i);
    sft_records.push_back(r);
  }
  CHECK(emit_corpora(sft_records, path) == 5);
  std::vector<std::string> lines = read_record_lines(path);
  REQUIRE(lines.size() == 5);
  for (int i = 0; i < 5; ++i) {
    SftRecord back = decode_sft_record(lines[i]);
    CHECK(back.target == "target-" + std::to_string(i));
    CHECK(encode(back) == lines[i]);  // re-reading reproduces records exactly
  }

  PreferenceRecord pref;
  pref.context = ctx;
  pref.winner = registry_lookup("OWL").config;
  pref.loser = registry_lookup("Co-Sight").config;
  pref.winner_success = true;
  pref.loser_success = false;
  std::vector<CorpusRecord> mixed = sft_records;
  mixed.push_back(pref);
  CHECK_THROWS_AS(emit_corpora(mixed, path), DataError);

  std::vector<CorpusRecord> prefs = {pref};
  CHECK(emit_corpora(prefs, path) == 1);
  PreferenceRecord back = decode_preference_record(read_record_lines(path)[0]);
  CHECK(back.winner == pref.winner);
  CHECK(back.loser_success == false);
  std::remove(path.c_str());
}

// ---------------------------------------------------------------------------
// End-to-end pipeline
// ---------------------------------------------------------------------------

TEST_CASE("run_pipeline: counts, invariants, and determinism on a small suite") {
  ScriptedWorld world = ScriptedWorld::from_files(PF_DATA_DIR "/world_facts.jsonl");
  std::vector<PipelineTask> tasks = {
      {"t1", "capital of France and currency of Japan", "Paris; Yen"},
      {"t2", "capital of (country of Eiffel Tower)", "Paris"},
      {"t3", "sum of population of Oslo and population of Ottawa", "1700000"},
  };
  PipelineParams params;
  params.k = 4;
  params.agent_spec = tiny_spec();
  params.jobs = 3;

  PipelineOutput out = run_pipeline(tasks, world, 11, params);
  CHECK(out.candidates.size() == 12);

  std::size_t successes = 0;
  for (const CandidateResult& c : out.candidates) {
    CHECK(c.trajectory.judged);
    successes += c.trajectory.success ? 1 : 0;
    // stored impedance recomputed from the stored trajectory must agree
    CHECK(c.impedance.impedance ==
          doctest::Approx(impedance(c.trajectory, params.impedance).impedance));
  }
  CHECK(out.sft.size() == successes);
  for (const SftRecord& r : out.sft) {
    CHECK(r.target.find("```config") != std::string::npos);
    CHECK(r.target.find("```plan") != std::string::npos);
  }
  for (const PreferenceRecord& p : out.pairs) validate_preference(p);
  CHECK(!out.pairs.empty());

  // same seed, same corpora bytes; jobs must not matter
  PipelineParams serial = params;
  serial.jobs = 1;
  PipelineOutput again = run_pipeline(tasks, world, 11, serial);
  REQUIRE(again.sft.size() == out.sft.size());
  for (std::size_t i = 0; i < out.sft.size(); ++i) {
    CHECK(encode(again.sft[i]) == encode(out.sft[i]));
  }
  REQUIRE(again.pairs.size() == out.pairs.size());
  for (std::size_t i = 0; i < out.pairs.size(); ++i) {
    CHECK(encode(again.pairs[i]) == encode(out.pairs[i]));
  }
}

TEST_CASE("load_tasks: schema enforced") {
  const char* path = "/tmp/pf_test_tasks.jsonl";
  {
    std::ofstream f(path);
    f << R"({"id":"a","query":"capital of France","gold":"Paris"})" << "\n";
    f << R"({"id":"b","query":"currency of Japan"})" << "\n";
  }
  std::vector<PipelineTask> tasks = load_tasks(path);
  REQUIRE(tasks.size() == 2);
  CHECK(tasks[0].gold == "Paris");
  CHECK(!tasks[1].gold);
  {
    std::ofstream f(path);
    f << R"({"query":"missing id"})" << "\n";
  }
  CHECK_THROWS_AS(load_tasks(path), SchemaError);
  std::remove(path);
}
