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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "planforge/codec.hpp"
#include "planforge/datapipe.hpp"
#include "planforge/executor.hpp"
#include "planforge/igpo.hpp"
#include "planforge/impedance.hpp"
#include "planforge/markup.hpp"
#include "planforge/paradigms.hpp"
#include "planforge/topology.hpp"
#include "planforge/validate.hpp"

namespace pf = planforge;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Manifest: config file + flags resolved into one settings bundle
// ---------------------------------------------------------------------------

struct Settings {
  std::string config_path;
  std::string tasks_path;
  std::string paradigm;
  std::string backend = "scripted";
  std::string judge = "exact";
  std::string out_dir = "out";
  std::string world_path;
  std::string failures_path;
  std::uint64_t seed = 0;
  int jobs = 4;
  bool dry_run = false;
  int k = 4;
  double delta = -1.0;  // >= 0: absolute gap override
  double price_per_1k_tokens = 0.002;
  json config_file;  // raw config-file JSON, when given
};

pf::AgentSystemSpec default_agent_spec() {
  pf::AgentSystemSpec spec;
  spec.roster = {"aggregator", "calculator", "generalist",
                 "orchestrator", "searcher", "verifier"};
  for (const std::string& role : spec.roster) {
    spec.toolset[role] = pf::tool_names();
  }
  spec.context_policy.window_k = 6;
  spec.context_policy.include_summaries = true;
  return spec;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pf::ConfigError("cannot open config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw pf::ConfigError("config file is not valid JSON: " + path);
  return j;
}

void apply_config_file(Settings& s) {
  if (s.config_path.empty()) return;
  s.config_file = load_json_file(s.config_path);
  const json& j = s.config_file;
  if (s.paradigm.empty() && j.contains("paradigm")) {
    s.paradigm = j["paradigm"].get<std::string>();
  }
  if (j.contains("backend")) s.backend = j["backend"].get<std::string>();
  if (j.contains("judge")) s.judge = j["judge"].get<std::string>();
  if (j.contains("world")) s.world_path = j["world"].get<std::string>();
  if (j.contains("failures")) s.failures_path = j["failures"].get<std::string>();
  if (j.contains("price_per_1k_tokens")) {
    s.price_per_1k_tokens = j["price_per_1k_tokens"].get<double>();
  }
}

pf::PlanConfiguration resolve_plan_config(const Settings& s) {
  if (s.paradigm.empty()) {
    throw pf::ConfigError("no paradigm selected (use --paradigm or the config file)");
  }
  pf::PlanConfiguration config = pf::registry_lookup(s.paradigm).config;
  if (s.config_file.contains("budgets")) {
    const json& b = s.config_file["budgets"];
    if (b.contains("max_steps")) config.budgets.max_steps = b["max_steps"].get<int>();
    if (b.contains("max_total_tokens")) {
      config.budgets.max_total_tokens = b["max_total_tokens"].get<long>();
    }
    if (b.contains("max_retries")) {
      config.budgets.max_retries = b["max_retries"].get<int>();
    }
  }
  pf::ValidationReport report = pf::validate_configuration(config);
  if (!report.ok()) {
    throw pf::ConfigError("invalid configuration: " + report.joined());
  }
  return config;
}

pf::ImpedanceParams resolve_impedance(const Settings& s) {
  pf::ImpedanceParams p;
  if (s.config_file.contains("impedance")) {
    const json& j = s.config_file["impedance"];
    if (j.contains("lambda1")) p.lambda1 = j["lambda1"].get<double>();
    if (j.contains("lambda2")) p.lambda2 = j["lambda2"].get<double>();
    if (j.contains("lambda3")) p.lambda3 = j["lambda3"].get<double>();
    if (j.contains("exec_epsilon")) p.exec_epsilon = j["exec_epsilon"].get<double>();
    if (j.contains("ratio_cap")) p.ratio_cap = j["ratio_cap"].get<double>();
    if (j.contains("objective_lambda")) {
      p.objective_lambda = j["objective_lambda"].get<double>();
    }
  }
  return p;
}

pf::ScriptedWorld load_world(const Settings& s) {
  if (s.world_path.empty()) {
    throw pf::ConfigError("no world file configured (config key \"world\")");
  }
  return pf::ScriptedWorld::from_files(s.world_path, s.failures_path);
}

struct TaskOutcome {
  pf::PipelineTask task;
  pf::Trajectory trajectory;
  pf::PlanGraph graph;
  pf::ImpedanceBreakdown impedance;
};

/// Runs every task under one configuration on a bounded worker pool.
/// Results land in task order; only the caller writes files.
std::vector<TaskOutcome> run_tasks(const std::vector<pf::PipelineTask>& tasks,
                                   const pf::PlanConfiguration& config,
                                   const pf::ScriptedWorld& world,
                                   const pf::AgentSystemSpec& spec,
                                   const pf::ImpedanceParams& imp,
                                   const Settings& s) {
  std::unique_ptr<pf::HttpChatClient> chat;
  if (s.backend == "llm" || s.judge == "llm") {
    chat = std::make_unique<pf::HttpChatClient>(pf::HttpChatClient::options_from_env());
  }

  std::vector<TaskOutcome> out(tasks.size());
  unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(std::max(1, s.jobs), tasks.size()));
  std::vector<std::exception_ptr> worker_errors(workers);
  auto work = [&](unsigned tid) {
    try {
    for (std::size_t i = tid; i < tasks.size(); i += workers) {
      const pf::PipelineTask& task = tasks[i];
      std::uint64_t episode_seed = s.seed + i;

      pf::ScriptedPlanner scripted_planner(episode_seed);
      pf::LlmBackendOptions llm_options;
      std::unique_ptr<pf::LlmPlanner> llm_planner;
      std::unique_ptr<pf::ExecBackend> exec;
      pf::BackendBundle bundle;
      if (s.backend == "llm") {
        llm_planner = std::make_unique<pf::LlmPlanner>(*chat, llm_options.model);
        exec = std::make_unique<pf::LlmBackend>(*chat, world, llm_options);
        bundle.planner = llm_planner.get();
      } else {
        exec = std::make_unique<pf::ScriptedBackend>(world, spec);
        bundle.planner = &scripted_planner;
      }
      bundle.exec = exec.get();
      bundle.judge_client = chat.get();

      pf::EngineParams engine;
      engine.concurrent = config.navigation.max_concurrency > 1;
      engine.judge_mode = pf::judge_mode_from_string(s.judge);
      pf::EpisodeResult ep = pf::run_episode(task.query, task.gold, config, spec,
                                             bundle, episode_seed, engine);
      TaskOutcome& slot = out[i];
      slot.task = task;
      slot.impedance = pf::impedance(ep.trajectory, imp);
      slot.trajectory = std::move(ep.trajectory);
      slot.graph = std::move(ep.final_graph);
    }
    } catch (...) {
      worker_errors[tid] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work, t);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : worker_errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

json summarize(const std::vector<TaskOutcome>& outcomes, double price_per_1k) {
  double n = static_cast<double>(outcomes.size());
  double correct = 0, steps = 0, total_tokens = 0, plan_tokens = 0,
         exec_tokens = 0, imp = 0, wall_ms = 0, judge_tokens = 0;
  for (const TaskOutcome& o : outcomes) {
    const pf::Aggregates& a = o.trajectory.aggregates;
    correct += o.trajectory.success ? 1 : 0;
    steps += a.n_steps;
    total_tokens += static_cast<double>(a.c_total_tokens);
    plan_tokens += static_cast<double>(a.c_plan_tokens);
    exec_tokens += static_cast<double>(a.c_exec_tokens);
    imp += o.impedance.impedance;
    for (const pf::TrajectoryEvent& e : o.trajectory.events) {
      wall_ms += static_cast<double>(e.wall_ms);
      if (e.kind == pf::EventKind::Judge) {
        judge_tokens += static_cast<double>(e.tokens_in + e.tokens_out);
      }
    }
  }
  json j;
  j["n_tasks"] = outcomes.size();
  j["accuracy_pct"] = n == 0 ? 0.0 : 100.0 * correct / n;
  j["avg_step"] = n == 0 ? 0.0 : steps / n;
  j["avg_total_tokens"] = n == 0 ? 0.0 : total_tokens / n;
  j["avg_plan_tokens"] = n == 0 ? 0.0 : plan_tokens / n;
  j["avg_exec_tokens"] = n == 0 ? 0.0 : exec_tokens / n;
  j["avg_judge_tokens"] = n == 0 ? 0.0 : judge_tokens / n;
  j["avg_impedance"] = n == 0 ? 0.0 : imp / n;
  j["avg_cost_usd"] = n == 0 ? 0.0 : (total_tokens / n) * price_per_1k / 1000.0;
  j["avg_time_s"] = n == 0 ? 0.0 : (wall_ms / n) / 1000.0;
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_run(const Settings& s) {
  std::vector<pf::PipelineTask> tasks = pf::load_tasks(s.tasks_path);
  pf::PlanConfiguration config = resolve_plan_config(s);
  if (s.dry_run) {
    std::cout << pf::encode(config) << "\n";
    return 0;
  }
  pf::ScriptedWorld world = load_world(s);
  pf::AgentSystemSpec spec = default_agent_spec();
  pf::ImpedanceParams imp = resolve_impedance(s);
  std::vector<TaskOutcome> outcomes = run_tasks(tasks, config, world, spec, imp, s);

  fs::create_directories(s.out_dir);
  for (const TaskOutcome& o : outcomes) {
    pf::write_record_lines(s.out_dir + "/" + o.task.id + ".jsonl",
                           {pf::encode(o.trajectory), pf::encode(o.graph)});
  }
  json summary = summarize(outcomes, s.price_per_1k_tokens);
  summary["paradigm"] = s.paradigm;
  summary["seed"] = s.seed;
  std::ofstream sf(s.out_dir + "/summary.json");
  sf << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_bench(const Settings& s, const std::vector<std::string>& paradigms) {
  if (paradigms.empty()) {
    throw pf::ConfigError("bench needs at least one paradigm");
  }
  std::vector<pf::PipelineTask> tasks = pf::load_tasks(s.tasks_path);
  pf::ScriptedWorld world = load_world(s);
  pf::AgentSystemSpec spec = default_agent_spec();
  pf::ImpedanceParams imp = resolve_impedance(s);

  json rows = json::array();
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %9s %10s %10s %8s %12s", "paradigm",
                "acc_pct", "plan_tok", "exec_tok", "steps", "impedance");
  std::string table = std::string(line) + "\n";
  for (const std::string& name : paradigms) {
    Settings per = s;
    per.paradigm = name;
    pf::PlanConfiguration config = resolve_plan_config(per);
    std::vector<TaskOutcome> outcomes = run_tasks(tasks, config, world, spec, imp, per);
    json row = summarize(outcomes, s.price_per_1k_tokens);
    row["paradigm"] = name;
    rows.push_back(row);
    std::snprintf(line, sizeof(line), "%-16s %9.2f %10.2f %10.2f %8.2f %12.4f",
                  name.c_str(), row["accuracy_pct"].get<double>(),
                  row["avg_plan_tokens"].get<double>(),
                  row["avg_exec_tokens"].get<double>(),
                  row["avg_step"].get<double>(),
                  row["avg_impedance"].get<double>());
    table += std::string(line) + "\n";
  }
  std::cout << table;
  if (!s.out_dir.empty()) {
    fs::create_directories(s.out_dir);
    std::ofstream bf(s.out_dir + "/bench.json");
    bf << rows.dump(2) << "\n";
    std::ofstream tf(s.out_dir + "/bench.txt");
    tf << table;
  }
  return 0;
}

int cmd_dataset(const Settings& s, const std::string& mode) {
  if (mode != "sft" && mode != "igpo") {
    throw pf::ConfigError("dataset mode must be sft or igpo");
  }
  if (s.k < 2) {
    throw pf::ConfigError("dataset construction requires k >= 2");
  }
  std::vector<pf::PipelineTask> tasks = pf::load_tasks(s.tasks_path);
  pf::ScriptedWorld world = load_world(s);

  pf::PipelineParams params;
  params.k = s.k;
  if (s.delta >= 0.0) {
    params.delta.relative = false;
    params.delta.value = s.delta;
  }
  params.impedance = resolve_impedance(s);
  params.agent_spec = default_agent_spec();
  params.jobs = s.jobs;

  pf::PipelineOutput output = pf::run_pipeline(tasks, world, s.seed, params);

  fs::create_directories(s.out_dir);
  std::size_t written = 0;
  if (mode == "sft") {
    std::vector<pf::CorpusRecord> records(output.sft.begin(), output.sft.end());
    written = pf::emit_corpora(records, s.out_dir + "/sft.jsonl");
  } else {
    std::vector<pf::CorpusRecord> records(output.pairs.begin(), output.pairs.end());
    written = pf::emit_corpora(records, s.out_dir + "/igpo.jsonl");
  }

  double imp_sum = 0;
  for (const pf::CandidateResult& c : output.candidates) {
    imp_sum += c.impedance.impedance;
  }
  json summary;
  summary["n_tasks"] = tasks.size();
  summary["n_candidates"] = output.candidates.size();
  summary["n_sft"] = output.sft.size();
  summary["n_pairs"] = output.pairs.size();
  summary["n_written"] = written;
  summary["mean_impedance"] =
      output.candidates.empty() ? 0.0 : imp_sum / output.candidates.size();
  std::ofstream sf(s.out_dir + "/dataset_summary.json");
  sf << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_export_dot(const std::string& input, const std::string& out_path) {
  std::vector<std::string> lines = pf::read_record_lines(input);
  for (const std::string& line : lines) {
    try {
      pf::PlanGraph g = pf::decode_graph(line);
      std::string dot = pf::to_dot(g);
      if (out_path.empty()) {
        std::cout << dot;
      } else {
        std::ofstream of(out_path);
        of << dot;
      }
      return 0;
    } catch (const pf::SchemaError&) {
      continue;
    }
  }
  throw pf::ConfigError("no decodable plan-graph record in " + input);
}

int cmd_paradigms() {
  std::cout << pf::registry_dump_json() << "\n";
  return 0;
}

// Property suite behind `verify-math`; the acceptance tests run the same
// checks with frozen tolerances.
int cmd_verify_math() {
  struct Row {
    std::string name;
    bool pass;
    double max_err;
  };
  std::vector<Row> rows;

  {  // zero-margin loss == ln 2
    pf::PairLikelihoods p;
    p.beta = 1.0;
    double err = std::abs(pf::igpo_loss({p}) - std::log(2.0));
    rows.push_back({"loss(0 margin) = ln 2", err < 1e-12, err});
  }
  {  // gradient vs central finite differences
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> logp(-6.0, 0.0);
    double max_err = 0.0;
    for (double beta : {0.05, 0.1, 1.0}) {
      for (int i = 0; i < 200; ++i) {
        pf::PairLikelihoods p;
        p.logp_theta_w = logp(rng);
        p.logp_ref_w = logp(rng);
        p.logp_theta_l = logp(rng);
        p.logp_ref_l = logp(rng);
        p.beta = beta;
        auto [gw, gl] = pf::igpo_loss_grad(p);
        const double h = 1e-6;
        auto loss_at = [&](double dw, double dl) {
          pf::PairLikelihoods q = p;
          q.logp_theta_w += dw;
          q.logp_theta_l += dl;
          return pf::igpo_loss({q});
        };
        double fw = (loss_at(h, 0) - loss_at(-h, 0)) / (2 * h);
        double fl = (loss_at(0, h) - loss_at(0, -h)) / (2 * h);
        double scale = std::max({std::abs(fw), std::abs(fl), 1e-12});
        max_err = std::max(max_err, std::abs(fw - gw) / scale);
        max_err = std::max(max_err, std::abs(fl - gl) / scale);
      }
    }
    rows.push_back({"grad vs finite differences", max_err < 1e-5, max_err});
  }
  {  // boltzmann beats a coarse grid and matches the grid argmax
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(0.05, 1.0);
    std::uniform_real_distribution<double> rew(-2.0, 2.0);
    bool ok = true;
    double worst_gap = 0.0;
    for (int inst = 0; inst < 10; ++inst) {
      double a = uni(rng), b = uni(rng), c = uni(rng);
      double z = a + b + c;
      pf::DiscretePolicy ref{{a / z, b / z, c / z}};
      std::vector<double> r = {rew(rng), rew(rng), rew(rng)};
      double beta = uni(rng);
      pf::DiscretePolicy star = pf::boltzmann_policy(ref, r, beta);
      double best = pf::kl_objective(star, ref, r, beta);
      const int n = 100;  // 0.01 grid here; the acceptance suite runs 0.001
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n - i; ++j) {
          pf::DiscretePolicy pi{{i / double(n), j / double(n),
                                 (n - i - j) / double(n)}};
          double v = pf::kl_objective(pi, ref, r, beta);
          if (v > best + 1e-9) ok = false;
          worst_gap = std::max(worst_gap, v - best);
        }
      }
    }
    rows.push_back({"boltzmann optimality (0.01 grid)", ok, worst_gap});
  }
  {  // reward-shift invariance
    pf::PairLikelihoods p;
    p.logp_theta_w = -1.0;
    p.logp_ref_w = -2.0;
    p.logp_theta_l = -3.0;
    p.logp_ref_l = -1.5;
    p.beta = 0.1;
    pf::PairLikelihoods q = p;
    q.logp_theta_w += 5.0;
    q.logp_theta_l += 5.0;
    double err = std::abs(pf::igpo_loss({p}) - pf::igpo_loss({q}));
    rows.push_back({"reward-shift invariance", err < 1e-12, err});
  }

  bool all = true;
  std::printf("%-34s %-6s %-12s\n", "check", "status", "max_err");
  for (const Row& r : rows) {
    all = all && r.pass;
    std::printf("%-34s %-6s %.3e\n", r.name.c_str(), r.pass ? "pass" : "FAIL",
                r.max_err);
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plan orchestration engine"};
  app.require_subcommand(1);

  Settings s;
  std::vector<std::string> bench_paradigms;
  std::string dataset_mode = "igpo";
  std::string export_input, export_out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", s.config_path, "config file (JSON)");
    cmd->add_option("--tasks", s.tasks_path, "task file (line-delimited JSON)");
    cmd->add_option("--backend", s.backend, "scripted | llm");
    cmd->add_option("--judge", s.judge, "exact | llm");
    cmd->add_option("--seed", s.seed, "deterministic seed");
    cmd->add_option("--jobs", s.jobs, "worker pool size");
    cmd->add_option("--out", s.out_dir, "output directory");
    cmd->add_option("--world", s.world_path, "world facts file");
    cmd->add_option("--failures", s.failures_path, "failure plan file");
  };

  CLI::App* run = app.add_subcommand("run", "run one paradigm over a task file");
  add_common(run);
  run->add_option("--paradigm", s.paradigm, "paradigm name");
  run->add_flag("--dry-run", s.dry_run, "print the resolved configuration and exit");

  CLI::App* bench = app.add_subcommand("bench", "compare paradigms on one task file");
  add_common(bench);
  bench->add_option("--paradigm", bench_paradigms, "paradigm name (repeatable)");

  CLI::App* dataset = app.add_subcommand("dataset", "build SFT / preference corpora");
  add_common(dataset);
  dataset->add_option("--mode", dataset_mode, "sft | igpo");
  dataset->add_option("--k", s.k, "candidates per query");
  dataset->add_option("--delta", s.delta, "absolute impedance-gap threshold");

  CLI::App* exp = app.add_subcommand("export-dot", "render a plan graph as DOT");
  exp->add_option("input", export_input, "graph or trajectory bundle file")->required();
  exp->add_option("--out", export_out, "output file (default: stdout)");

  CLI::App* verify = app.add_subcommand("verify-math", "run the numeric property suite");
  (void)verify;
  CLI::App* para = app.add_subcommand("paradigms", "dump the paradigm registry as JSON");
  (void)para;

  CLI11_PARSE(app, argc, argv);

  try {
    apply_config_file(s);
    if (run->parsed()) return cmd_run(s);
    if (bench->parsed()) return cmd_bench(s, bench_paradigms);
    if (dataset->parsed()) return cmd_dataset(s, dataset_mode);
    if (exp->parsed()) return cmd_export_dot(export_input, export_out);
    if (verify->parsed()) return cmd_verify_math();
    if (para->parsed()) return cmd_paradigms();
  } catch (const pf::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 2;
  } catch (const pf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
