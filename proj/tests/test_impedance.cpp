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

#include <cmath>
#include <random>

#include "planforge/impedance.hpp"
#include "test_support.hpp"

using namespace planforge;

namespace {

Trajectory synthetic(long plan_tokens, long exec_tokens, int n_fail, int n_revisions,
                     int n_retries, int n_steps, bool judged = true,
                     bool success = false) {
  Trajectory t;
  t.judged = judged;
  t.success = success;
  t.aggregates.c_plan_tokens = plan_tokens;
  t.aggregates.c_exec_tokens = exec_tokens;
  t.aggregates.c_total_tokens = plan_tokens + exec_tokens;
  t.aggregates.n_fail = n_fail;
  t.aggregates.n_revisions = n_revisions;
  t.aggregates.n_retries = n_retries;
  t.aggregates.n_steps = n_steps;
  return t;
}

/// Extended-precision evaluation used as the independent oracle.
long double oracle(const Trajectory& t, const ImpedanceParams& p) {
  const Aggregates& a = t.aggregates;
  long double churn = static_cast<long double>(a.n_revisions + a.n_retries);
  long double steps = static_cast<long double>(a.n_steps < 1 ? 1 : a.n_steps);
  long double stab = 1.0L - churn / steps;
  if (stab < 0.0L) stab = 0.0L;
  if (stab > 1.0L) stab = 1.0L;
  long double denom = static_cast<long double>(a.c_exec_tokens);
  if (denom < static_cast<long double>(p.exec_epsilon)) {
    denom = static_cast<long double>(p.exec_epsilon);
  }
  long double ratio = static_cast<long double>(a.c_plan_tokens) / denom;
  if (ratio > static_cast<long double>(p.ratio_cap)) {
    ratio = static_cast<long double>(p.ratio_cap);
  }
  long double expo = static_cast<long double>(p.lambda1) * a.n_fail +
                     static_cast<long double>(p.lambda2) * (1.0L - stab) +
                     static_cast<long double>(p.lambda3) * ratio;
  return static_cast<long double>(a.c_total_tokens) * std::exp(expo);
}

}  // namespace

TEST_CASE("stability_score: clean run, churned run, clamped run") {
  CHECK(stability_score(synthetic(0, 0, 0, 0, 0, 5)) == doctest::Approx(1.0));
  CHECK(stability_score(synthetic(0, 0, 0, 2, 1, 10)) == doctest::Approx(0.7));
  CHECK(stability_score(synthetic(0, 0, 0, 9, 9, 5)) == doctest::Approx(0.0));
  // zero steps: the max(1, n_steps) guard
  CHECK(stability_score(synthetic(0, 0, 0, 1, 0, 0)) == doctest::Approx(0.0));
}

TEST_CASE("impedance: zero weights collapse to total cost") {
  ImpedanceParams p;
  p.lambda1 = p.lambda2 = p.lambda3 = 0.0;
  Trajectory t = synthetic(2, 3, 4, 1, 1, 2);
  ImpedanceBreakdown b = impedance(t, p);
  CHECK(b.impedance == doctest::Approx(5.0));
  CHECK(b.exponent == doctest::Approx(0.0));
}

TEST_CASE("impedance: the worked 2e example") {
  // c_tot=2, n_fail=1, s_stab=0.5, ratio=0.25 under weights (0.5, 0.5, 1.0)
  // exponent = 0.5 + 0.25 + 0.25 = 1, impedance = 2e.
  ImpedanceParams p;
  p.lambda1 = 0.5;
  p.lambda2 = 0.5;
  p.lambda3 = 1.0;
  Trajectory t;
  t.aggregates.c_total_tokens = 2;
  t.aggregates.c_plan_tokens = 1;
  t.aggregates.c_exec_tokens = 4;   // ratio 1/4
  t.aggregates.n_fail = 1;
  t.aggregates.n_revisions = 1;
  t.aggregates.n_retries = 1;
  t.aggregates.n_steps = 4;         // stability 1 - 2/4
  ImpedanceBreakdown b = impedance(t, p);
  CHECK(b.s_stab == doctest::Approx(0.5));
  CHECK(b.plan_exec_ratio == doctest::Approx(0.25));
  CHECK(b.exponent == doctest::Approx(1.0));
  CHECK(b.impedance == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-9));
  CHECK(b.impedance == doctest::Approx(5.43656).epsilon(1e-5));
}

TEST_CASE("impedance: ratio cap bites when exec cost is zero") {
  ImpedanceParams p;
  p.ratio_cap = 10.0;
  p.exec_epsilon = 1.0;
  Trajectory t = synthetic(100, 0, 0, 0, 0, 1);
  ImpedanceBreakdown b = impedance(t, p);
  CHECK(b.plan_exec_ratio == doctest::Approx(10.0));
}

TEST_CASE("impedance: negative token counts are a data error") {
  Trajectory t = synthetic(5, 5, 0, 0, 0, 1);
  t.aggregates.c_exec_tokens = -1;
  CHECK_THROWS_AS(impedance(t, ImpedanceParams{}), DataError);
}

TEST_CASE("impedance: lower bound and zero-term equality") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    Trajectory t = synthetic(static_cast<long>(rng() % 1000),
                             static_cast<long>(rng() % 1000),
                             static_cast<int>(rng() % 4),
                             static_cast<int>(rng() % 4),
                             static_cast<int>(rng() % 4),
                             1 + static_cast<int>(rng() % 10));
    ImpedanceParams p;
    ImpedanceBreakdown b = impedance(t, p);
    CHECK(b.impedance >= b.c_tot - 1e-12);
  }
}

TEST_CASE("impedance: monotone in failures, instability, and ratio; linear in c_tot") {
  ImpedanceParams p;
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    long plan = static_cast<long>(rng() % 500);
    long exec = 1 + static_cast<long>(rng() % 500);
    int steps = 1 + static_cast<int>(rng() % 10);
    int fails = static_cast<int>(rng() % 3);
    int revisions = static_cast<int>(rng() % 3);

    Trajectory base = synthetic(plan, exec, fails, revisions, 0, steps);
    double v0 = impedance(base, p).impedance;

    Trajectory more_fail = synthetic(plan, exec, fails + 1, revisions, 0, steps);
    CHECK(impedance(more_fail, p).impedance >= v0);

    Trajectory less_stable = synthetic(plan, exec, fails, revisions + 1, 0, steps);
    CHECK(impedance(less_stable, p).impedance >= v0);

    Trajectory more_planning = synthetic(plan + 50, exec, fails, revisions, 0, steps);
    // nondecreasing ratio term; c_tot also grows, so strictly >=
    CHECK(impedance(more_planning, p).impedance >= v0);
  }
}

TEST_CASE("impedance: scale covariance in token counts") {
  ImpedanceParams p;
  for (long k : {2L, 5L, 10L}) {
    Trajectory a = synthetic(40, 80, 1, 1, 0, 6);
    Trajectory b = synthetic(40 * k, 80 * k, 1, 1, 0, 6);
    double ia = impedance(a, p).impedance;
    double ib = impedance(b, p).impedance;
    // same ratio, same counts-based terms: impedance scales by exactly k
    CHECK(ib == doctest::Approx(static_cast<double>(k) * ia).epsilon(1e-12));
  }
}

TEST_CASE("impedance matches the extended-precision oracle on random trajectories") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> lam(0.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Trajectory t = synthetic(static_cast<long>(rng() % 2000),
                             static_cast<long>(rng() % 2000),
                             static_cast<int>(rng() % 5),
                             static_cast<int>(rng() % 5),
                             static_cast<int>(rng() % 5),
                             static_cast<int>(rng() % 12));
    ImpedanceParams p;
    p.lambda1 = lam(rng);
    p.lambda2 = lam(rng);
    p.lambda3 = lam(rng);
    double got = impedance(t, p).impedance;
    long double want = oracle(t, p);
    long double rel = std::abs(static_cast<long double>(got) - want) /
                      std::max<long double>(want, 1e-30L);
    CHECK(rel < 1e-9L);
  }
}

TEST_CASE("objective: reward minus weighted impedance") {
  ImpedanceParams p;
  p.objective_lambda = 0.0;
  Trajectory win = synthetic(10, 10, 0, 0, 0, 2, true, true);
  CHECK(objective(win, p) == doctest::Approx(1.0));

  // success=false, impedance 5, lambda 0.1 -> -0.5
  p.objective_lambda = 0.1;
  p.lambda1 = p.lambda2 = p.lambda3 = 0.0;
  Trajectory lose = synthetic(2, 3, 0, 0, 0, 1, true, false);
  CHECK(objective(lose, p) == doctest::Approx(-0.5));
}

TEST_CASE("objective: the 1 - 0.2e worked example") {
  ImpedanceParams p;
  p.lambda1 = 0.5;
  p.lambda2 = 0.5;
  p.lambda3 = 1.0;
  p.objective_lambda = 0.1;
  Trajectory t;
  t.judged = true;
  t.success = true;
  t.aggregates.c_total_tokens = 2;
  t.aggregates.c_plan_tokens = 1;
  t.aggregates.c_exec_tokens = 4;
  t.aggregates.n_fail = 1;
  t.aggregates.n_revisions = 1;
  t.aggregates.n_retries = 1;
  t.aggregates.n_steps = 4;
  CHECK(objective(t, p) == doctest::Approx(1.0 - 0.2 * std::exp(1.0)).epsilon(1e-9));
  CHECK(objective(t, p) == doctest::Approx(0.45634).epsilon(1e-4));
}

TEST_CASE("objective: unjudged trajectory is a state error") {
  Trajectory t = synthetic(1, 1, 0, 0, 0, 1, false);
  CHECK_THROWS_AS(objective(t, ImpedanceParams{}), StateError);
}

TEST_CASE("impedance breakdown encodes as a json record") {
  Trajectory t = synthetic(1, 4, 1, 1, 1, 4);
  std::string rec = encode(impedance(t, ImpedanceParams{}));
  CHECK(rec.find("\"impedance\"") != std::string::npos);
  CHECK(rec.find("\"s_stab\"") != std::string::npos);
}
