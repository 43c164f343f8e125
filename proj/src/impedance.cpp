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

#include "planforge/impedance.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace planforge {

double stability_score(const Trajectory& t) {
  const Aggregates& a = t.aggregates;
  double churn = static_cast<double>(a.n_revisions + a.n_retries);
  double steps = static_cast<double>(std::max(1, a.n_steps));
  return std::clamp(1.0 - churn / steps, 0.0, 1.0);
}

ImpedanceBreakdown impedance(const Trajectory& t, const ImpedanceParams& params) {
  const Aggregates& a = t.aggregates;
  if (a.c_total_tokens < 0 || a.c_plan_tokens < 0 || a.c_exec_tokens < 0) {
    throw DataError("negative token counts in trajectory aggregates");
  }
  ImpedanceBreakdown b;
  b.c_tot = static_cast<double>(a.c_total_tokens);
  b.n_fail = a.n_fail;
  b.s_stab = stability_score(t);
  double denom = std::max(static_cast<double>(a.c_exec_tokens), params.exec_epsilon);
  b.plan_exec_ratio =
      std::min(static_cast<double>(a.c_plan_tokens) / denom, params.ratio_cap);
  b.exponent = params.lambda1 * static_cast<double>(b.n_fail) +
               params.lambda2 * (1.0 - b.s_stab) +
               params.lambda3 * b.plan_exec_ratio;
  b.impedance = b.c_tot * std::exp(b.exponent);
  return b;
}

double objective(const Trajectory& t, const ImpedanceParams& params) {
  if (!t.judged) {
    throw StateError("objective requires a judged trajectory");
  }
  double reward = t.success ? 1.0 : 0.0;
  return reward - params.objective_lambda * impedance(t, params).impedance;
}

std::string encode(const ImpedanceBreakdown& b) {
  nlohmann::json j;
  j["c_tot"] = b.c_tot;
  j["n_fail"] = b.n_fail;
  j["s_stab"] = b.s_stab;
  j["plan_exec_ratio"] = b.plan_exec_ratio;
  j["exponent"] = b.exponent;
  j["impedance"] = b.impedance;
  return j.dump();
}

}  // namespace planforge
