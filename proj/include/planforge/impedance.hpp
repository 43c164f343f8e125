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

#include "planforge/trajectory.hpp"

namespace planforge {

/// Weights and guards for the compound trajectory cost. Defaults are
/// calibrated so each penalty term lands at comparable magnitude on the
/// bundled scripted suite; all of them are config-exposed.
struct ImpedanceParams {
  double lambda1 = 0.5;        // failure-count weight
  double lambda2 = 0.5;        // instability weight
  double lambda3 = 1.0;        // plan/exec ratio weight
  double exec_epsilon = 1.0;   // floor for the exec-token denominator
  double ratio_cap = 10.0;     // upper bound on the plan/exec ratio
  double objective_lambda = 0.1;  // cost weight inside the objective
};

struct ImpedanceBreakdown {
  double c_tot = 0.0;
  int n_fail = 0;
  double s_stab = 0.0;
  double plan_exec_ratio = 0.0;
  double exponent = 0.0;
  double impedance = 0.0;
};

/// Execution smoothness in [0, 1]:
///   1 - (n_revisions + n_retries) / max(1, n_steps), clamped.
double stability_score(const Trajectory& t);

/// Compound cost: c_tot * exp(l1*n_fail + l2*(1 - s_stab) + l3*ratio) with
/// ratio = c_plan / max(c_exec, exec_epsilon), capped at ratio_cap.
/// Always >= c_tot; equals c_tot when every penalty term is zero.
/// Throws DataError on negative token counts.
ImpedanceBreakdown impedance(const Trajectory& t, const ImpedanceParams& params);

/// Execution objective: R - objective_lambda * impedance, with R in {0,1}
/// from the judge verdict. Throws StateError on unjudged trajectories.
double objective(const Trajectory& t, const ImpedanceParams& params);

/// Breakdown as a canonical single-line JSON record.
std::string encode(const ImpedanceBreakdown& b);

}  // namespace planforge
