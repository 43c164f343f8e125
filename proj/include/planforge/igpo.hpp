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

#include <utility>
#include <vector>

#include "planforge/errors.hpp"

namespace planforge {

// Numeric kernel for the preference-alignment math. Pure real-valued
// functions, no model coupling; the CLI's verify-math command and the
// acceptance suite drive the property checks.

/// Log-likelihoods of a (winner, loser) plan pair under the policy and the
/// reference, plus the reward scale beta > 0.
struct PairLikelihoods {
  double logp_theta_w = 0.0;
  double logp_ref_w = 0.0;
  double logp_theta_l = 0.0;
  double logp_ref_l = 0.0;
  double beta = 0.1;
};

/// Distribution over a finite plan set. Probabilities must be nonnegative
/// and sum to 1 within 1e-12.
struct DiscretePolicy {
  std::vector<double> probs;
};

/// Throws DataError if the policy is malformed.
void check_policy(const DiscretePolicy& p);

/// Implicit reward: beta * (logp_theta - logp_ref). Inputs must be finite.
double implicit_reward(double logp_theta, double logp_ref, double beta);

/// Winner-minus-loser implicit-reward margin for one pair.
double pair_margin(const PairLikelihoods& pair);

/// Numerically stable softplus: log(1 + e^x) without overflow.
double softplus(double x);

double sigmoid(double x);

/// Mean over pairs of -log(sigmoid(margin)), computed as softplus(-margin).
/// Throws StateError on an empty batch.
double igpo_loss(const std::vector<PairLikelihoods>& pairs);

/// Analytic gradient of the single-pair loss with respect to
/// (logp_theta_w, logp_theta_l):
///   d/dw = -beta * sigmoid(-margin), d/dl = +beta * sigmoid(-margin).
/// The two components always sum to zero.
std::pair<double, double> igpo_loss_grad(const PairLikelihoods& pair);

/// Closed-form optimum of the KL-regularized objective: the reference
/// distribution tilted by exp(reward / beta), normalized in log space with
/// max subtraction. Zero-probability reference entries stay zero. Throws
/// DataError when the reference carries no mass.
DiscretePolicy boltzmann_policy(const DiscretePolicy& pi_ref,
                                const std::vector<double>& rewards, double beta);

/// Expected reward minus beta-weighted KL against the reference:
///   sum pi*r - beta * sum pi*log(pi/pi_ref), with 0*log 0 := 0.
/// Throws DataError when pi puts mass where pi_ref has none.
double kl_objective(const DiscretePolicy& pi, const DiscretePolicy& pi_ref,
                    const std::vector<double>& rewards, double beta);

}  // namespace planforge
