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

#include "planforge/igpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace planforge {

void check_policy(const DiscretePolicy& p) {
  if (p.probs.empty()) {
    throw DataError("policy over an empty plan set");
  }
  double sum = 0.0;
  for (double v : p.probs) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DataError("policy probabilities must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw DataError("policy probabilities must sum to 1");
  }
}

double implicit_reward(double logp_theta, double logp_ref, double beta) {
  if (!(beta > 0.0)) {
    throw DataError("beta must be positive");
  }
  if (!std::isfinite(logp_theta) || !std::isfinite(logp_ref)) {
    throw DataError("log-likelihoods must be finite");
  }
  return beta * (logp_theta - logp_ref);
}

double pair_margin(const PairLikelihoods& pair) {
  return implicit_reward(pair.logp_theta_w, pair.logp_ref_w, pair.beta) -
         implicit_reward(pair.logp_theta_l, pair.logp_ref_l, pair.beta);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double igpo_loss(const std::vector<PairLikelihoods>& pairs) {
  if (pairs.empty()) {
    throw StateError("loss over an empty pair batch");
  }
  double total = 0.0;
  for (const PairLikelihoods& p : pairs) {
    // -log(sigmoid(m)) == softplus(-m)
    total += softplus(-pair_margin(p));
  }
  return total / static_cast<double>(pairs.size());
}

std::pair<double, double> igpo_loss_grad(const PairLikelihoods& pair) {
  double m = pair_margin(pair);
  double s = sigmoid(-m);
  return {-pair.beta * s, pair.beta * s};
}

DiscretePolicy boltzmann_policy(const DiscretePolicy& pi_ref,
                                const std::vector<double>& rewards, double beta) {
  check_policy(pi_ref);
  if (!(beta > 0.0)) {
    throw DataError("beta must be positive");
  }
  if (rewards.size() != pi_ref.probs.size()) {
    throw DataError("rewards and reference policy disagree on plan count");
  }
  // log pi*(i) = log pi_ref(i) + r(i)/beta - logZ, in log space throughout.
  std::vector<double> logw(pi_ref.probs.size(),
                           -std::numeric_limits<double>::infinity());
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pi_ref.probs.size(); ++i) {
    if (pi_ref.probs[i] > 0.0) {
      logw[i] = std::log(pi_ref.probs[i]) + rewards[i] / beta;
      max_logw = std::max(max_logw, logw[i]);
    }
  }
  if (!std::isfinite(max_logw)) {
    throw DataError("reference policy carries no mass");
  }
  double z = 0.0;
  std::vector<double> w(logw.size(), 0.0);
  for (std::size_t i = 0; i < logw.size(); ++i) {
    if (std::isfinite(logw[i])) {
      w[i] = std::exp(logw[i] - max_logw);
      z += w[i];
    }
  }
  DiscretePolicy out;
  out.probs.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.probs[i] = w[i] / z;
  }
  return out;
}

double kl_objective(const DiscretePolicy& pi, const DiscretePolicy& pi_ref,
                    const std::vector<double>& rewards, double beta) {
  check_policy(pi);
  check_policy(pi_ref);
  if (rewards.size() != pi.probs.size() || pi.probs.size() != pi_ref.probs.size()) {
    throw DataError("policy / reward size mismatch");
  }
  double value = 0.0;
  for (std::size_t i = 0; i < pi.probs.size(); ++i) {
    double p = pi.probs[i];
    if (p == 0.0) continue;  // 0 * log 0 := 0
    if (pi_ref.probs[i] == 0.0) {
      throw DataError("policy places mass outside the reference support");
    }
    value += p * rewards[i] - beta * p * std::log(p / pi_ref.probs[i]);
  }
  return value;
}

}  // namespace planforge
