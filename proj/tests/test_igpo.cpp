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

#include <algorithm>
#include <cmath>
#include <random>

#include "planforge/igpo.hpp"

using namespace planforge;

namespace {

PairLikelihoods pair_with_margin(double margin, double beta = 1.0) {
  // logp_ref both zero, loser at zero: margin = beta * logp_theta_w
  PairLikelihoods p;
  p.beta = beta;
  p.logp_theta_w = margin / beta;
  p.logp_ref_w = 0.0;
  p.logp_theta_l = 0.0;
  p.logp_ref_l = 0.0;
  return p;
}

}  // namespace

TEST_CASE("implicit_reward: identical likelihoods, unit and small beta") {
  CHECK(implicit_reward(-2.0, -2.0, 1.0) == doctest::Approx(0.0));
  CHECK(implicit_reward(-1.0, -2.0, 1.0) == doctest::Approx(1.0));
  CHECK(implicit_reward(-1.0, -2.0, 0.1) == doctest::Approx(0.1));
  CHECK_THROWS_AS(implicit_reward(-1.0, -2.0, 0.0), DataError);
  CHECK_THROWS_AS(implicit_reward(std::nan(""), 0.0, 1.0), DataError);
}

TEST_CASE("igpo_loss: zero margin is ln 2 exactly") {
  PairLikelihoods p;
  p.beta = 1.0;
  CHECK(std::abs(igpo_loss({p}) - std::log(2.0)) < 1e-12);
}

TEST_CASE("igpo_loss: margin two") {
  double loss = igpo_loss({pair_with_margin(2.0)});
  CHECK(loss == doctest::Approx(0.126928).epsilon(1e-5));
  // high precision: softplus(-2)
  CHECK(loss == doctest::Approx(std::log1p(std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("igpo_loss: hugely negative margin does not overflow") {
  double loss = igpo_loss({pair_with_margin(-40.0)});
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(40.0).epsilon(1e-9));

  CHECK(std::isfinite(igpo_loss({pair_with_margin(-700.0)})));
  CHECK(igpo_loss({pair_with_margin(700.0)}) >= 0.0);
}

TEST_CASE("igpo_loss: mean over the batch, empty batch rejected") {
  std::vector<PairLikelihoods> batch = {pair_with_margin(0.0), pair_with_margin(2.0)};
  double expected = 0.5 * (std::log(2.0) + std::log1p(std::exp(-2.0)));
  CHECK(igpo_loss(batch) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(igpo_loss({}), StateError);
}

TEST_CASE("igpo_loss_grad: zero margin gives (-beta/2, +beta/2)") {
  auto [gw, gl] = igpo_loss_grad(pair_with_margin(0.0));
  CHECK(gw == doctest::Approx(-0.5));
  CHECK(gl == doctest::Approx(0.5));
}

TEST_CASE("igpo_loss_grad: margin two") {
  auto [gw, gl] = igpo_loss_grad(pair_with_margin(2.0));
  CHECK(gw == doctest::Approx(-0.119203).epsilon(1e-4));
  CHECK(gl == doctest::Approx(0.119203).epsilon(1e-4));
}

TEST_CASE("igpo_loss_grad: components always cancel") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> logp(-8.0, 0.0);
  for (int i = 0; i < 100; ++i) {
    PairLikelihoods p;
    p.logp_theta_w = logp(rng);
    p.logp_ref_w = logp(rng);
    p.logp_theta_l = logp(rng);
    p.logp_ref_l = logp(rng);
    p.beta = 0.05 + (i % 10) * 0.1;
    auto [gw, gl] = igpo_loss_grad(p);
    CHECK(gw + gl == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("igpo_loss_grad matches central finite differences (200 pairs, 3 betas)") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logp(-6.0, 0.0);
  const double h = 1e-6;
  for (double beta : {0.05, 0.1, 1.0}) {
    for (int i = 0; i < 200; ++i) {
      PairLikelihoods p;
      p.logp_theta_w = logp(rng);
      p.logp_ref_w = logp(rng);
      p.logp_theta_l = logp(rng);
      p.logp_ref_l = logp(rng);
      p.beta = beta;
      auto [gw, gl] = igpo_loss_grad(p);
      auto loss_at = [&](double dw, double dl) {
        PairLikelihoods q = p;
        q.logp_theta_w += dw;
        q.logp_theta_l += dl;
        return igpo_loss({q});
      };
      double fw = (loss_at(h, 0) - loss_at(-h, 0)) / (2 * h);
      double fl = (loss_at(0, h) - loss_at(0, -h)) / (2 * h);
      CHECK(std::abs(fw - gw) / std::max(std::abs(fw), 1e-9) < 1e-5);
      CHECK(std::abs(fl - gl) / std::max(std::abs(fl), 1e-9) < 1e-5);
    }
  }
}

TEST_CASE("sigmoid anti-symmetry: swapping winner and loser flips the margin") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> logp(-6.0, 0.0);
  for (int i = 0; i < 100; ++i) {
    PairLikelihoods p;
    p.logp_theta_w = logp(rng);
    p.logp_ref_w = logp(rng);
    p.logp_theta_l = logp(rng);
    p.logp_ref_l = logp(rng);
    p.beta = 0.1;
    PairLikelihoods swapped;
    swapped.beta = p.beta;
    swapped.logp_theta_w = p.logp_theta_l;
    swapped.logp_ref_w = p.logp_ref_l;
    swapped.logp_theta_l = p.logp_theta_w;
    swapped.logp_ref_l = p.logp_ref_w;
    double m = pair_margin(p);
    CHECK(pair_margin(swapped) == doctest::Approx(-m).epsilon(1e-12));
    CHECK(sigmoid(-m) == doctest::Approx(1.0 - sigmoid(m)).epsilon(1e-12));
  }
}

TEST_CASE("loss is strictly decreasing in margin") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> margins(-20.0, 20.0);
  std::vector<double> ms;
  for (int i = 0; i < 100; ++i) ms.push_back(margins(rng));
  std::sort(ms.begin(), ms.end());
  for (std::size_t i = 1; i < ms.size(); ++i) {
    if (ms[i] == ms[i - 1]) continue;
    CHECK(igpo_loss({pair_with_margin(ms[i])}) <
          igpo_loss({pair_with_margin(ms[i - 1])}));
  }
}

TEST_CASE("reward-shift invariance: common offset changes nothing") {
  PairLikelihoods p;
  p.logp_theta_w = -1.0;
  p.logp_ref_w = -2.0;
  p.logp_theta_l = -3.0;
  p.logp_ref_l = -1.5;
  p.beta = 0.1;
  for (double c : {-3.0, 0.5, 11.0}) {
    PairLikelihoods q = p;
    q.logp_theta_w += c;
    q.logp_theta_l += c;
    CHECK(igpo_loss({q}) == doctest::Approx(igpo_loss({p})).epsilon(1e-12));
    auto [gw0, gl0] = igpo_loss_grad(p);
    auto [gw1, gl1] = igpo_loss_grad(q);
    CHECK(gw1 == doctest::Approx(gw0).epsilon(1e-12));
    CHECK(gl1 == doctest::Approx(gl0).epsilon(1e-12));
  }
}

// ---------------------------------------------------------------------------
// Boltzmann policy and KL objective
// ---------------------------------------------------------------------------

TEST_CASE("boltzmann_policy: constant rewards reproduce the reference") {
  DiscretePolicy ref{{0.5, 0.3, 0.2}};
  DiscretePolicy out = boltzmann_policy(ref, {1.0, 1.0, 1.0}, 0.7);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out.probs[i] == doctest::Approx(ref.probs[i]).epsilon(1e-12));
  }
}

TEST_CASE("boltzmann_policy: the worked three-plan example") {
  DiscretePolicy ref{{0.5, 0.3, 0.2}};
  DiscretePolicy out = boltzmann_policy(ref, {0.0, 1.0, 2.0}, 1.0);
  CHECK(out.probs[0] == doctest::Approx(0.17900).epsilon(1e-4));
  CHECK(out.probs[1] == doctest::Approx(0.29194).epsilon(1e-4));
  CHECK(out.probs[2] == doctest::Approx(0.52906).epsilon(1e-4));
}

TEST_CASE("boltzmann_policy: huge beta flattens the tilt") {
  DiscretePolicy ref{{0.5, 0.3, 0.2}};
  DiscretePolicy out = boltzmann_policy(ref, {1.5, -0.5, 0.25}, 1e6);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(out.probs[i] - ref.probs[i]) < 1e-5);
  }
}

TEST_CASE("boltzmann_policy: zero-mass entries stay zero; no mass is an error") {
  DiscretePolicy ref{{0.0, 0.6, 0.4}};
  DiscretePolicy out = boltzmann_policy(ref, {100.0, 0.0, 0.0}, 1.0);
  CHECK(out.probs[0] == 0.0);
  CHECK(out.probs[1] + out.probs[2] == doctest::Approx(1.0));

  DiscretePolicy bad{{0.5, 0.5}};
  bad.probs = {0.0, 0.0};
  CHECK_THROWS_AS(check_policy(bad), DataError);
}

TEST_CASE("kl_objective: equal policies have zero divergence") {
  DiscretePolicy ref{{0.4, 0.6}};
  CHECK(kl_objective(ref, ref, {0.0, 1.0}, 1.0) == doctest::Approx(0.6));
}

TEST_CASE("kl_objective: the worked two-plan example") {
  DiscretePolicy ref{{0.5, 0.5}};
  DiscretePolicy pi{{0.3, 0.7}};
  double v = kl_objective(pi, ref, {0.0, 1.0}, 1.0);
  CHECK(v == doctest::Approx(0.617718).epsilon(1e-5));
}

TEST_CASE("kl_objective: support violation detected") {
  DiscretePolicy ref{{1.0, 0.0}};
  DiscretePolicy pi{{0.5, 0.5}};
  CHECK_THROWS_AS(kl_objective(pi, ref, {0.0, 0.0}, 1.0), DataError);
  // zero-mass pi entries are fine (0 log 0 := 0)
  DiscretePolicy pi2{{1.0, 0.0}};
  CHECK(kl_objective(pi2, ref, {2.0, 0.0}, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("boltzmann policy maximizes the kl objective over a grid") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> mass(0.05, 1.0);
  std::uniform_real_distribution<double> reward(-2.0, 2.0);
  for (int inst = 0; inst < 10; ++inst) {
    double a = mass(rng), b = mass(rng), c = mass(rng);
    double z = a + b + c;
    DiscretePolicy ref{{a / z, b / z, c / z}};
    std::vector<double> r = {reward(rng), reward(rng), reward(rng)};
    double beta = mass(rng);
    DiscretePolicy star = boltzmann_policy(ref, r, beta);
    double best = kl_objective(star, ref, r, beta);
    const int n = 100;  // the acceptance suite runs the 0.001 grid
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n - i; ++j) {
        DiscretePolicy pi{{i / double(n), j / double(n), (n - i - j) / double(n)}};
        CHECK(kl_objective(pi, ref, r, beta) <= best + 1e-9);
      }
    }
  }
}
