#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "doctest.h"
#include "hetmg/error.hpp"
#include "hetmg/replica.hpp"
#include "hetmg/sim.hpp"

using namespace hetmg;

namespace {

GameConfig canonical(double alpha = 0.4) { return build_config({{1.0, 1.0}}, alpha); }

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no hetmg::Error thrown");
  return Errc::ParseError;
}

SimConfig short_run(std::uint64_t seed = 1) {
  SimConfig s;
  s.n_agents = 64;
  s.transient_steps = 200;
  s.measure_steps = 400;
  s.seed = seed;
  return s;
}

bool same_result(const SimResult& a, const SimResult& b) {
  auto same_est = [](const Estimate& x, const Estimate& y) {
    return x.mean == y.mean && x.std_error == y.std_error;
  };
  if (!same_est(a.sigma2, b.sigma2) || !same_est(a.phi, b.phi)) return false;
  for (std::size_t g = 0; g < a.rho_g.size(); ++g)
    if (!same_est(a.rho_g[g], b.rho_g[g]) || !same_est(a.phi_g[g], b.phi_g[g])) return false;
  for (std::size_t f = 0; f < a.rho_g.size(); ++f)
    for (std::size_t g = 0; g < a.rho_g.size(); ++g)
      if (a.theta(f, g) != b.theta(f, g)) return false;
  return a.m_bar == b.m_bar;
}

}  // namespace

TEST_CASE("group sizes use largest remainders") {
  const auto half = build_config({{0.5, 1.0}, {0.5, 1.0}}, 0.4);
  CHECK(group_sizes(half, 100) == std::vector<std::size_t>{50, 50});
  CHECK(group_sizes(half, 101) == std::vector<std::size_t>{51, 50});
  const auto thirds = build_config({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}, 0.4);
  CHECK(group_sizes(thirds, 10) == std::vector<std::size_t>{4, 3, 3});
  const auto skew = build_config({{0.9, 1.0}, {0.1, 1.0}}, 0.4);
  CHECK(code_of([&] { group_sizes(skew, 3); }) == Errc::GroupEmptyAtThisN);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int k = 0; k < 200; ++k) {
    const auto c = build_config({{u(rng), 1.0}, {u(rng), 1.0}, {u(rng), 1.0}}, 0.4);
    const std::size_t n = 100 + static_cast<std::size_t>(k);
    const auto sizes = group_sizes(c, n);
    std::size_t total = 0;
    for (std::size_t g = 0; g < 3; ++g) {
      total += sizes[g];
      CHECK(std::abs(static_cast<double>(sizes[g]) - c.ratio(g) * static_cast<double>(n)) < 1.0);
    }
    CHECK(total == n);
  }
}

TEST_CASE("simulation configs are validated") {
  const auto c = canonical();
  SimConfig s;
  s.gamma = 0.0;
  CHECK(code_of([&] { validate(c, s); }) == Errc::InvalidSimConfig);
  s = {};
  s.measure_steps = 0;
  CHECK(code_of([&] { validate(c, s); }) == Errc::InvalidSimConfig);
  s = {};
  s.n_agents = 1;
  CHECK(code_of([&] { validate(canonical(0.4), s); }) == Errc::InvalidSimConfig);  // 0.4 patterns
  CHECK(pattern_count(canonical(), 256) == 102);
}

TEST_CASE("strategy tables are deterministic and well formed") {
  const auto c = build_config({{0.3, 0.5}, {0.7, 1.2}}, 0.4);
  SimConfig s = short_run(9);
  auto [t1, g1] = init_game(c, s);
  auto [t2, g2] = init_game(c, s);
  CHECK(t1 == t2);
  s.seed = 10;
  CHECK(!(init_game(c, s).first == t1));

  std::size_t ones = 0, total = 0;
  for (std::size_t mu = 0; mu < t1.patterns(); ++mu)
    for (std::size_t j = 0; j < t1.agents(); ++j) {
      const double om = t1.omega(mu, j), xi = t1.xi(mu, j);
      CHECK(om * xi == 0.0);
      CHECK(std::abs(om) + std::abs(xi) == 1.0);
      ones += t1.action(mu, j, 1) == 1;
      ++total;
    }
  const double share = static_cast<double>(ones) / static_cast<double>(total);
  CHECK(std::abs(share - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(total)));
  CHECK(std::all_of(g1.q.begin(), g1.q.end(), [](double x) { return x == 0.0; }));
  CHECK(t1.group_of(0) == 0);
  CHECK(t1.group_of(t1.agents() - 1) == 1);
}

TEST_CASE("adding agents keeps the strategies of existing ones") {
  const auto small = StrategyTable::random(20, {30}, 4);
  const auto large = StrategyTable::random(20, {50}, 4);
  for (std::size_t mu = 0; mu < 20; ++mu)
    for (std::size_t j = 0; j < 30; ++j) CHECK(small.xi(mu, j) == large.xi(mu, j));
}

TEST_CASE("vanishing learning rate gives unbiased choices") {
  const auto c = canonical();
  SimConfig s = short_run(3);
  s.gamma = 1e-12;
  auto [table, state] = init_game(c, s);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> q(0.0, 50.0);
  for (double& x : state.q) x = q(rng);
  double sum = 0.0;
  std::size_t n = 0;
  for (int t = 0; t < 2000; ++t) {
    draw_choices(state, s);
    for (auto v : state.s) {
      sum += v;
      ++n;
    }
  }
  const double mean = sum / static_cast<double>(n);
  CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("agents with identical strategies never move") {
  // Agent 0 plays the same action under both strategies; agent 1 does not.
  const StrategyTable table(3, {2}, {1, 1, -1, -1, 1, 1}, {1, -1, -1, 1, 1, -1});
  const auto c = canonical(1.5);
  SimConfig s;
  s.gamma = 0.7;
  GameState state;
  state.q = {0.0, 0.0};
  state.s = {1, 1};
  state.rng = SplitMix64(5);
  for (int t = 0; t < 100; ++t) batch_step(state, table, c, s);
  CHECK(state.q[0] == 0.0);
  CHECK(state.q[1] != 0.0);
  CHECK(state.t == 100);
}

TEST_CASE("one batch update matches hand enumeration") {
  // Pattern-major entries; agent 0 then agent 1.
  //   mu=0: a+ = (+1, -1), a- = (-1, -1)  -> omega = (0, -1), xi = (1, 0)
  //   mu=1: a+ = (+1, +1), a- = (+1, -1)  -> omega = (1, 0),  xi = (0, 1)
  const StrategyTable table(2, {1, 1}, {1, -1, 1, 1}, {-1, -1, 1, -1});
  const auto c = build_config({{0.5, 0.5}, {0.5, 2.0}}, 1.0);
  SimConfig s;
  s.gamma = 1.0;
  GameState state;
  state.q = {0.0, 0.0};
  state.s = {1, 1};
  // B^0 = 0.5 (0 + 1) + 2 (-1 + 0) = -1.5 ; B^1 = 0.5 (1 + 0) + 2 (0 + 1) = 2.5
  // dq_0 = -(1 * -1.5 + 0 * 2.5) / 2 = 0.75 ; dq_1 = -(0 * -1.5 + 1 * 2.5) / 2 = -1.25
  apply_choices(state, table, c, s);
  CHECK(state.q[0] == 0.75);
  CHECK(state.q[1] == -1.25);

  state.q = {0.0, 0.0};
  s.impact_weighted_update = true;
  apply_choices(state, table, c, s);
  CHECK(state.q[0] == 0.75 * 0.5);
  CHECK(state.q[1] == -1.25 * 2.0);
}

TEST_CASE("runs are reproducible") {
  const auto c = build_config({{0.5, 0.5}, {0.5, std::sqrt(1.75)}}, 0.4);
  const auto a = run_measure(c, short_run(7));
  const auto b = run_measure(c, short_run(7));
  CHECK(same_result(a, b));
  CHECK(!same_result(a, run_measure(c, short_run(8))));
}

TEST_CASE("outcome and volatility estimators satisfy the exact identity") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> l(0.1, 0.9), i(0.05, 1.0);
  for (int k = 0; k < 6; ++k) {
    const auto c = two_group_config(l(rng), i(rng), 0.6);
    const auto r = run_measure(c, short_run(static_cast<std::uint64_t>(k + 1)));
    double weighted = 0.0;
    for (std::size_t g = 0; g < 2; ++g) weighted += r.realized_ratios[g] * c.impact(g) * r.rho_g[g].mean;
    CHECK(std::abs(weighted + r.sigma2.mean) < 1e-10);
    CHECK(r.sigma2.std_error >= 0.0);
    for (std::size_t g = 0; g < 2; ++g) {
      CHECK(r.phi_g[g].mean >= 0.0);
      CHECK(r.phi_g[g].mean <= 1.0);
      for (double m : r.m_bar[g]) CHECK(std::abs(m) <= 1.0);
    }
  }
}

TEST_CASE("sigma from the mean attendance tracks the Hamiltonian") {
  SimConfig s;
  s.sigma_from_mean = true;
  const auto r = run_measure(canonical(), s);
  auto [table, state] = init_game(canonical(), s);
  const auto min = minimize_hamiltonian(table, canonical(), std::vector<double>(table.agents(), 0.0), 100000, 1e-10);
  // Time-averaged attendance is at least as unpredictable as the exact minimum.
  CHECK(r.sigma2.mean >= min.h / static_cast<double>(table.agents()) - 3.0 * r.sigma2.std_error);
  CHECK(r.sigma2.mean < 0.02);
}

TEST_CASE("canonical game at alpha 0.4 against the replica solution") {
  const auto c = canonical();
  const auto r = run_measure(c, SimConfig{});
  const auto theory = solve(c.with_alpha(r.alpha_effective));
  // Quenched disorder at N = 256 moves sigma^2 by several percent from draw to draw.
  CHECK(std::abs(r.sigma2.mean / theory.sigma2 - 1.0) < 0.15);
  CHECK(std::abs(r.phi.mean - theory.phi) < 0.05);
  CHECK(r.rho_g[0].mean < 0.0);
}

TEST_CASE("smaller impact wins in the symmetric two-group game") {
  const auto c = two_group_config(0.5, 0.5, 0.4);
  for (std::uint64_t seed : {1, 2}) {
    SimConfig s;
    s.seed = seed;
    const auto r = run_measure(c, s);
    CHECK(r.rho_g[0].mean > r.rho_g[1].mean);
    CHECK(r.rho_g[1].mean < 0.0);
  }
}

TEST_CASE("different seeds give different but close estimates") {
  const auto c = canonical();
  SimConfig s1, s2;
  s2.seed = 2;
  const auto a = run_measure(c, s1), b = run_measure(c, s2);
  CHECK(a.sigma2.mean != b.sigma2.mean);
  CHECK(std::abs(a.sigma2.mean - b.sigma2.mean) < 0.05 * a.sigma2.mean);
  CHECK(std::abs(a.phi.mean - b.phi.mean) < 0.05);
}

TEST_CASE("frozen agents drift steadily") {
  SimConfig s;
  s.measure_steps = 40000;
  for (std::uint64_t seed : {1, 2}) {
    s.seed = seed;
    const auto r = run_measure(canonical(), s);
    CHECK(r.phi.mean > 0.5);
    CHECK(r.frozen_monotone_fraction >= 0.95);
  }
}

TEST_CASE("stationary state barely depends on the learning rate") {
  SimConfig slow, fast;
  slow.gamma = 0.05;
  slow.transient_steps = 40000;
  fast.gamma = 0.5;
  const auto a = run_measure(canonical(), slow), b = run_measure(canonical(), fast);
  CHECK(std::abs(a.phi.mean - b.phi.mean) < 0.02);
  CHECK(std::abs(a.sigma2.mean / b.sigma2.mean - 1.0) < 0.10);
}

TEST_CASE("one-agent Hamiltonian has the analytic minimizer") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> coin(0, 1);
  const auto c = canonical(5.0);
  for (int k = 0; k < 50; ++k) {
    const std::size_t P = 5;
    std::vector<std::int8_t> plus(P), minus(P);
    for (std::size_t mu = 0; mu < P; ++mu) {
      plus[mu] = coin(rng) ? 1 : -1;
      minus[mu] = coin(rng) ? 1 : -1;
    }
    const StrategyTable table(P, {1}, plus, minus);
    double ox = 0.0, xx = 0.0;
    for (std::size_t mu = 0; mu < P; ++mu) {
      ox += table.omega(mu, 0) * table.xi(mu, 0);
      xx += table.xi(mu, 0) * table.xi(mu, 0);
    }
    const auto min = minimize_hamiltonian(table, c, std::vector<double>{0.3}, 10000, 1e-12);
    CHECK(min.converged);
    if (xx > 0.0) CHECK(std::abs(min.m[0] - std::clamp(-ox / xx, -1.0, 1.0)) < 1e-8);
    CHECK(min.h == doctest::Approx(hamiltonian(table, c, min.m)).epsilon(1e-14));
  }
}

TEST_CASE("two-agent Hamiltonian matches a grid search") {
  const auto c = build_config({{0.5, 0.6}, {0.5, std::sqrt(2.0 - 0.36)}}, 1.0);
  const StrategyTable tables[] = {
      StrategyTable(2, {1, 1}, {1, -1, 1, 1}, {-1, -1, 1, -1}),
      StrategyTable(2, {1, 1}, {1, 1, -1, 1}, {-1, -1, 1, -1}),
      StrategyTable(2, {1, 1}, {1, -1, -1, 1}, {-1, 1, 1, -1}),
  };
  for (const auto& table : tables) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 2000; ++a)
      for (int b = 0; b <= 2000; ++b) {
        const std::vector<double> m{-1.0 + a * 0.001, -1.0 + b * 0.001};
        best = std::min(best, hamiltonian(table, c, m));
      }
    const auto min = minimize_hamiltonian(table, c, std::vector<double>{0.0, 0.0}, 10000, 1e-12);
    CHECK(min.converged);
    CHECK(std::abs(min.h - best) < 1e-4);
    CHECK(min.h <= best + 1e-12);
  }
}

TEST_CASE("minimizer checks its inputs and reports stationarity") {
  const auto c = canonical();
  SimConfig s;
  s.n_agents = 64;
  auto [table, state] = init_game(c, s);
  CHECK(code_of([&] { minimize_hamiltonian(table, c, std::vector<double>(3, 0.0), 10, 1e-8); }) ==
        Errc::LengthMismatch);
  CHECK(code_of([&] { minimize_hamiltonian(table, c, std::vector<double>(64, 1.5), 10, 1e-8); }) ==
        Errc::InvalidSimConfig);

  const auto capped = minimize_hamiltonian(table, c, std::vector<double>(64, 0.0), 1, 1e-12);
  CHECK(!capped.converged);

  const auto min = minimize_hamiltonian(table, c, std::vector<double>(64, 0.0), 100000, 1e-10);
  REQUIRE(min.converged);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> m(64);
    for (double& x : m) x = u(rng);
    CHECK(hamiltonian(table, c, m) >= min.h - 1e-12);
  }
  // Restarting elsewhere reaches the same minimum value.
  std::vector<double> start(64);
  for (double& x : start) x = u(rng);
  CHECK(minimize_hamiltonian(table, c, start, 100000, 1e-10).h == doctest::Approx(min.h).epsilon(1e-7));
}

TEST_CASE("runs on distinct states can proceed concurrently") {
  const auto c = canonical();
  std::vector<SimResult> parallel(4);
  {
    std::vector<std::jthread> workers;
    for (std::size_t k = 0; k < parallel.size(); ++k)
      workers.emplace_back([&, k] { parallel[k] = run_measure(c, short_run(k + 1)); });
  }
  for (std::size_t k = 0; k < parallel.size(); ++k) CHECK(same_result(parallel[k], run_measure(c, short_run(k + 1))));
}
