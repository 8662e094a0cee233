#include "hetmg/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hetmg/error.hpp"

namespace hetmg {
namespace {

constexpr std::uint64_t kStrategyStream = 0x5354524154ULL;  // "STRAT"
constexpr std::uint64_t kChoiceStream = 0x43484f49ULL;      // "CHOI"

Estimate batch_means(std::span<const double> blocks) {
  Estimate e;
  const double n = static_cast<double>(blocks.size());
  e.mean = std::accumulate(blocks.begin(), blocks.end(), 0.0) / n;
  if (blocks.size() > 1) {
    double ss = 0.0;
    for (double b : blocks) ss += (b - e.mean) * (b - e.mean);
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return e;
}

double std_error_of(std::span<const double> blocks) { return batch_means(blocks).std_error; }

// theta_fg from per-agent mean choices: N / (N_f N_g) < Abar_f Abar_g >_mu.
GroupMatrix theta_from_mean(const StrategyTable& table, std::span<const double> m) {
  const std::size_t G = table.groups();
  const std::size_t N = table.agents();
  GroupMatrix theta(G);
  std::vector<double> a(G);
  for (std::size_t mu = 0; mu < table.patterns(); ++mu) {
    const auto om = table.omega_row(mu);
    const auto xi = table.xi_row(mu);
    for (std::size_t g = 0; g < G; ++g) {
      double sum = 0.0;
      const std::size_t begin = table.group_offset(g);
      const std::size_t end = begin + table.group_sizes()[g];
      for (std::size_t j = begin; j < end; ++j) sum += om[j] + m[j] * xi[j];
      a[g] = sum;
    }
    for (std::size_t f = 0; f < G; ++f)
      for (std::size_t g = 0; g < G; ++g) theta(f, g) += a[f] * a[g];
  }
  for (std::size_t f = 0; f < G; ++f)
    for (std::size_t g = 0; g < G; ++g)
      theta(f, g) *= static_cast<double>(N) /
                     (static_cast<double>(table.group_sizes()[f]) *
                      static_cast<double>(table.group_sizes()[g]) * static_cast<double>(table.patterns()));
  return theta;
}

GroupVector frozen_fractions(const StrategyTable& table, std::span<const double> m) {
  GroupVector phi(table.groups(), 0.0);
  for (std::size_t g = 0; g < table.groups(); ++g) {
    const std::size_t begin = table.group_offset(g);
    const std::size_t n = table.group_sizes()[g];
    std::size_t frozen = 0;
    for (std::size_t j = begin; j < begin + n; ++j) frozen += std::abs(m[j]) >= kFrozenThreshold;
    phi[g] = static_cast<double>(frozen) / static_cast<double>(n);
  }
  return phi;
}

}  // namespace

std::vector<std::size_t> group_sizes(const GameConfig& config, std::size_t n_agents) {
  const std::size_t G = config.size();
  std::vector<std::size_t> sizes(G);
  std::vector<double> remainder(G);
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const double exact = config.ratio(g) * static_cast<double>(n_agents);
    sizes[g] = static_cast<std::size_t>(std::floor(exact));
    remainder[g] = exact - std::floor(exact);
    assigned += sizes[g];
  }
  std::vector<std::size_t> order(G);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n_agents; ++k, ++assigned) ++sizes[order[k % G]];
  for (std::size_t g = 0; g < G; ++g)
    if (sizes[g] == 0)
      throw Error(Errc::GroupEmptyAtThisN,
                  "group " + std::to_string(g) + " has no agents at N=" + std::to_string(n_agents));
  return sizes;
}

std::size_t pattern_count(const GameConfig& config, std::size_t n_agents) {
  const double p = std::round(config.alpha() * static_cast<double>(n_agents));
  if (p < 1.0) throw Error(Errc::InvalidSimConfig, "alpha * N rounds to zero patterns");
  return static_cast<std::size_t>(p);
}

void validate(const GameConfig& config, const SimConfig& sim) {
  if (sim.n_agents < config.size())
    throw Error(Errc::InvalidSimConfig, "need at least one agent per group");
  if (sim.measure_steps < 1) throw Error(Errc::InvalidSimConfig, "measure_steps must be >= 1");
  if (!(sim.gamma > 0.0) || !std::isfinite(sim.gamma))
    throw Error(Errc::InvalidSimConfig, "gamma must be positive");
  pattern_count(config, sim.n_agents);
}

StrategyTable::StrategyTable(std::size_t patterns, std::vector<std::size_t> group_sizes,
                             std::vector<std::int8_t> a_plus, std::vector<std::int8_t> a_minus)
    : patterns_(patterns),
      agents_(std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0})),
      sizes_(std::move(group_sizes)),
      a_plus_(std::move(a_plus)),
      a_minus_(std::move(a_minus)) {
  if (a_plus_.size() != patterns_ * agents_ || a_minus_.size() != patterns_ * agents_)
    throw Error(Errc::LengthMismatch, "strategy table size differs from patterns x agents");
  offsets_.resize(sizes_.size());
  std::exclusive_scan(sizes_.begin(), sizes_.end(), offsets_.begin(), std::size_t{0});
  omega_.resize(a_plus_.size());
  xi_.resize(a_plus_.size());
  for (std::size_t k = 0; k < a_plus_.size(); ++k) {
    if (std::abs(a_plus_[k]) != 1 || std::abs(a_minus_[k]) != 1)
      throw Error(Errc::InvalidSimConfig, "strategy entries must be +1 or -1");
    omega_[k] = 0.5 * (a_plus_[k] + a_minus_[k]);
    xi_[k] = 0.5 * (a_plus_[k] - a_minus_[k]);
  }
}

StrategyTable StrategyTable::random(std::size_t patterns, std::vector<std::size_t> group_sizes,
                                    std::uint64_t seed) {
  const std::size_t agents = std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
  std::vector<std::int8_t> plus(patterns * agents), minus(patterns * agents);
  const SplitMix64 root = SplitMix64(seed).split(kStrategyStream);
  std::size_t j = 0;
  for (std::size_t g = 0; g < group_sizes.size(); ++g) {
    const SplitMix64 group_stream = root.split(g);
    for (std::size_t i = 0; i < group_sizes[g]; ++i, ++j) {
      SplitMix64 agent = group_stream.split(i);
      for (std::size_t mu = 0; mu < patterns; ++mu) {
        const std::uint64_t bits = agent();
        plus[mu * agents + j] = (bits & 1U) ? 1 : -1;
        minus[mu * agents + j] = (bits & 2U) ? 1 : -1;
      }
    }
  }
  return StrategyTable(patterns, std::move(group_sizes), std::move(plus), std::move(minus));
}

std::size_t StrategyTable::group_of(std::size_t agent) const {
  if (agent >= agents_) throw Error(Errc::LengthMismatch, "agent index out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), agent);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

int StrategyTable::action(std::size_t mu, std::size_t agent, int s) const {
  const std::size_t k = mu * agents_ + agent;
  return s > 0 ? a_plus_[k] : a_minus_[k];
}

std::vector<double> agent_impacts(const StrategyTable& table, const GameConfig& config) {
  if (table.groups() != config.size())
    throw Error(Errc::LengthMismatch, "strategy table and config disagree on group count");
  std::vector<double> w(table.agents());
  for (std::size_t g = 0; g < table.groups(); ++g)
    std::fill_n(w.begin() + static_cast<std::ptrdiff_t>(table.group_offset(g)), table.group_sizes()[g],
                config.impact(g));
  return w;
}

std::pair<StrategyTable, GameState> init_game(const GameConfig& config, const SimConfig& sim) {
  validate(config, sim);
  const std::size_t patterns = pattern_count(config, sim.n_agents);
  auto table = StrategyTable::random(patterns, group_sizes(config, sim.n_agents), sim.seed);
  GameState state;
  state.q.assign(table.agents(), 0.0);
  state.s.assign(table.agents(), 1);
  state.rng = SplitMix64(sim.seed).split(kChoiceStream);
  return {std::move(table), std::move(state)};
}

std::vector<double> attendance(const StrategyTable& table, std::span<const double> impacts,
                               std::span<const double> c) {
  const std::size_t N = table.agents();
  if (impacts.size() != N || c.size() != N)
    throw Error(Errc::LengthMismatch, "attendance inputs must have one entry per agent");
  std::vector<double> b(table.patterns());
  for (std::size_t mu = 0; mu < table.patterns(); ++mu) {
    const auto om = table.omega_row(mu);
    const auto xi = table.xi_row(mu);
    double sum = 0.0;
    for (std::size_t j = 0; j < N; ++j) sum += impacts[j] * (om[j] + c[j] * xi[j]);
    b[mu] = sum;
  }
  return b;
}

void draw_choices(GameState& state, const SimConfig& sim) {
  for (std::size_t j = 0; j < state.q.size(); ++j) {
    const double p_plus = 0.5 * (1.0 + std::tanh(sim.gamma * state.q[j]));
    state.s[j] = state.rng.uniform() < p_plus ? 1 : -1;
  }
}

namespace {

// -<xi_j B>_mu for every agent, optionally scaled by I_j.
void score_increments(const StrategyTable& table, std::span<const double> impacts,
                      std::span<const double> b, bool impact_weighted, std::vector<double>& out) {
  const std::size_t N = table.agents();
  out.assign(N, 0.0);
  for (std::size_t mu = 0; mu < table.patterns(); ++mu) {
    const auto xi = table.xi_row(mu);
    const double bm = b[mu];
    for (std::size_t j = 0; j < N; ++j) out[j] += xi[j] * bm;
  }
  const double scale = -1.0 / static_cast<double>(table.patterns());
  for (std::size_t j = 0; j < N; ++j) out[j] *= impact_weighted ? scale * impacts[j] : scale;
}

std::vector<double> choices_as_double(const GameState& state) {
  return {state.s.begin(), state.s.end()};
}

}  // namespace

void apply_choices(GameState& state, const StrategyTable& table, const GameConfig& config,
                   const SimConfig& sim) {
  const auto impacts = agent_impacts(table, config);
  const auto b = attendance(table, impacts, choices_as_double(state));
  std::vector<double> dq;
  score_increments(table, impacts, b, sim.impact_weighted_update, dq);
  for (std::size_t j = 0; j < dq.size(); ++j) state.q[j] += dq[j];
  ++state.t;
}

void batch_step(GameState& state, const StrategyTable& table, const GameConfig& config,
                const SimConfig& sim) {
  draw_choices(state, sim);
  apply_choices(state, table, config, sim);
}

SimResult run_measure(const GameConfig& config, const SimConfig& sim) {
  auto [table, state] = init_game(config, sim);
  const std::size_t N = table.agents();
  const std::size_t P = table.patterns();
  const std::size_t G = table.groups();
  const auto impacts = agent_impacts(table, config);

  std::vector<double> c(N), b, dq, m(N);
  // Draws s(t), fills b with B^mu(t) and dq with the score increments.
  auto step = [&] {
    draw_choices(state, sim);
    for (std::size_t j = 0; j < N; ++j) c[j] = state.s[j];
    b = attendance(table, impacts, c);
    score_increments(table, impacts, b, sim.impact_weighted_update, dq);
  };

  for (std::size_t t = 0; t < sim.transient_steps; ++t) {
    step();
    for (std::size_t j = 0; j < N; ++j) state.q[j] += dq[j];
    ++state.t;
  }

  const std::size_t blocks = std::min(kBlocks, sim.measure_steps);
  std::vector<double> sigma_blocks(blocks, 0.0);
  std::vector<std::vector<double>> rho_blocks(G, std::vector<double>(blocks, 0.0));
  std::vector<std::vector<double>> m_blocks(blocks, std::vector<double>(N, 0.0));
  std::vector<std::size_t> block_len(blocks, 0);
  std::vector<double> m_total(N, 0.0);
  // Scores at block boundaries, used for the frozen-agent drift check.
  std::vector<std::vector<double>> q_marks{state.q};
  std::vector<double> omega_b(N);

  for (std::size_t t = 0; t < sim.measure_steps; ++t) {
    const std::size_t blk = t * blocks / sim.measure_steps;
    for (std::size_t j = 0; j < N; ++j) m[j] = std::tanh(sim.gamma * state.q[j]);
    step();

    double b2 = 0.0;
    if (sim.sigma_from_mean) {
      for (double x : attendance(table, impacts, m)) b2 += x * x;
    } else {
      for (double x : b) b2 += x * x;
    }
    sigma_blocks[blk] += b2 / static_cast<double>(P) / static_cast<double>(N);

    // rho_j = -<(omega_j + s_j xi_j) B>_mu; dq already holds -<xi_j B>_mu.
    std::fill(omega_b.begin(), omega_b.end(), 0.0);
    for (std::size_t mu = 0; mu < P; ++mu) {
      const auto om = table.omega_row(mu);
      for (std::size_t j = 0; j < N; ++j) omega_b[j] += om[j] * b[mu];
    }
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t begin = table.group_offset(g);
      const std::size_t n = table.group_sizes()[g];
      double sum = 0.0;
      for (std::size_t j = begin; j < begin + n; ++j) {
        const double xi_b = sim.impact_weighted_update ? dq[j] / impacts[j] : dq[j];
        sum += -omega_b[j] / static_cast<double>(P) + state.s[j] * xi_b;
      }
      rho_blocks[g][blk] += sum / static_cast<double>(n);
    }

    for (std::size_t j = 0; j < N; ++j) {
      m_blocks[blk][j] += m[j];
      m_total[j] += m[j];
      state.q[j] += dq[j];
    }
    ++block_len[blk];
    if ((t + 1) * blocks / sim.measure_steps != blk) q_marks.push_back(state.q);
    ++state.t;
  }

  for (std::size_t k = 0; k < blocks; ++k) {
    const double len = static_cast<double>(block_len[k]);
    sigma_blocks[k] /= len;
    for (std::size_t g = 0; g < G; ++g) rho_blocks[g][k] /= len;
    for (double& x : m_blocks[k]) x /= len;
  }
  for (double& x : m_total) x /= static_cast<double>(sim.measure_steps);

  SimResult r;
  r.n_agents = N;
  r.patterns = P;
  r.alpha_effective = static_cast<double>(P) / static_cast<double>(N);
  r.group_sizes = table.group_sizes();
  for (std::size_t n : r.group_sizes) r.realized_ratios.push_back(static_cast<double>(n) / static_cast<double>(N));
  r.sigma2 = batch_means(sigma_blocks);
  for (std::size_t g = 0; g < G; ++g) r.rho_g.push_back(batch_means(rho_blocks[g]));

  r.theta = theta_from_mean(table, m_total);
  r.theta_std_error = GroupMatrix(G);
  const GroupVector phi_total = frozen_fractions(table, m_total);
  std::vector<GroupMatrix> theta_blocks;
  std::vector<GroupVector> phi_blocks;
  std::vector<double> phi_all_blocks;
  for (std::size_t k = 0; k < blocks; ++k) {
    theta_blocks.push_back(theta_from_mean(table, m_blocks[k]));
    phi_blocks.push_back(frozen_fractions(table, m_blocks[k]));
    double all = 0.0;
    for (std::size_t g = 0; g < G; ++g) all += r.realized_ratios[g] * phi_blocks.back()[g];
    phi_all_blocks.push_back(all);
  }
  std::vector<double> tmp(blocks);
  for (std::size_t f = 0; f < G; ++f)
    for (std::size_t g = 0; g < G; ++g) {
      for (std::size_t k = 0; k < blocks; ++k) tmp[k] = theta_blocks[k](f, g);
      r.theta_std_error(f, g) = std_error_of(tmp);
    }
  double phi_all = 0.0;
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t k = 0; k < blocks; ++k) tmp[k] = phi_blocks[k][g];
    r.phi_g.push_back({phi_total[g], std_error_of(tmp)});
    phi_all += r.realized_ratios[g] * phi_total[g];
  }
  r.phi = {phi_all, std_error_of(phi_all_blocks)};

  r.m_bar.resize(G);
  std::size_t frozen = 0, monotone = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const std::size_t begin = table.group_offset(g);
    r.m_bar[g].assign(m_total.begin() + static_cast<std::ptrdiff_t>(begin),
                      m_total.begin() + static_cast<std::ptrdiff_t>(begin + table.group_sizes()[g]));
  }
  for (std::size_t j = 0; j < N; ++j) {
    if (std::abs(m_total[j]) < kFrozenThreshold) continue;
    ++frozen;
    const double dir = m_total[j] > 0.0 ? 1.0 : -1.0;
    bool strict = true;
    for (std::size_t k = 1; k < q_marks.size(); ++k) strict = strict && dir * (q_marks[k][j] - q_marks[k - 1][j]) > 0.0;
    monotone += strict;
  }
  r.frozen_monotone_fraction =
      frozen ? static_cast<double>(monotone) / static_cast<double>(frozen) : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double hamiltonian(const StrategyTable& table, const GameConfig& config, std::span<const double> m) {
  const auto b = attendance(table, agent_impacts(table, config), m);
  double sum = 0.0;
  for (double x : b) sum += x * x;
  return sum / static_cast<double>(table.patterns());
}

HamiltonianMinimum minimize_hamiltonian(const StrategyTable& table, const GameConfig& config,
                                        std::span<const double> init_m, std::size_t max_iters,
                                        double tol) {
  const std::size_t N = table.agents();
  const std::size_t P = table.patterns();
  if (init_m.size() != N) throw Error(Errc::LengthMismatch, "one initial magnetization per agent");
  for (double x : init_m)
    if (!(x >= -1.0 && x <= 1.0)) throw Error(Errc::InvalidSimConfig, "initial magnetizations must lie in [-1, 1]");
  const auto w = agent_impacts(table, config);

  auto energy = [&](const std::vector<double>& mm, std::vector<double>& b) {
    b = attendance(table, w, mm);
    double s = 0.0;
    for (double x : b) s += x * x;
    return s / static_cast<double>(P);
  };
  auto gradient = [&](const std::vector<double>& b, std::vector<double>& grad) {
    grad.assign(N, 0.0);
    for (std::size_t mu = 0; mu < P; ++mu) {
      const auto xi = table.xi_row(mu);
      for (std::size_t j = 0; j < N; ++j) grad[j] += xi[j] * b[mu];
    }
    for (std::size_t j = 0; j < N; ++j) grad[j] *= 2.0 * w[j] / static_cast<double>(P);
  };
  auto stationary = [&](const std::vector<double>& mm, const std::vector<double>& grad) {
    for (std::size_t j = 0; j < N; ++j) {
      const double projected = std::clamp(mm[j] - grad[j], -1.0, 1.0) - mm[j];
      if (std::abs(projected) >= tol) return false;
    }
    return true;
  };

  HamiltonianMinimum out;
  std::vector<double> m(init_m.begin(), init_m.end()), b, grad, trial(N), b_trial, grad_prev;
  double h = energy(m, b);
  gradient(b, grad);
  // Spectral projected gradient: Barzilai-Borwein step lengths with a
  // nonmonotone Armijo test against the worst of the last few energies.
  constexpr std::size_t kMemory = 10;
  std::vector<double> recent(kMemory, h);
  double lambda = 1.0;
  std::size_t it = 0;
  for (; it < max_iters; ++it) {
    if (stationary(m, grad)) {
      out.converged = true;
      break;
    }
    const double reference = *std::max_element(recent.begin(), recent.end());
    double h_trial = h;
    bool accepted = false;
    double step_scale = 1.0;
    for (int attempt = 0; attempt < 60; ++attempt) {
      double decrease = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        const double target = std::clamp(m[j] - lambda * grad[j], -1.0, 1.0);
        trial[j] = m[j] + step_scale * (target - m[j]);
        decrease += grad[j] * (trial[j] - m[j]);
      }
      h_trial = energy(trial, b_trial);
      if (h_trial <= reference + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      step_scale *= 0.5;
    }
    if (!accepted) break;  // no descent left at double precision
    grad_prev.swap(grad);
    gradient(b_trial, grad);
    double ss = 0.0, sy = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      const double step = trial[j] - m[j];
      ss += step * step;
      sy += step * (grad[j] - grad_prev[j]);
    }
    m.swap(trial);
    b.swap(b_trial);
    h = h_trial;
    recent[it % kMemory] = h;
    lambda = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1e10;
  }
  if (!out.converged) out.converged = stationary(m, grad);
  // Snap agents left a rounding error away from the wall.
  for (std::size_t j = 0; j < N; ++j)
    if (1.0 - std::abs(m[j]) < tol && m[j] * grad[j] < 0.0) m[j] = m[j] > 0.0 ? 1.0 : -1.0;
  out.h = energy(m, b);
  out.m = std::move(m);
  out.iterations = it;
  return out;
}

}  // namespace hetmg
