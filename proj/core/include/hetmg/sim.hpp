#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hetmg/model.hpp"
#include "hetmg/replica.hpp"
#include "hetmg/rng.hpp"

namespace hetmg {

/// Protocol of one batch Monte Carlo run. P is round(alpha * n_agents).
struct SimConfig {
  std::size_t n_agents = 256;
  double gamma = 0.1;  // learning rate
  std::size_t transient_steps = 20000;
  std::size_t measure_steps = 10000;
  std::uint64_t seed = 1;
  bool impact_weighted_update = false;
  /// Measure sigma^2 from the mean attendance (m in place of sampled s).
  bool sigma_from_mean = false;
};

/// Threshold on |time-averaged magnetization| above which an agent counts as frozen.
inline constexpr double kFrozenThreshold = 0.98;
inline constexpr std::size_t kBlocks = 10;

/// Group sizes by the largest-remainder rule. Throws GroupEmptyAtThisN.
std::vector<std::size_t> group_sizes(const GameConfig& config, std::size_t n_agents);
/// round(alpha N); throws InvalidSimConfig when that is zero.
std::size_t pattern_count(const GameConfig& config, std::size_t n_agents);
void validate(const GameConfig& config, const SimConfig& sim);

/// Both strategies of every agent, stored pattern-major: entry (mu, j) for the
/// global agent index j, agents ordered group by group.
class StrategyTable {
public:
  StrategyTable(std::size_t patterns, std::vector<std::size_t> group_sizes,
                std::vector<std::int8_t> a_plus, std::vector<std::int8_t> a_minus);

  /// i.i.d. uniform +-1 entries; agent (g, i) draws from its own substream.
  static StrategyTable random(std::size_t patterns, std::vector<std::size_t> group_sizes,
                              std::uint64_t seed);

  std::size_t patterns() const noexcept { return patterns_; }
  std::size_t agents() const noexcept { return agents_; }
  std::size_t groups() const noexcept { return sizes_.size(); }
  const std::vector<std::size_t>& group_sizes() const noexcept { return sizes_; }
  std::size_t group_offset(std::size_t g) const { return offsets_.at(g); }
  std::size_t group_of(std::size_t agent) const;

  /// a^{mu,s} for s = +1 / -1.
  int action(std::size_t mu, std::size_t agent, int s) const;
  std::span<const double> omega_row(std::size_t mu) const {
    return {omega_.data() + mu * agents_, agents_};
  }
  std::span<const double> xi_row(std::size_t mu) const {
    return {xi_.data() + mu * agents_, agents_};
  }
  double omega(std::size_t mu, std::size_t agent) const { return omega_[mu * agents_ + agent]; }
  double xi(std::size_t mu, std::size_t agent) const { return xi_[mu * agents_ + agent]; }

  bool operator==(const StrategyTable& o) const {
    return patterns_ == o.patterns_ && sizes_ == o.sizes_ && a_plus_ == o.a_plus_ && a_minus_ == o.a_minus_;
  }

private:
  std::size_t patterns_;
  std::size_t agents_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<std::int8_t> a_plus_;
  std::vector<std::int8_t> a_minus_;
  std::vector<double> omega_;
  std::vector<double> xi_;
};

struct GameState {
  std::vector<double> q;       // score differences
  std::vector<std::int8_t> s;  // current strategy choices
  std::size_t t = 0;
  SplitMix64 rng{0};
};

/// Impact of each agent in table order.
std::vector<double> agent_impacts(const StrategyTable& table, const GameConfig& config);

std::pair<StrategyTable, GameState> init_game(const GameConfig& config, const SimConfig& sim);

/// B^mu = sum_j I_j (omega_j^mu + c_j xi_j^mu) with c_j = s_j or m_j.
std::vector<double> attendance(const StrategyTable& table, std::span<const double> impacts,
                               std::span<const double> c);

/// Draws s_j(t) from the current scores.
void draw_choices(GameState& state, const SimConfig& sim);

/// Score update with the choices already in `state.s`; advances t.
void apply_choices(GameState& state, const StrategyTable& table, const GameConfig& config,
                   const SimConfig& sim);

/// One batch step: draw the choices once, then update every score.
void batch_step(GameState& state, const StrategyTable& table, const GameConfig& config,
                const SimConfig& sim);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct SimResult {
  std::size_t n_agents = 0;
  std::size_t patterns = 0;
  double alpha_effective = 0.0;  // P / N
  std::vector<std::size_t> group_sizes;
  GroupVector realized_ratios;  // N_g / N
  Estimate sigma2;
  std::vector<Estimate> rho_g;
  GroupMatrix theta;
  GroupMatrix theta_std_error;
  std::vector<Estimate> phi_g;
  Estimate phi;
  std::vector<std::vector<double>> m_bar;  // [g][i]
  /// Among frozen agents, the share whose score, read at the batch-means block
  /// boundaries, moves strictly in the direction of m_bar. NaN without frozen agents.
  double frozen_monotone_fraction = 0.0;
};

SimResult run_measure(const GameConfig& config, const SimConfig& sim);

/// H = < (sum_j I_j (omega_j + m_j xi_j))^2 >_mu.
double hamiltonian(const StrategyTable& table, const GameConfig& config, std::span<const double> m);

struct HamiltonianMinimum {
  std::vector<double> m;  // table order
  double h = 0.0;
  std::size_t iterations = 0;
  bool converged = false;  // false: max_iters hit, best iterate returned
};

/// Minimizes H over the box [-1, 1]^N. H is convex, so the minimum value is
/// unique; the minimizer may not be when P < N. Converged when every agent has
/// |clamp(m - dH/dm) - m| < tol.
HamiltonianMinimum minimize_hamiltonian(const StrategyTable& table, const GameConfig& config,
                                        std::span<const double> init_m, std::size_t max_iters,
                                        double tol);

}  // namespace hetmg
