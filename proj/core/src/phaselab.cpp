#include "hetmg/phaselab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <exception>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "hetmg/error.hpp"

namespace hetmg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLambdaLo = 0.01, kLambdaHi = 0.99;
constexpr double kImpactLo = 0.01, kImpactHi = 1.0;

unsigned thread_count(unsigned requested, std::size_t work) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

// Runs fn(k) for k in [0, count); each index writes only its own output slot.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  const unsigned n = thread_count(threads, count);
  if (n <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n);
  for (unsigned t = 0; t < n; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = t; k < count; k += n) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] > v[k - 1])) return false;
  return true;
}

double z_score(double diff, double se) {
  if (se > 0.0) return diff / se;
  if (diff == 0.0) return 0.0;
  return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::ordered_json vector_json(const std::vector<double>& v) {
  auto a = nlohmann::ordered_json::array();
  for (double x : v) a.push_back(number_or_null(x));
  return a;
}

nlohmann::ordered_json matrix_json(const GroupMatrix& m) {
  auto a = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < m.size(); ++f) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < m.size(); ++g) row.push_back(number_or_null(m(f, g)));
    a.push_back(row);
  }
  return a;
}

}  // namespace

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  // Hundredth grids come out exact as k / 100.
  const double lo100 = lo * 100.0, hi100 = hi * 100.0;
  const bool hundredths = std::abs(lo100 - std::round(lo100)) < 1e-9 &&
                          std::abs(hi100 - std::round(hi100)) < 1e-9 &&
                          static_cast<std::size_t>(std::llround(hi100 - lo100)) == n - 1;
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (hundredths)
      grid[k] = (std::round(lo100) + static_cast<double>(k)) / 100.0;
    else
      grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return grid;
}

std::vector<double> default_lambda1_grid() { return linear_grid(kLambdaLo, kLambdaHi, 99); }
std::vector<double> default_impact1_grid() { return linear_grid(kImpactLo, kImpactHi, 100); }

void SweepSpec::validate() const {
  if (!(alpha > 0.0)) throw Error(Errc::InvalidSweep, "alpha must be positive");
  if (lambda1_grid.empty() || impact1_grid.empty()) throw Error(Errc::InvalidSweep, "grids must be nonempty");
  if (!strictly_increasing(lambda1_grid) || !strictly_increasing(impact1_grid))
    throw Error(Errc::InvalidSweep, "grids must be strictly increasing");
  if (!(lambda1_grid.front() > 0.0 && lambda1_grid.back() < 1.0))
    throw Error(Errc::InvalidSweep, "lambda1 grid must lie inside (0, 1)");
  if (!(impact1_grid.front() >= kImpactLo && impact1_grid.back() <= kImpactHi))
    throw Error(Errc::InvalidSweep, "impact1 grid must lie inside [0.01, 1]");
}

SweepRow evaluate_point(double lambda1, double impact1, double alpha,
                        const std::vector<UtilitySpec>& utilities) {
  const GameConfig config = two_group_config(lambda1, impact1, alpha);
  const CriticalPoint cp = critical_point(config);
  SweepRow row{lambda1, impact1, config.impact(1), cp.alpha_c, kNaN, kNaN, kNaN, kNaN, kNaN,
               kNaN,    kNaN,    kNaN,             kNaN,       kNaN, kNaN, {},   false};
  row.profits.assign(utilities.size(), kNaN);
  if (alpha < cp.alpha_c - kCriticalSlack) {
    row.nonergodic = true;
    return row;
  }
  const ReplicaSolution s = solve(config);
  row.zeta = s.zeta;
  row.sigma2 = s.sigma2;
  row.rho = s.rho;
  row.rho_1 = s.rho_g[0];
  row.rho_2 = s.rho_g[1];
  row.theta_11 = s.theta(0, 0);
  row.theta_12 = s.theta(0, 1);
  row.theta_22 = s.theta(1, 1);
  row.phi = s.phi;
  row.phi_1 = s.phi_g[0];
  row.phi_2 = s.phi_g[1];
  for (std::size_t u = 0; u < utilities.size(); ++u)
    row.profits[u] = profit(config, s.rho_g, utilities[u]).overall;
  return row;
}

std::vector<SweepRow> sweep(const SweepSpec& spec) {
  spec.validate();
  const std::size_t ni = spec.impact1_grid.size();
  const std::size_t count = spec.lambda1_grid.size() * ni;
  std::vector<SweepRow> rows(count);
  parallel_for(count, spec.threads, [&](std::size_t k) {
    rows[k] = evaluate_point(spec.lambda1_grid[k / ni], spec.impact1_grid[k % ni], spec.alpha, spec.utilities);
  });
  return rows;
}

std::vector<CriticalCell> critical_surface(const std::vector<double>& lambda1_grid,
                                           const std::vector<double>& impact1_grid, unsigned threads) {
  SweepSpec spec;
  spec.lambda1_grid = lambda1_grid;
  spec.impact1_grid = impact1_grid;
  spec.validate();
  const std::size_t ni = impact1_grid.size();
  std::vector<CriticalCell> cells(lambda1_grid.size() * ni);
  parallel_for(cells.size(), threads, [&](std::size_t k) {
    const double l = lambda1_grid[k / ni], i = impact1_grid[k % ni];
    cells[k] = {l, i, critical_point(two_group_config(l, i, 1.0)).alpha_c};
  });
  return cells;
}

MaxProfit find_max_profit(const UtilitySpec& utility, double alpha, const MaxProfitSearch& search) {
  const std::vector<UtilitySpec> utilities{utility};
  auto best_on = [&](const std::vector<double>& lg, const std::vector<double>& ig) {
    SweepSpec spec;
    spec.alpha = alpha;
    spec.lambda1_grid = lg;
    spec.impact1_grid = ig;
    spec.utilities = utilities;
    const auto rows = sweep(spec);
    std::optional<MaxProfit> best;
    // Rows come lambda-major, impact-minor; strict > keeps the first of ties.
    for (const auto& r : rows) {
      if (r.nonergodic) continue;
      if (!best || r.profits[0] > best->profit) best = MaxProfit{r.lambda1, r.impact1, r.profits[0]};
    }
    return best;
  };

  std::vector<double> lg = linear_grid(kLambdaLo, kLambdaHi, search.lambda1_points);
  std::vector<double> ig = linear_grid(kImpactLo, kImpactHi, search.impact1_points);
  auto best = best_on(lg, ig);
  if (!best) throw Error(Errc::AllNonErgodic, "no ergodic grid point at this alpha");
  double dl = lg.size() > 1 ? lg[1] - lg[0] : 0.0;
  double di = ig.size() > 1 ? ig[1] - ig[0] : 0.0;
  for (int level = 0; level < search.refinements; ++level) {
    auto local = [](double centre, double step, double lo, double hi) {
      std::vector<double> g;
      for (int k = -10; k <= 10; ++k) {
        const double v = centre + step * k / 10.0;
        if (v >= lo - 1e-12 && v <= hi + 1e-12) g.push_back(std::clamp(v, lo, hi));
      }
      g.erase(std::unique(g.begin(), g.end()), g.end());
      return g;
    };
    const auto refined = best_on(local(best->lambda1, dl, kLambdaLo, kLambdaHi),
                                 local(best->impact1, di, kImpactLo, kImpactHi));
    if (refined && refined->profit > best->profit) best = refined;
    dl /= 10.0;
    di /= 10.0;
  }
  return *best;
}

Comparison compare(const GameConfig& config, const SimConfig& sim) {
  const CriticalPoint cp = critical_point(config);
  if (config.alpha() < cp.alpha_c - kCriticalSlack)
    throw Error(Errc::NonErgodic, "alpha is below alpha_c; the replica theory does not apply");
  Comparison c;
  c.alpha = config.alpha();
  c.alpha_effective = static_cast<double>(pattern_count(config, sim.n_agents)) /
                      static_cast<double>(sim.n_agents);
  c.theory = solve(config.with_alpha(c.alpha_effective));
  c.simulated = run_measure(config, sim);

  auto add = [&](std::string name, double theory, Estimate e) {
    c.entries.push_back({std::move(name), theory, e.mean, e.std_error, z_score(e.mean - theory, e.std_error)});
  };
  add("sigma2", c.theory.sigma2, c.simulated.sigma2);
  add("phi", c.theory.phi, c.simulated.phi);
  const std::size_t G = config.size();
  for (std::size_t g = 0; g < G; ++g) add("rho_" + std::to_string(g + 1), c.theory.rho_g[g], c.simulated.rho_g[g]);
  for (std::size_t g = 0; g < G; ++g) add("phi_" + std::to_string(g + 1), c.theory.phi_g[g], c.simulated.phi_g[g]);
  for (std::size_t f = 0; f < G; ++f)
    for (std::size_t g = f; g < G; ++g)
      add("theta_" + std::to_string(f + 1) + std::to_string(g + 1), c.theory.theta(f, g),
          {c.simulated.theta(f, g), c.simulated.theta_std_error(f, g)});
  c.max_abs_z = 0.0;
  for (const auto& e : c.entries) c.max_abs_z = std::max(c.max_abs_z, std::abs(e.z));
  return c;
}

std::string format_number(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string> sweep_columns(const std::vector<UtilitySpec>& utilities) {
  std::vector<std::string> cols{"lambda1", "impact1", "impact2", "alpha_c", "zeta",     "sigma2",
                                "rho",     "rho_1",   "rho_2",   "theta_11", "theta_12", "theta_22",
                                "phi",     "phi_1",   "phi_2"};
  for (const auto& u : utilities) cols.push_back(u.column_name());
  cols.push_back("nonergodic");
  return cols;
}

Table to_table(const std::vector<SweepRow>& rows, const std::vector<UtilitySpec>& utilities) {
  Table t;
  t.columns = sweep_columns(utilities);
  for (const auto& r : rows) {
    std::vector<double> v{r.lambda1, r.impact1,  r.impact2,  r.alpha_c,  r.zeta, r.sigma2, r.rho, r.rho_1,
                          r.rho_2,   r.theta_11, r.theta_12, r.theta_22, r.phi,  r.phi_1,  r.phi_2};
    v.insert(v.end(), r.profits.begin(), r.profits.end());
    v.push_back(r.nonergodic ? 1.0 : 0.0);
    t.rows.push_back(std::move(v));
  }
  return t;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                     const std::vector<UtilitySpec>& utilities) {
  const Table t = to_table(rows, utilities);
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
}

std::size_t Table::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(Errc::UnknownColumn, "no column named '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) return t;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size())
      throw Error(Errc::ParseError, "row has " + std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(t.columns.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      if (c.empty()) {
        row.push_back(kNaN);
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size()) throw Error(Errc::ParseError, "bad number '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

nlohmann::ordered_json to_json(const ReplicaSolution& s) {
  nlohmann::ordered_json j;
  j["alpha"] = s.alpha;
  j["zeta"] = s.zeta;
  j["q"] = vector_json(s.q);
  j["h_per_agent"] = s.h_per_agent;
  j["theta"] = matrix_json(s.theta);
  j["theta_g"] = vector_json(s.theta_g);
  j["rho_g"] = vector_json(s.rho_g);
  j["rho"] = s.rho;
  j["sigma2"] = s.sigma2;
  j["phi_g"] = vector_json(s.phi_g);
  j["phi"] = s.phi;
  j["chi"] = number_or_null(s.chi);
  return j;
}

nlohmann::ordered_json to_json(const CriticalPoint& cp) {
  return {{"zeta_c", cp.zeta_c}, {"alpha_c", cp.alpha_c}};
}

nlohmann::ordered_json to_json(const SimResult& r) {
  auto est = [](const Estimate& e) {
    return nlohmann::ordered_json{{"mean", number_or_null(e.mean)}, {"std_error", number_or_null(e.std_error)}};
  };
  nlohmann::ordered_json j;
  j["n_agents"] = r.n_agents;
  j["patterns"] = r.patterns;
  j["alpha_effective"] = r.alpha_effective;
  j["group_sizes"] = r.group_sizes;
  j["sigma2"] = est(r.sigma2);
  j["rho_g"] = nlohmann::ordered_json::array();
  for (const auto& e : r.rho_g) j["rho_g"].push_back(est(e));
  j["theta"] = matrix_json(r.theta);
  j["theta_std_error"] = matrix_json(r.theta_std_error);
  j["phi_g"] = nlohmann::ordered_json::array();
  for (const auto& e : r.phi_g) j["phi_g"].push_back(est(e));
  j["phi"] = est(r.phi);
  j["frozen_monotone_fraction"] = number_or_null(r.frozen_monotone_fraction);
  j["m_bar"] = nlohmann::ordered_json::array();
  for (const auto& g : r.m_bar) j["m_bar"].push_back(vector_json(g));
  return j;
}

nlohmann::ordered_json to_json(const Comparison& c) {
  nlohmann::ordered_json j;
  j["alpha"] = c.alpha;
  j["alpha_effective"] = c.alpha_effective;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : c.entries)
    j["entries"].push_back({{"name", e.name},
                            {"theory", number_or_null(e.theory)},
                            {"simulated", number_or_null(e.simulated)},
                            {"std_error", number_or_null(e.std_error)},
                            {"z", number_or_null(e.z)}});
  j["max_abs_z"] = number_or_null(c.max_abs_z);
  j["theory"] = to_json(c.theory);
  j["simulated"] = to_json(c.simulated);
  return j;
}

nlohmann::ordered_json to_json(const MaxProfit& m, const UtilitySpec& utility, double alpha) {
  return {{"utility", utility.to_string()},
          {"alpha", alpha},
          {"lambda1", m.lambda1},
          {"impact1", m.impact1},
          {"profit", m.profit}};
}

}  // namespace hetmg
