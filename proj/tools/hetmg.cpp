// hetmg: replica theory, Monte Carlo and phase diagrams of the batch
// Minority Game with heterogeneous impacts.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetmg/error.hpp"
#include "hetmg/heatmap.hpp"
#include "hetmg/phaselab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNonErgodic = 3;
constexpr double kCompareZLimit = 4.0;

hetmg::GameConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hetmg::Error(hetmg::Errc::ParseError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return hetmg::config_from_json(buf.str());
}

void add_sim_flags(CLI::App* cmd, hetmg::SimConfig& sim) {
  cmd->add_option("--agents", sim.n_agents, "number of agents N")->check(CLI::PositiveNumber);
  cmd->add_option("--gamma", sim.gamma, "learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", sim.seed, "RNG seed");
  cmd->add_option("--transient", sim.transient_steps, "discarded batch steps");
  cmd->add_option("--measure", sim.measure_steps, "measured batch steps")->check(CLI::PositiveNumber);
  cmd->add_flag("--impact-weighted", sim.impact_weighted_update, "scale score updates by impact");
  cmd->add_flag("--sigma-from-mean", sim.sigma_from_mean, "measure sigma^2 with m in place of s");
}

std::vector<hetmg::UtilitySpec> parse_utilities(const std::string& list) {
  std::vector<hetmg::UtilitySpec> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(hetmg::UtilitySpec::parse(item));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hetmg::Error(hetmg::Errc::ParseError, "cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous-impact batch Minority Game: replica solver, simulator and phase diagrams"};
  app.require_subcommand(1);

  std::string config_path;
  hetmg::SimConfig sim;

  auto* solve_cmd = app.add_subcommand("solve", "replica solution as JSON");
  solve_cmd->add_option("--config", config_path, "game configuration JSON")->required();

  auto* critical_cmd = app.add_subcommand("critical", "critical point (zeta_c, alpha_c)");
  critical_cmd->add_option("--config", config_path, "game configuration JSON")->required();

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimates as JSON");
  simulate_cmd->add_option("--config", config_path, "game configuration JSON")->required();
  add_sim_flags(simulate_cmd, sim);

  auto* compare_cmd = app.add_subcommand("compare", "simulation against replica theory");
  compare_cmd->add_option("--config", config_path, "game configuration JSON")->required();
  add_sim_flags(compare_cmd, sim);

  hetmg::SweepSpec sweep_spec;
  std::string utilities = "const,linear";
  std::string out_path = "-";
  double lambda_min = 0.01, lambda_max = 0.99, impact_min = 0.01, impact_max = 1.0;
  std::size_t lambda_n = 99, impact_n = 100;
  auto* sweep_cmd = app.add_subcommand("sweep", "two-group grid sweep as CSV");
  sweep_cmd->add_option("--alpha", sweep_spec.alpha, "control parameter alpha")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--utilities", utilities, "comma list of const, linear, pow:<d>, sat");
  sweep_cmd->add_option("--out", out_path, "output CSV path ('-' for stdout)");
  sweep_cmd->add_option("--lambda-min", lambda_min);
  sweep_cmd->add_option("--lambda-max", lambda_max);
  sweep_cmd->add_option("--lambda-n", lambda_n)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--impact-min", impact_min);
  sweep_cmd->add_option("--impact-max", impact_max);
  sweep_cmd->add_option("--impact-n", impact_n)->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--threads", sweep_spec.threads, "worker threads (0: all cores)");

  std::string in_path, column = "rho", svg_path;
  auto* heatmap_cmd = app.add_subcommand("heatmap", "render one sweep column as SVG");
  heatmap_cmd->add_option("--in", in_path, "sweep CSV")->required();
  heatmap_cmd->add_option("--column", column, "column to plot");
  heatmap_cmd->add_option("--out", svg_path, "output SVG path ('-' for stdout)")->required();

  double max_alpha = 0.4;
  std::string max_utility = "const";
  hetmg::MaxProfitSearch search;
  auto* maxprofit_cmd = app.add_subcommand("maxprofit", "grid argmax of the overall profit");
  maxprofit_cmd->add_option("--alpha", max_alpha)->check(CLI::PositiveNumber);
  maxprofit_cmd->add_option("--utility", max_utility, "const, linear, pow:<d> or sat");
  maxprofit_cmd->add_option("--lambda-n", search.lambda1_points)->check(CLI::PositiveNumber);
  maxprofit_cmd->add_option("--impact-n", search.impact1_points)->check(CLI::PositiveNumber);
  maxprofit_cmd->add_option("--refinements", search.refinements);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) {
      std::cout << hetmg::to_json(hetmg::solve(load_config(config_path))).dump(2) << '\n';
    } else if (*critical_cmd) {
      std::cout << hetmg::to_json(hetmg::critical_point(load_config(config_path))).dump(2) << '\n';
    } else if (*simulate_cmd) {
      std::cout << hetmg::to_json(hetmg::run_measure(load_config(config_path), sim)).dump(2) << '\n';
    } else if (*compare_cmd) {
      const auto report = hetmg::compare(load_config(config_path), sim);
      std::cout << hetmg::to_json(report).dump(2) << '\n';
      if (!(report.max_abs_z <= kCompareZLimit)) return kExitThreshold;
    } else if (*sweep_cmd) {
      sweep_spec.utilities = parse_utilities(utilities);
      sweep_spec.lambda1_grid = hetmg::linear_grid(lambda_min, lambda_max, lambda_n);
      sweep_spec.impact1_grid = hetmg::linear_grid(impact_min, impact_max, impact_n);
      std::ostringstream csv;
      hetmg::write_sweep_csv(csv, hetmg::sweep(sweep_spec), sweep_spec.utilities);
      write_text(out_path, csv.str());
    } else if (*heatmap_cmd) {
      std::ifstream in(in_path);
      if (!in) throw hetmg::Error(hetmg::Errc::ParseError, "cannot open " + in_path);
      write_text(svg_path, hetmg::render_heatmap(hetmg::read_csv(in), column));
    } else if (*maxprofit_cmd) {
      const auto utility = hetmg::UtilitySpec::parse(max_utility);
      const auto best = hetmg::find_max_profit(utility, max_alpha, search);
      std::cout << hetmg::to_json(best, utility, max_alpha).dump(2) << '\n';
    }
  } catch (const hetmg::Error& e) {
    std::cerr << "hetmg: " << e.what() << '\n';
    if (e.code() == hetmg::Errc::NonErgodic || e.code() == hetmg::Errc::AllNonErgodic) return kExitNonErgodic;
    return kExitUsage;
  }
  return kExitOk;
}
