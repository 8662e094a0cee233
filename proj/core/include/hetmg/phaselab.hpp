#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetmg/economics.hpp"
#include "hetmg/model.hpp"
#include "hetmg/replica.hpp"
#include "hetmg/sim.hpp"

namespace hetmg {

/// `n` points from `lo` to `hi` inclusive. Grids of hundredths are built from
/// integer numerators so they print as the decimals they stand for.
std::vector<double> linear_grid(double lo, double hi, std::size_t n);
/// 0.01, 0.02, ..., 0.99
std::vector<double> default_lambda1_grid();
/// 0.01, 0.02, ..., 1.00
std::vector<double> default_impact1_grid();

struct SweepSpec {
  double alpha = 0.4;
  std::vector<double> lambda1_grid = default_lambda1_grid();
  std::vector<double> impact1_grid = default_impact1_grid();
  std::vector<UtilitySpec> utilities;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// One (lambda1, impact1) grid point of the two-group game. Observables and
/// profits are NaN when the point is non-ergodic.
struct SweepRow {
  double lambda1;
  double impact1;
  double impact2;
  double alpha_c;
  double zeta;
  double sigma2;
  double rho;
  double rho_1;
  double rho_2;
  double theta_11;
  double theta_12;
  double theta_22;
  double phi;
  double phi_1;
  double phi_2;
  std::vector<double> profits;  // aligned with SweepSpec::utilities
  bool nonergodic;
};

SweepRow evaluate_point(double lambda1, double impact1, double alpha,
                        const std::vector<UtilitySpec>& utilities);

/// Row order: lambda1 outer, impact1 inner, independent of the thread count.
std::vector<SweepRow> sweep(const SweepSpec& spec);

struct CriticalCell {
  double lambda1;
  double impact1;
  double alpha_c;
};

std::vector<CriticalCell> critical_surface(const std::vector<double>& lambda1_grid,
                                           const std::vector<double>& impact1_grid,
                                           unsigned threads = 0);

struct MaxProfitSearch {
  std::size_t lambda1_points = 99;
  std::size_t impact1_points = 100;
  int refinements = 2;
};

struct MaxProfit {
  double lambda1;
  double impact1;
  double profit;
};

/// Coarse-grid argmax of the overall profit followed by `refinements` local
/// grids at ten times the resolution. Ties go to smaller lambda1, then
/// smaller impact1. Throws AllNonErgodic.
MaxProfit find_max_profit(const UtilitySpec& utility, double alpha, const MaxProfitSearch& search = {});

struct ComparisonEntry {
  std::string name;
  double theory;
  double simulated;
  double std_error;
  double z;  // +-inf when std_error is zero and the values differ
};

/// Replica theory at the realised alpha = P/N next to the Monte Carlo estimates.
struct Comparison {
  double alpha;
  double alpha_effective;
  ReplicaSolution theory;
  SimResult simulated;
  std::vector<ComparisonEntry> entries;
  double max_abs_z;
};

/// Throws NonErgodic when the configuration is below alpha_c.
Comparison compare(const GameConfig& config, const SimConfig& sim);

// Serialization.

/// Column names of the sweep CSV for the given utilities.
std::vector<std::string> sweep_columns(const std::vector<UtilitySpec>& utilities);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                     const std::vector<UtilitySpec>& utilities);

/// Parsed CSV; empty cells read as NaN.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;  // throws UnknownColumn
};

Table read_csv(std::istream& in);
Table to_table(const std::vector<SweepRow>& rows, const std::vector<UtilitySpec>& utilities);

/// Shortest round-trip decimal; empty for NaN.
std::string format_number(double v);

nlohmann::ordered_json to_json(const ReplicaSolution& s);
nlohmann::ordered_json to_json(const CriticalPoint& cp);
nlohmann::ordered_json to_json(const SimResult& r);
nlohmann::ordered_json to_json(const Comparison& c);
nlohmann::ordered_json to_json(const MaxProfit& m, const UtilitySpec& utility, double alpha);

}  // namespace hetmg
