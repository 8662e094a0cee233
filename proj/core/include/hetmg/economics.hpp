#pragma once

#include <string>
#include <string_view>

#include "hetmg/model.hpp"

namespace hetmg {

enum class UtilityFamily { Constant, Linear, Power, Saturating };

/// U(I) = 1, I, I^d (0 < d < 1) or I / (I + 1). Shared by every group.
struct UtilitySpec {
  UtilityFamily family = UtilityFamily::Constant;
  double exponent = 0.0;  // only for Power

  static UtilitySpec constant() { return {UtilityFamily::Constant, 0.0}; }
  static UtilitySpec linear() { return {UtilityFamily::Linear, 0.0}; }
  static UtilitySpec power(double d);
  static UtilitySpec saturating() { return {UtilityFamily::Saturating, 0.0}; }

  /// Parses `const`, `linear`, `pow:<d>` or `sat`.
  static UtilitySpec parse(std::string_view text);
  /// Inverse of parse.
  std::string to_string() const;
  /// CSV column name: pi_const, pi_linear, pi_pow_<d>, pi_sat.
  std::string column_name() const;

  bool operator==(const UtilitySpec&) const = default;
};

struct ProfitReport {
  GroupVector per_group;  // Pi_g = U(I_g) rho_g
  double overall;         // <Pi_g>_G
};

double utility_eval(const UtilitySpec& spec, double impact);

ProfitReport profit(const GameConfig& config, std::span<const double> rho_g, const UtilitySpec& spec);

}  // namespace hetmg
