#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hetmg {

/// Per-group quantity, index-aligned with GameConfig::groups().
using GroupVector = std::vector<double>;

/// Smallest admissible impact. Outcome formulas divide by I_g.
inline constexpr double kMinImpact = 1e-6;

struct GroupSpec {
  double ratio;   // lambda_g = N_g / N
  double impact;  // I_g
};

/// Group ratios, impacts and the control parameter alpha = P/N.
///
/// Immutable once built. Ratios always sum to one; group order is kept as
/// given and every per-group output is reported in that order.
class GameConfig {
public:
  const std::vector<GroupSpec>& groups() const noexcept { return groups_; }
  std::size_t size() const noexcept { return groups_.size(); }
  double alpha() const noexcept { return alpha_; }
  double ratio(std::size_t g) const { return groups_.at(g).ratio; }
  double impact(std::size_t g) const { return groups_.at(g).impact; }

  /// Same shape, different alpha.
  GameConfig with_alpha(double alpha) const;

  friend GameConfig build_config(std::span<const GroupSpec> groups, double alpha);

private:
  GameConfig(std::vector<GroupSpec> groups, double alpha)
      : groups_(std::move(groups)), alpha_(alpha) {}

  std::vector<GroupSpec> groups_;
  double alpha_;
};

/// Validates and builds a configuration. Ratios may be raw counts; they are
/// rescaled to sum to one.
GameConfig build_config(std::span<const GroupSpec> groups, double alpha);
GameConfig build_config(std::initializer_list<GroupSpec> groups, double alpha);

/// Sum_g lambda_g v_g.
double group_mean(const GameConfig& config, std::span<const double> v);

/// Rescales all impacts by one factor so that <I^2> = 1.
GameConfig normalize_impacts(const GameConfig& config);

/// Two groups with I_2 fixed by <I^2> = 1. Requires 0 < lambda1 < 1 and
/// impact1 in [0.01, 1].
GameConfig two_group_config(double lambda1, double impact1, double alpha);

/// {"alpha": .., "groups": [{"ratio": .., "impact": ..}, ...]}; unknown keys
/// are rejected.
GameConfig config_from_json(std::string_view text);
std::string config_to_json(const GameConfig& config);

}  // namespace hetmg
