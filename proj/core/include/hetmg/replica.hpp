#pragma once

#include <vector>

#include "hetmg/model.hpp"

namespace hetmg {

/// Residual tolerance of the saddle-point solvers.
inline constexpr double kSaddleTolerance = 1e-12;
/// Alpha below the critical value by at most this much still counts as
/// critical (covers alpha_c quoted to four digits).
inline constexpr double kCriticalSlack = 1e-6;

/// Symmetric G x G matrix, row-major.
class GroupMatrix {
public:
  GroupMatrix() = default;
  explicit GroupMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t f, std::size_t g) { return data_[f * n_ + g]; }
  double operator()(std::size_t f, std::size_t g) const { return data_[f * n_ + g]; }

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Stationary observables of the ergodic phase.
struct ReplicaSolution {
  double alpha;
  double zeta;
  GroupVector q;       // Q_g
  double h_per_agent;  // H / N
  GroupMatrix theta;   // theta_fg
  GroupVector theta_g;
  GroupVector rho_g;
  double rho;
  double sigma2;
  GroupVector phi_g;
  double phi;
  double chi;
};

struct CriticalPoint {
  double zeta_c;
  double alpha_c;
};

/// Left-hand side of the alpha(zeta) saddle-point equation.
double saddle_lhs(const GameConfig& config, double zeta);
/// Left-hand side of the zeta_c equation; zero at zeta = 0 and zeta = zeta_c.
double critical_lhs(const GameConfig& config, double zeta);

/// Positive root zeta_c of the critical equation and alpha_c = <erf(zeta_c I_g)>.
/// Alpha of `shape` is ignored.
CriticalPoint critical_point(const GameConfig& shape);

/// Solves saddle_lhs(zeta) = alpha. Throws NonErgodic below alpha_c.
double solve_zeta(const GameConfig& config);

/// All observables at a zeta that solves the saddle-point equation.
ReplicaSolution observables(const GameConfig& config, double zeta);

/// solve_zeta followed by observables.
ReplicaSolution solve(const GameConfig& config);

/// Closed-form group outcomes at the critical point; all entries are <= 0.
GroupVector rho_at_critical(const GameConfig& shape, const CriticalPoint& cp);

/// Mean predictabilities theta_g at (zeta_c, alpha_c); they vanish there.
GroupVector theta_g_at_critical(const GameConfig& shape, const CriticalPoint& cp);

}  // namespace hetmg
