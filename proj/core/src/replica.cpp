#include "hetmg/replica.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hetmg/error.hpp"
#include "hetmg/roots.hpp"

namespace hetmg {
namespace {

constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;
constexpr double kCriticalSeed = 1e-8;
constexpr double kObservablesTolerance = 1e-10;

// Per-group special-function values at a given zeta.
struct GroupTerms {
  GroupVector e;   // erf(zeta I_g)
  GroupVector ec;  // erfc(zeta I_g)
  GroupVector x;   // exp(-zeta^2 I_g^2)
};

GroupTerms terms(const GameConfig& config, double zeta) {
  GroupTerms t;
  t.e.resize(config.size());
  t.ec.resize(config.size());
  t.x.resize(config.size());
  for (std::size_t g = 0; g < config.size(); ++g) {
    const double u = zeta * config.impact(g);
    t.e[g] = std::erf(u);
    t.ec[g] = std::erfc(u);
    t.x[g] = std::exp(-u * u);
  }
  return t;
}

double check_critical(const GameConfig& shape, const CriticalPoint& cp) {
  const double residual = critical_lhs(shape, cp.zeta_c);
  const GroupTerms t = terms(shape, cp.zeta_c);
  if (!(cp.zeta_c > 0.0) || std::abs(residual) > kObservablesTolerance ||
      std::abs(group_mean(shape, t.e) - cp.alpha_c) > kObservablesTolerance)
    throw Error(Errc::ResidualTooLarge, "critical point does not solve the critical equations");
  return residual;
}

}  // namespace

double saddle_lhs(const GameConfig& config, double zeta) {
  double sum = 0.0;
  for (std::size_t g = 0; g < config.size(); ++g) {
    const double u = zeta * config.impact(g);
    const double e = std::erf(u);
    sum += config.ratio(g) * (4.0 * u * u - 2.0 * u * u * e + e - 2.0 * kInvSqrtPi * u * std::exp(-u * u));
  }
  return sum;
}

double critical_lhs(const GameConfig& config, double zeta) {
  double sum = 0.0;
  for (std::size_t g = 0; g < config.size(); ++g) {
    const double u = zeta * config.impact(g);
    sum += config.ratio(g) * (2.0 * u * u - u * u * std::erf(u) - kInvSqrtPi * u * std::exp(-u * u));
  }
  return sum;
}

CriticalPoint critical_point(const GameConfig& shape) {
  auto f = [&](double z) { return critical_lhs(shape, z); };
  // Negative just above the trivial root at zero, ~ zeta^2 <I^2> for large zeta.
  double hi = 1.0;
  for (int i = 0; f(hi) <= 0.0; ++i) {
    if (i > 60) throw Error(Errc::NoPositiveRoot, "critical equation has no sign change");
    hi *= 2.0;
  }
  const auto root = bracketed_root(f, kCriticalSeed, hi, kSaddleTolerance * 1e-3);
  if (!root || !(root->x > kCriticalSeed) || std::abs(root->fx) >= kSaddleTolerance)
    throw Error(Errc::NoPositiveRoot, "failed to isolate the positive critical root");
  const GroupTerms t = terms(shape, root->x);
  return {root->x, group_mean(shape, t.e)};
}

double solve_zeta(const GameConfig& config) {
  const double alpha = config.alpha();
  const CriticalPoint cp = critical_point(config);
  if (alpha < cp.alpha_c - kCriticalSlack)
    throw Error(Errc::NonErgodic, "alpha " + std::to_string(alpha) + " is below alpha_c " +
                                      std::to_string(cp.alpha_c));

  auto f = [&](double z) { return saddle_lhs(config, z) - alpha; };
  const double tol = kSaddleTolerance * std::max(1.0, alpha);
  double lo = cp.zeta_c;
  double hi = 2.0 * cp.zeta_c;
  // The left-hand side is strictly increasing in zeta, so expanding outward
  // finds the single crossing.
  for (int i = 0; f(lo) > 0.0; ++i) {
    if (i > 60) throw Error(Errc::NoBracket, "lower bracket expansion failed");
    hi = lo;
    lo *= 0.5;
  }
  for (int i = 0; f(hi) < 0.0; ++i) {
    if (i > 60) throw Error(Errc::NoBracket, "upper bracket expansion failed");
    lo = hi;
    hi *= 2.0;
  }
  // Aim well below the tolerance; the bracket collapsing to adjacent doubles
  // ends the search first whenever rounding in the left-hand side is coarser.
  const auto root = bracketed_root(f, lo, hi, kSaddleTolerance * 1e-2);
  if (!root || std::abs(root->fx) >= tol)
    throw Error(Errc::NoBracket, "saddle-point equation not solved to tolerance");
  return root->x;
}

ReplicaSolution observables(const GameConfig& config, double zeta) {
  const double alpha = config.alpha();
  if (!(zeta > 0.0) ||
      std::abs(saddle_lhs(config, zeta) - alpha) > kObservablesTolerance * std::max(1.0, alpha))
    throw Error(Errc::ResidualTooLarge, "zeta does not solve the saddle-point equation");

  const std::size_t n = config.size();
  const GroupTerms t = terms(config, zeta);
  const double mean_e = group_mean(config, t.e);
  const double z2 = zeta * zeta;

  ReplicaSolution s;
  s.alpha = alpha;
  s.zeta = zeta;
  s.q.resize(n);
  s.rho_g.resize(n);
  s.phi_g = t.ec;
  GroupVector i2(n), tg(n), denom_terms(n);
  for (std::size_t g = 0; g < n; ++g) {
    const double I = config.impact(g);
    i2[g] = I * I;
    tg[g] = 2.0 * zeta * I - zeta * I * t.e[g] - kInvSqrtPi * t.x[g];
    denom_terms[g] = 2.0 * I * I - I * I * t.e[g];
    s.q[g] = I * I - I * I * t.e[g] + t.e[g] / (2.0 * z2) - kInvSqrtPi * I * t.x[g] / zeta;
    s.rho_g[g] = t.e[g] / (4.0 * z2 * I) + mean_e / (2.0 * alpha * zeta) * tg[g] - I;
  }
  GroupVector q_plus_i2(n);
  for (std::size_t g = 0; g < n; ++g) q_plus_i2[g] = s.q[g] + i2[g];
  const double gap = 1.0 - mean_e / alpha;
  s.h_per_agent = 0.5 * group_mean(config, q_plus_i2) * gap * gap;

  const double denom = group_mean(config, denom_terms);
  const double scale = (alpha - mean_e) / (2.0 * alpha);
  s.theta = GroupMatrix(n);
  for (std::size_t f = 0; f < n; ++f) {
    const double If = config.impact(f);
    for (std::size_t g = f; g < n; ++g) {
      const double Ig = config.impact(g);
      double value = tg[f] * tg[g] / alpha -
                     scale * If * Ig * (2.0 - t.e[f]) * (2.0 - t.e[g]) / denom;
      if (f == g) value += scale * (2.0 - t.e[f]) / config.ratio(f);
      s.theta(f, g) = value;
      s.theta(g, f) = value;
    }
  }
  s.theta_g.assign(n, 0.0);
  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t f = 0; f < n; ++f)
      s.theta_g[g] += config.ratio(f) * config.impact(f) * s.theta(f, g);

  s.rho = group_mean(config, s.rho_g);
  s.sigma2 = group_mean(config, i2) + mean_e * mean_e / (4.0 * alpha * z2) - mean_e / (2.0 * z2);
  s.phi = group_mean(config, t.ec);
  s.chi = mean_e / (alpha - mean_e);
  return s;
}

ReplicaSolution solve(const GameConfig& config) { return observables(config, solve_zeta(config)); }

GroupVector rho_at_critical(const GameConfig& shape, const CriticalPoint& cp) {
  check_critical(shape, cp);
  const double z = cp.zeta_c;
  const GroupTerms t = terms(shape, z);
  GroupVector rho(shape.size());
  for (std::size_t g = 0; g < shape.size(); ++g) {
    const double I = shape.impact(g);
    rho[g] = 0.5 * t.e[g] * (1.0 / (2.0 * z * z * I) - I) - kInvSqrtPi / (2.0 * z) * t.x[g];
  }
  return rho;
}

GroupVector theta_g_at_critical(const GameConfig& shape, const CriticalPoint& cp) {
  check_critical(shape, cp);
  return observables(shape.with_alpha(cp.alpha_c), cp.zeta_c).theta_g;
}

}  // namespace hetmg
