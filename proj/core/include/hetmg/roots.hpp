#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

namespace hetmg {

struct RootResult {
  double x;
  double fx;
  std::size_t iterations;
};

/// Root of `f` on [lo, hi], which must bracket a sign change.
///
/// Regula falsi with the Illinois weight halving, falling back to bisection
/// whenever the interpolated point does not shrink the bracket by at least a
/// half over two steps. Stops once |f(x)| <= ftol or the bracket collapses to
/// adjacent doubles. Returns nullopt without a sign change.
template <class F>
std::optional<RootResult> bracketed_root(F&& f, double lo, double hi, double ftol,
                                         std::size_t max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (std::abs(flo) <= ftol) return RootResult{lo, flo, 0};
  if (std::abs(fhi) <= ftol) return RootResult{hi, fhi, 0};
  if (std::signbit(flo) == std::signbit(fhi)) return std::nullopt;

  int side = 0;  // which endpoint was retained last step
  double width_before = hi - lo;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    const double width = hi - lo;
    // Every second step must have halved the bracket; otherwise bisect.
    if (!(x > lo && x < hi) || (it % 2 == 0 && width > 0.5 * width_before)) x = 0.5 * (lo + hi);
    if (it % 2 == 0) width_before = width;

    const double fx = f(x);
    if (std::abs(fx) <= ftol) return RootResult{x, fx, it};
    if (std::signbit(fx) == std::signbit(flo)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (std::nextafter(lo, hi) >= hi) {
      const double flo_true = f(lo);
      const double fhi_true = f(hi);
      return std::abs(flo_true) <= std::abs(fhi_true) ? RootResult{lo, flo_true, it}
                                                      : RootResult{hi, fhi_true, it};
    }
  }
  const double x = 0.5 * (lo + hi);
  return RootResult{x, f(x), max_iter};
}

}  // namespace hetmg
