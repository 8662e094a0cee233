#include "hetmg/economics.hpp"

#include <charconv>
#include <cmath>

#include "hetmg/error.hpp"

namespace hetmg {
namespace {

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

UtilitySpec UtilitySpec::power(double d) {
  if (!(d > 0.0 && d < 1.0)) throw Error(Errc::InvalidUtility, "power exponent must lie in (0, 1)");
  return {UtilityFamily::Power, d};
}

UtilitySpec UtilitySpec::parse(std::string_view text) {
  if (text == "const") return constant();
  if (text == "linear") return linear();
  if (text == "sat") return saturating();
  if (text.starts_with("pow:")) {
    const std::string_view num = text.substr(4);
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
    if (ec != std::errc() || ptr != num.data() + num.size() || num.empty())
      throw Error(Errc::InvalidUtility, "bad exponent in '" + std::string(text) + "'");
    return power(d);
  }
  throw Error(Errc::InvalidUtility, "unknown utility '" + std::string(text) + "'");
}

std::string UtilitySpec::to_string() const {
  switch (family) {
    case UtilityFamily::Constant: return "const";
    case UtilityFamily::Linear: return "linear";
    case UtilityFamily::Power: return "pow:" + shortest(exponent);
    case UtilityFamily::Saturating: return "sat";
  }
  return {};
}

std::string UtilitySpec::column_name() const {
  if (family == UtilityFamily::Power) return "pi_pow_" + shortest(exponent);
  return "pi_" + to_string();
}

double utility_eval(const UtilitySpec& spec, double impact) {
  if (!(impact > 0.0)) throw Error(Errc::NonPositiveImpact, "utility needs a positive impact");
  switch (spec.family) {
    case UtilityFamily::Constant: return 1.0;
    case UtilityFamily::Linear: return impact;
    case UtilityFamily::Power: return std::pow(impact, spec.exponent);
    case UtilityFamily::Saturating: return impact / (impact + 1.0);
  }
  return 0.0;
}

ProfitReport profit(const GameConfig& config, std::span<const double> rho_g, const UtilitySpec& spec) {
  if (rho_g.size() != config.size())
    throw Error(Errc::LengthMismatch, "outcome vector length differs from group count");
  ProfitReport report;
  report.per_group.resize(rho_g.size());
  for (std::size_t g = 0; g < rho_g.size(); ++g)
    report.per_group[g] = utility_eval(spec, config.impact(g)) * rho_g[g];
  report.overall = group_mean(config, report.per_group);
  return report;
}

}  // namespace hetmg
