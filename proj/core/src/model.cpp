#include "hetmg/model.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hetmg/error.hpp"

namespace hetmg {

GameConfig build_config(std::span<const GroupSpec> groups, double alpha) {
  if (groups.empty()) throw Error(Errc::EmptyGroups, "at least one group is required");
  for (const auto& g : groups) {
    if (!(g.ratio > 0.0) || !std::isfinite(g.ratio))
      throw Error(Errc::NonPositiveRatio, "group ratio must be positive and finite");
    if (!(g.impact >= kMinImpact) || !std::isfinite(g.impact))
      throw Error(Errc::ImpactTooSmall, "group impact must be at least 1e-6");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(Errc::NonPositiveAlpha, "alpha must be positive and finite");

  double total = 0.0;
  for (const auto& g : groups) total += g.ratio;
  std::vector<GroupSpec> stored(groups.begin(), groups.end());
  for (auto& g : stored) g.ratio /= total;
  // Put the rounding residue on the largest group so the sum is 1 to the ulp.
  if (stored.size() > 1) {
    std::size_t largest = 0;
    for (std::size_t g = 1; g < stored.size(); ++g)
      if (stored[g].ratio > stored[largest].ratio) largest = g;
    double rest = 0.0;
    for (std::size_t g = 0; g < stored.size(); ++g)
      if (g != largest) rest += stored[g].ratio;
    stored[largest].ratio = 1.0 - rest;
  } else {
    stored[0].ratio = 1.0;
  }
  return GameConfig(std::move(stored), alpha);
}

GameConfig build_config(std::initializer_list<GroupSpec> groups, double alpha) {
  return build_config(std::span<const GroupSpec>(groups.begin(), groups.size()), alpha);
}

GameConfig GameConfig::with_alpha(double alpha) const { return build_config(groups_, alpha); }

double group_mean(const GameConfig& config, std::span<const double> v) {
  if (v.size() != config.size())
    throw Error(Errc::LengthMismatch, "group vector length differs from group count");
  double sum = 0.0;
  for (std::size_t g = 0; g < v.size(); ++g) sum += config.ratio(g) * v[g];
  return sum;
}

GameConfig normalize_impacts(const GameConfig& config) {
  GroupVector sq(config.size());
  for (std::size_t g = 0; g < sq.size(); ++g) sq[g] = config.impact(g) * config.impact(g);
  const double scale = 1.0 / std::sqrt(group_mean(config, sq));
  if (scale == 1.0) return config;
  std::vector<GroupSpec> groups = config.groups();
  for (auto& g : groups) g.impact *= scale;
  return build_config(groups, config.alpha());
}

GameConfig two_group_config(double lambda1, double impact1, double alpha) {
  if (!(lambda1 > 0.0 && lambda1 < 1.0))
    throw Error(Errc::Lambda1OutOfRange, "lambda1 must lie strictly inside (0, 1)");
  if (!(impact1 >= 0.01 && impact1 <= 1.0))
    throw Error(Errc::Impact1OutOfRange, "impact1 must lie in [0.01, 1]");
  const double impact2 = std::sqrt((1.0 - lambda1 * impact1 * impact1) / (1.0 - lambda1));
  return build_config({{lambda1, impact1}, {1.0 - lambda1, impact2}}, alpha);
}

GameConfig config_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, e.what());
  }
  auto require_keys = [](const nlohmann::json& obj, std::initializer_list<const char*> keys,
                         const char* where) {
    if (!obj.is_object()) throw Error(Errc::ParseError, std::string(where) + " must be an object");
    for (const auto& item : obj.items()) {
      bool known = false;
      for (const char* k : keys) known = known || item.key() == k;
      if (!known) throw Error(Errc::ParseError, "unknown field '" + item.key() + "' in " + where);
    }
    for (const char* k : keys)
      if (!obj.contains(k)) throw Error(Errc::ParseError, std::string("missing field '") + k + "' in " + where);
  };
  require_keys(doc, {"alpha", "groups"}, "config");
  if (!doc["alpha"].is_number() || !doc["groups"].is_array())
    throw Error(Errc::ParseError, "alpha must be a number and groups an array");
  std::vector<GroupSpec> groups;
  for (const auto& g : doc["groups"]) {
    require_keys(g, {"ratio", "impact"}, "group");
    if (!g["ratio"].is_number() || !g["impact"].is_number())
      throw Error(Errc::ParseError, "ratio and impact must be numbers");
    groups.push_back({g["ratio"].get<double>(), g["impact"].get<double>()});
  }
  return build_config(groups, doc["alpha"].get<double>());
}

std::string config_to_json(const GameConfig& config) {
  nlohmann::ordered_json doc;
  doc["alpha"] = config.alpha();
  doc["groups"] = nlohmann::ordered_json::array();
  for (const auto& g : config.groups()) doc["groups"].push_back({{"ratio", g.ratio}, {"impact", g.impact}});
  return doc.dump();
}

}  // namespace hetmg
