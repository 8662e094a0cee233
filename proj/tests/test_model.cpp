#include <cmath>
#include <random>

#include "doctest.h"
#include "hetmg/error.hpp"
#include "hetmg/model.hpp"

using namespace hetmg;

namespace {
Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an hetmg::Error");
  return Errc::ParseError;
}

double mean_sq_impact(const GameConfig& c) {
  GroupVector sq;
  for (const auto& g : c.groups()) sq.push_back(g.impact * g.impact);
  return group_mean(c, sq);
}
}  // namespace

TEST_CASE("build_config") {
  const auto canon = build_config({{1.0, 1.0}}, 0.4);
  CHECK(canon.size() == 1);
  CHECK(canon.ratio(0) == 1.0);
  CHECK(canon.impact(0) == 1.0);
  CHECK(canon.alpha() == 0.4);

  const auto counts = build_config({{2.0, 1.0}, {2.0, 1.0}}, 0.4);
  CHECK(counts.ratio(0) == 0.5);
  CHECK(counts.ratio(1) == 0.5);

  CHECK(code_of([] { build_config({{0.5, 0.0}}, 0.4); }) == Errc::ImpactTooSmall);
  CHECK(code_of([] { build_config(std::span<const GroupSpec>{}, 0.4); }) == Errc::EmptyGroups);
  CHECK(code_of([] { build_config({{0.0, 1.0}}, 0.4); }) == Errc::NonPositiveRatio);
  CHECK(code_of([] { build_config({{1.0, 1.0}}, 0.0); }) == Errc::NonPositiveAlpha);
  CHECK(code_of([] { build_config({{1.0, 5e-7}}, 0.4); }) == Errc::ImpactTooSmall);
  CHECK_NOTHROW(build_config({{1.0, 1e-6}}, 0.4));
}

TEST_CASE("group order is preserved") {
  const auto c = build_config({{3.0, 0.2}, {1.0, 2.0}, {6.0, 1.0}}, 1.0);
  CHECK(c.impact(0) == 0.2);
  CHECK(c.impact(1) == 2.0);
  CHECK(c.impact(2) == 1.0);
  CHECK(c.ratio(0) == doctest::Approx(0.3));
}

TEST_CASE("ratios sum to one for random inputs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-3, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<GroupSpec> groups(1 + trial % 6);
    for (auto& g : groups) g = {u(rng), u(rng)};
    const auto c = build_config(groups, 0.5);
    double sum = 0.0;
    for (const auto& g : c.groups()) sum += g.ratio;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("group_mean") {
  const auto half = build_config({{0.5, 1.0}, {0.5, 1.0}}, 0.4);
  CHECK(group_mean(half, GroupVector{1.0, 3.0}) == 2.0);
  CHECK(group_mean(build_config({{1.0, 1.0}}, 0.4), GroupVector{7.3}) == 7.3);
  const auto skew = build_config({{0.2, 1.0}, {0.8, 1.0}}, 0.4);
  CHECK(group_mean(skew, GroupVector{10.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(code_of([&] { group_mean(skew, GroupVector{1.0}); }) == Errc::LengthMismatch);
}

TEST_CASE("group_mean is linear") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const auto c = build_config({{0.1, 1.0}, {0.3, 1.0}, {0.6, 2.0}}, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    GroupVector v{u(rng), u(rng), u(rng)}, w{u(rng), u(rng), u(rng)}, mix(3);
    const double a = u(rng), b = u(rng);
    for (int g = 0; g < 3; ++g) mix[g] = a * v[g] + b * w[g];
    CHECK(std::abs(group_mean(c, mix) - (a * group_mean(c, v) + b * group_mean(c, w))) < 1e-12);
  }
}

TEST_CASE("normalize_impacts") {
  CHECK(normalize_impacts(build_config({{1.0, 5.0}}, 0.4)).impact(0) == doctest::Approx(1.0).epsilon(1e-15));
  const auto same = normalize_impacts(build_config({{0.5, 1.0}, {0.5, 1.0}}, 0.4));
  CHECK(same.impact(0) == 1.0);
  CHECK(same.impact(1) == 1.0);

  // <I^2> = 0.5 (1 + 9) = 5, so c = 1/sqrt(5).
  const auto n = normalize_impacts(build_config({{0.5, 1.0}, {0.5, 3.0}}, 0.4));
  CHECK(n.impact(0) == doctest::Approx(0.4472135955).epsilon(1e-10));
  CHECK(n.impact(1) == doctest::Approx(1.3416407865).epsilon(1e-10));
  CHECK(std::abs(mean_sq_impact(n) - 1.0) < 1e-15);
  CHECK(n.ratio(0) == 0.5);
}

TEST_CASE("normalize_impacts is idempotent") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto once = normalize_impacts(build_config({{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}}, 1.0));
    const auto twice = normalize_impacts(once);
    for (std::size_t g = 0; g < 3; ++g) CHECK(std::abs(once.impact(g) - twice.impact(g)) <= 1e-15);
  }
}

TEST_CASE("two_group_config") {
  const auto equal = two_group_config(0.5, 1.0, 0.4);
  CHECK(equal.impact(1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(two_group_config(0.75, 0.8, 0.4).impact(1) == doctest::Approx(1.4422205102).epsilon(1e-10));
  CHECK(code_of([] { two_group_config(1.0, 0.5, 0.4); }) == Errc::Lambda1OutOfRange);
  CHECK(code_of([] { two_group_config(0.0, 0.5, 0.4); }) == Errc::Lambda1OutOfRange);
  CHECK(code_of([] { two_group_config(0.5, 0.005, 0.4); }) == Errc::Impact1OutOfRange);
  CHECK(code_of([] { two_group_config(0.5, 1.01, 0.4); }) == Errc::Impact1OutOfRange);

  for (int a = 1; a < 100; a += 7)
    for (int b = 1; b <= 100; b += 9) {
      const auto c = two_group_config(a / 100.0, b / 100.0, 0.4);
      CHECK(std::abs(mean_sq_impact(c) - 1.0) < 1e-12);
    }
}

TEST_CASE("config JSON") {
  const auto c = config_from_json(R"({"alpha": 0.4, "groups": [{"ratio": 0.5, "impact": 1.0}, {"ratio": 0.5, "impact": 2.0}]})");
  CHECK(c.alpha() == 0.4);
  CHECK(c.impact(1) == 2.0);
  CHECK(config_from_json(config_to_json(c)).impact(1) == 2.0);
  CHECK(code_of([] { config_from_json(R"({"alpha": 0.4, "groups": [], "extra": 1})"); }) == Errc::ParseError);
  CHECK(code_of([] { config_from_json(R"({"alpha": 0.4, "groups": [{"ratio": 1, "impact": 1, "x": 0}]})"); }) ==
        Errc::ParseError);
  CHECK(code_of([] { config_from_json(R"({"alpha": 0.4})"); }) == Errc::ParseError);
  CHECK(code_of([] { config_from_json("not json"); }) == Errc::ParseError);
  CHECK(code_of([] { config_from_json(R"({"alpha": 0.4, "groups": []})"); }) == Errc::EmptyGroups);
}
