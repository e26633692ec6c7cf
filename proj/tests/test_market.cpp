#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dermarket/market.hpp"

using namespace dermarket;

TEST_CASE("build_curve sorts supply by nondecreasing price") {
  auto c = build_curve(Side::supply, 0, {{20, 50}, {10, 50}});
  REQUIRE(c.blocks.size() == 2);
  CHECK(c.blocks[0].price == 10);
  CHECK(c.blocks[1].price == 20);
  CHECK(c.blocks[0].index == 0);
  CHECK(c.blocks[1].index == 1);
}

TEST_CASE("build_curve sorts demand by nonincreasing price") {
  auto c = build_curve(Side::demand, 3, {{25, 60}, {40, 60}});
  REQUIRE(c.blocks.size() == 2);
  CHECK(c.blocks[0].price == 40);
  CHECK(c.blocks[1].price == 25);
}

TEST_CASE("build_curve drops zero-quantity blocks") {
  auto c = build_curve(Side::supply, 0, {{10, 0}, {30, 50}});
  REQUIRE(c.blocks.size() == 1);
  CHECK(c.blocks[0].price == 30);
  CHECK(c.blocks[0].quantity == 50);
  CHECK(c.blocks[0].index == 0);
}

TEST_CASE("build_curve rejects non-finite prices and empty results") {
  CHECK_THROWS_AS(build_curve(Side::supply, 0,
                              {{std::numeric_limits<double>::quiet_NaN(), 5}}),
                  Error);
  try {
    build_curve(Side::supply, 0, {{10, 0}, {20, 0}});
    FAIL("expected EmptyCurve");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_curve);
  }
  try {
    build_curve(Side::demand, 1,
                {{std::numeric_limits<double>::infinity(), 5}});
    FAIL("expected NonFinitePrice");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::non_finite_price);
  }
}

TEST_CASE("build_curve is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> price(5.0, 90.0), qty(0.0, 20.0);
  for (int rep = 0; rep < 50; ++rep) {
    Side side = rep % 2 ? Side::supply : Side::demand;
    std::vector<std::pair<double, double>> raw;
    int n = 1 + static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) raw.emplace_back(price(rng), qty(rng));
    raw.emplace_back(33.0, 5.0);  // guarantee a nonzero block survives
    auto c1 = build_curve(side, 0, raw);
    std::vector<std::pair<double, double>> again;
    for (const auto& b : c1.blocks) again.emplace_back(b.price, b.quantity);
    auto c2 = build_curve(side, 0, again);
    CHECK(curves_equal(c1, c2));
  }
}

TEST_CASE("stable sort keeps input order for price ties") {
  auto c = build_curve(Side::supply, 0, {{10, 1}, {10, 2}, {5, 3}});
  REQUIRE(c.blocks.size() == 3);
  CHECK(c.blocks[0].quantity == 3);
  CHECK(c.blocks[1].quantity == 1);
  CHECK(c.blocks[2].quantity == 2);
}

TEST_CASE("imbalance prices follow the affine model") {
  ImbalancePriceModel m{0.7, 1.7, 15.0, 20.0};
  auto [plus1, minus1] = imbalance_prices(m, 50.0);
  CHECK(plus1 == Catch::Approx(24.5).margin(1e-12));
  CHECK(minus1 == Catch::Approx(119.0).margin(1e-12));

  auto [plus2, minus2] = imbalance_prices(m, 15.0);
  CHECK(plus2 == Catch::Approx(0.0).margin(1e-12));
  CHECK(minus2 == Catch::Approx(59.5).margin(1e-12));

  ImbalancePriceModel identity{1.0, 1.0, 0.0, 0.0};
  auto [plus3, minus3] = imbalance_prices(identity, 0.0);
  CHECK(plus3 == 0.0);
  CHECK(minus3 == 0.0);
}

TEST_CASE("imbalance price ordering brackets the DA price") {
  // For a1 <= 1 <= a2, p1, p2 >= 0 and da >= p1: pr_plus <= da <= pr_minus.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    ImbalancePriceModel m;
    m.a1 = u01(rng);
    m.a2 = 1.0 + 2.0 * u01(rng);
    m.p1 = 30.0 * u01(rng);
    m.p2 = 30.0 * u01(rng);
    double da = m.p1 + 100.0 * u01(rng);
    auto [plus, minus] = imbalance_prices(m, da);
    CHECK(plus <= da + 1e-12);
    CHECK(minus >= da - 1e-12);
  }
}

TEST_CASE("negative pr_plus allowed below p1 (no flooring)") {
  ImbalancePriceModel m{0.7, 1.7, 15.0, 20.0};
  auto [plus, minus] = imbalance_prices(m, 5.0);
  CHECK(plus == Catch::Approx(-7.0).margin(1e-12));
  CHECK(minus > 0);
}

TEST_CASE("curve csv round-trips through the reader") {
  DayCurves day;
  day.supply.push_back(build_curve(Side::supply, 0, {{12.5, 4}, {30, 8}}));
  day.demand.push_back(build_curve(Side::demand, 0, {{55, 6}, {42.25, 3}}));
  std::string path = "test_curves_roundtrip.csv";
  write_curves_csv(path, day);
  DayCurves back = load_curves_csv(path, 1);
  CHECK(curves_equal(day.supply[0], back.supply[0]));
  CHECK(curves_equal(day.demand[0], back.demand[0]));
  std::remove(path.c_str());
}

TEST_CASE("time grid validates slot alignment") {
  TimeGrid ok{24, 3600.0, 5.0};
  ok.validate();
  CHECK(ok.steps_per_hour() == 720);
  TimeGrid bad{24, 3600.0, 7.0};
  CHECK_THROWS_AS(bad.validate(), Error);
}
