#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dermarket/dro.hpp"

using namespace dermarket;

namespace {

AmbiguityHour make_amb(double zeta1, double zeta2, double dmin, double dmax) {
  AmbiguityHour a;
  a.zeta1 = zeta1;
  a.zeta2 = zeta2;
  a.delta_min = dmin;
  a.delta_max = dmax;
  a.u1_max = std::max(dmax, -dmin);
  a.u2_max = std::max(dmin * dmin, dmax * dmax);
  a.validate();
  return a;
}

LiftedPoint curve_atom(double d) { return {d, std::abs(d), d * d}; }

HourInstance dro_desk_hour() {
  HourInstance h;
  h.supply = build_curve(Side::supply, 0, {{20, 5}});
  h.demand = build_curve(Side::demand, 0, {{50, 8}, {30, 10}});
  h.generation = 10;
  h.load = 0;
  h.g_cap = 10;
  h.tr_max = 12;
  h.pr_plus = 10;
  h.pr_minus = 90;
  return h;
}

}  // namespace

TEST_CASE("ambiguity estimation from samples") {
  SECTION("all-zero samples give a degenerate set") {
    auto set = estimate_ambiguity({{0, 0, 0, 0}});
    CHECK(set.hours[0].zeta1 == 0.0);
    CHECK(set.hours[0].zeta2 == 0.0);
    CHECK(set.hours[0].delta_min == 0.0);
    CHECK(set.hours[0].delta_max == 0.0);
  }
  SECTION("hand-computed moments") {
    auto set = estimate_ambiguity({{-0.5, 0, 0.5}});
    const auto& a = set.hours[0];
    CHECK(a.zeta1 == Catch::Approx(1.0 / 3.0));
    CHECK(a.zeta2 == Catch::Approx(1.0 / 6.0));
    CHECK(a.delta_min == Catch::Approx(-0.5));
    CHECK(a.delta_max == Catch::Approx(0.5));
    CHECK(a.u1_max == Catch::Approx(0.5));
    CHECK(a.u2_max == Catch::Approx(0.25));
  }
  SECTION("centering removes a constant offset") {
    auto set = estimate_ambiguity({{0.2, 0.2}});
    CHECK(set.hours[0].zeta1 == Catch::Approx(0.0).margin(1e-15));
    CHECK(set.hours[0].zeta2 == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("fewer than two samples rejected") {
    try {
      estimate_ambiguity({{1.0}});
      FAIL("expected EmptySamples");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::empty_samples);
    }
  }
}

TEST_CASE("worst-case expectation basics") {
  AmbiguityHour a = make_amb(0.3, 0.5, -1.0, 1.0);
  SECTION("constants pass through") {
    WceResult r = worst_case_expectation({7.5, 0, 0, 0}, a);
    CHECK(r.value == Catch::Approx(7.5).margin(1e-9));
  }
  SECTION("zero-mean kills pure delta terms") {
    for (double c : {3.0, -11.0}) {
      WceResult r = worst_case_expectation({0, c, 0, 0}, a);
      CHECK(r.value == Catch::Approx(0.0).margin(1e-8));
    }
  }
  SECTION("mean-absolute bound is attained for f = u1") {
    WceResult r = worst_case_expectation({0, 0, 1, 0}, a);
    CHECK(r.value == Catch::Approx(0.3).margin(1e-8));
  }
  SECTION("degenerate set evaluates at the origin") {
    AmbiguityHour z = make_amb(0, 0, 0, 0);
    WceResult r = worst_case_expectation({2, 5, -3, 4}, z);
    CHECK(r.value == Catch::Approx(2.0).margin(1e-9));
  }
}

TEST_CASE("sample support oracle") {
  AmbiguityHour a = make_amb(0.3, 0.5, -1.0, 1.0);
  SECTION("single atom at zero is a forced distribution") {
    MomentLpResult r = sample_support_oracle({4, 1, 2, 3}, a, {curve_atom(0)});
    CHECK(r.value == Catch::Approx(4.0));
  }
  SECTION("three symmetric atoms reach the mean-absolute cap") {
    MomentLpResult r = sample_support_oracle(
        {0, 0, 1, 0}, a, {curve_atom(-1), curve_atom(0), curve_atom(1)});
    CHECK(r.value == Catch::Approx(0.3).margin(1e-9));
  }
  SECTION("atoms that cannot satisfy the zero mean") {
    try {
      sample_support_oracle({0, 0, 1, 0}, a, {curve_atom(0.5), curve_atom(1)});
      FAIL("expected InfeasibleMoments");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::infeasible_moments);
    }
  }
  SECTION("atoms outside the lifted set are rejected") {
    CHECK_THROWS_AS(sample_support_oracle({0, 0, 0, 0}, a, {{2.0, 2.0, 4.0}}),
                    Error);
  }
}

TEST_CASE("oracle lower-bounds the worst case on random objectives") {
  AmbiguityHour a = make_amb(0.4, 0.3, -1.2, 0.9);
  std::vector<LiftedPoint> atoms{curve_atom(a.delta_min), curve_atom(-0.4),
                                 curve_atom(0), curve_atom(0.5),
                                 curve_atom(a.delta_max),
                                 {0, a.u1_max, a.u2_max}};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  double max_gap = 0;
  for (int rep = 0; rep < 100; ++rep) {
    AffineRecourse f{coef(rng), coef(rng), coef(rng), coef(rng)};
    WceResult wce = worst_case_expectation(f, a);
    MomentLpResult lower = sample_support_oracle(f, a, atoms);
    CHECK(wce.value >= lower.value - 1e-6);
    // atoms at the converged support close the gap entirely
    MomentLpResult exact = sample_support_oracle(f, a, wce.support);
    CHECK(std::abs(wce.value - exact.value) <= 1e-6);
    max_gap = std::max(max_gap, wce.value - lower.value);
  }
  CHECK(max_gap >= 0.0);
}

TEST_CASE("worst case is monotone in moments and support width") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coef(0.0, 4.0), sgn(-3.0, 3.0);
  for (int rep = 0; rep < 25; ++rep) {
    AffineRecourse f{sgn(rng), sgn(rng), coef(rng), coef(rng)};
    AmbiguityHour a = make_amb(0.2, 0.3, -0.8, 0.7);
    double v1 = worst_case_expectation(f, a).value;
    AmbiguityHour wider_z1 = make_amb(0.4, 0.3, -0.8, 0.7);
    CHECK(worst_case_expectation(f, wider_z1).value >= v1 - 1e-8);
    AmbiguityHour wider_z2 = make_amb(0.2, 0.5, -0.8, 0.7);
    CHECK(worst_case_expectation(f, wider_z2).value >= v1 - 1e-8);
    AmbiguityHour wider_sup = make_amb(0.2, 0.3, -1.6, 1.4);
    CHECK(worst_case_expectation(f, wider_sup).value >= v1 - 1e-8);
  }
}

TEST_CASE("zero ambiguity reproduces the deterministic decision") {
  HourInstance h = dro_desk_hour();
  MilpModel det = build_milp(h);
  HourDecision dd = solve_da_deterministic(det);
  DroHourResult rr = solve_da_dro_hour(h, make_amb(0, 0, 0, 0));
  CHECK(rr.decision.objective == Catch::Approx(dd.objective).margin(1e-6));
  CHECK(rr.decision.e_das == Catch::Approx(dd.e_das).margin(1e-6));
  CHECK(rr.decision.e_dab == Catch::Approx(dd.e_dab).margin(1e-6));
}

TEST_CASE("ldr identities hold at the robust optimum") {
  HourInstance h = dro_desk_hour();
  AmbiguityHour a = make_amb(0.5, 0.5, -1.5, 1.5);
  DroHourResult r = solve_da_dro_hour(h, a);
  const auto& p = r.policy;
  double net = h.generation - h.load;
  double s_net = r.decision.e_das - r.decision.e_dab;
  CHECK(p.k[0] - p.l[0] == Catch::Approx(net - s_net).margin(1e-7));
  CHECK(p.k[1] - p.l[1] == Catch::Approx(1.0).margin(1e-9));
  CHECK(p.k[2] == Catch::Approx(p.l[2]).margin(1e-9));
  CHECK(p.k[3] == Catch::Approx(p.l[3]).margin(1e-9));

  // balance identity and robust nonnegativity on sampled errors
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(a.delta_min, a.delta_max);
  for (int i = 0; i < 200; ++i) {
    double delta = d(rng);
    LiftedPoint w = curve_atom(delta);
    double kw = p.k[0] + p.k[1] * w.delta + p.k[2] * w.u1 + p.k[3] * w.u2;
    double lw = p.l[0] + p.l[1] * w.delta + p.l[2] * w.u1 + p.l[3] * w.u2;
    CHECK(kw - lw == Catch::Approx(net + delta - s_net).margin(1e-7));
    CHECK(kw >= -1e-9);
    CHECK(lw >= -1e-9);
  }
}

TEST_CASE("violating the delta-matching condition is infeasible") {
  HourInstance h = dro_desk_hour();
  AmbiguityHour a = make_amb(0.5, 0.5, -1.5, 1.5);
  MilpModel mm = build_milp(h);
  LdrVars v = build_ldr_constraints(mm, a);
  for (const auto& w : initial_lifted_points(a)) add_lifted_point_cuts(mm, v, h, w);
  mm.lm.lo[v.k1] = 0.0;
  mm.lm.hi[v.k1] = 0.0;
  mm.lm.lo[v.l1] = 0.0;
  mm.lm.hi[v.l1] = 0.0;
  Solution s = solve_milp(mm.lm);
  CHECK(s.status == SolveStatus::infeasible);
}

TEST_CASE("robustness premium is nonnegative and grows with ambiguity") {
  HourInstance h = dro_desk_hour();
  MilpModel det = build_milp(h);
  double det_obj = solve_da_deterministic(det).objective;
  AmbiguityHour base = make_amb(0.4, 0.4, -1.0, 1.0);
  double prev = det_obj;
  for (double scale : {1.0, 2.0, 4.0}) {
    DroHourResult r = solve_da_dro_hour(h, base.scaled(scale));
    CHECK(r.decision.objective >= prev - 1e-7);
    prev = r.decision.objective;
  }
}

TEST_CASE("uncertainty shrinks the offered quantity on the desk hour") {
  HourInstance h = dro_desk_hour();
  MilpModel det = build_milp(h);
  HourDecision dd = solve_da_deterministic(det);
  DroHourResult r = solve_da_dro_hour(h, make_amb(0.8, 0.9, -2.0, 2.0));
  CHECK(r.decision.e_das <= dd.e_das + 1e-9);
}

TEST_CASE("ldr policy csv has the pinned layout") {
  LdrPolicy p;
  LdrPolicyHour h;
  h.k[0] = 1.5;
  h.l[1] = -0.25;
  p.hours.push_back(h);
  std::string path = "test_ldr_roundtrip.csv";
  write_ldr_csv(path, p);
  CsvTable t = read_csv(path);
  REQUIRE(t.header.size() == 9);
  CHECK(t.header[0] == "hour");
  CHECK(t.header[1] == "k0");
  CHECK(t.header[8] == "l3");
  CHECK(parse_num(t.rows[0][1], path) == 1.5);
  CHECK(parse_num(t.rows[0][6], path) == -0.25);
  std::remove(path.c_str());
}
