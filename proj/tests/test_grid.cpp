#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "dermarket/grid.hpp"

using namespace dermarket;

namespace {

const std::string kData = DERMARKET_DATA_DIR;

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  f << body;
}

FeederModel shipped_feeder() {
  return load_feeder(kData + "/feeder37_lines.csv", kData + "/feeder37_nodes.csv",
                     {1.0, 4.8, 1.0});
}

// Rated loading: every DER at 95% nameplate, 30 kW load at every node.
void rated_injections(const FeederModel& f, std::vector<double>& p,
                      std::vector<double>& q) {
  p.assign(f.n(), 0.0);
  q.assign(f.n(), 0.0);
  for (const auto& d : f.ders)
    p[d.node - 1] += 0.95 * d.s_max_kva / (f.bases.base_mva * 1000.0);
  for (int i = 0; i < f.n(); ++i) p[i] -= 0.030 / f.bases.base_mva;
}

}  // namespace

TEST_CASE("two-node feeder loads and produces the textbook sensitivity") {
  write_file("t_lines.csv", "from,to,r_ohm,x_ohm\n0,1,0.01,0.02\n");
  write_file("t_nodes.csv",
             "node,s_max_kva,p_min_kw,p_max_kw,cost_a,cost_b\n1,100,0,100,3,1\n");
  FeederModel f = load_feeder("t_lines.csv", "t_nodes.csv", {1.0, 1.0, 1.0});
  CHECK(f.num_nodes == 2);
  CHECK(f.ders.size() == 1);
  Sensitivity s = sensitivity_matrices(f);
  REQUIRE(s.n == 1);
  CHECK(s.r(0, 0) == Catch::Approx(0.01));
  CHECK(s.x(0, 0) == Catch::Approx(0.02));
  auto v = linear_voltages(s, {0.1}, {0.0});
  CHECK(v[0] == Catch::Approx(1.001));
  std::remove("t_lines.csv");
  std::remove("t_nodes.csv");
}

TEST_CASE("cycles and disconnected nodes are rejected") {
  write_file("t_cycle.csv", "from,to,r_ohm,x_ohm\n0,1,0.01,0.01\n1,2,0.01,0.01\n2,0,0.01,0.01\n");
  write_file("t_nodes2.csv", "node,s_max_kva,p_min_kw,p_max_kw,cost_a,cost_b\n1,10,0,10,3,1\n");
  try {
    load_feeder("t_cycle.csv", "t_nodes2.csv", {1.0, 1.0, 1.0});
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::cycle_detected);
  }
  write_file("t_disc.csv", "from,to,r_ohm,x_ohm\n0,1,0.01,0.01\n2,3,0.01,0.01\n");
  try {
    load_feeder("t_disc.csv", "t_nodes2.csv", {1.0, 1.0, 1.0});
    FAIL("expected DisconnectedNode");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::disconnected_node);
  }
  write_file("t_units.csv", "from,to,r_ohm,x_ohm\n0,1,-0.01,0.01\n");
  try {
    load_feeder("t_units.csv", "t_nodes2.csv", {1.0, 1.0, 1.0});
    FAIL("expected BadUnits");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::bad_units);
  }
  std::remove("t_cycle.csv");
  std::remove("t_disc.csv");
  std::remove("t_units.csv");
  std::remove("t_nodes2.csv");
}

TEST_CASE("shipped 37-node feeder has 36 nodes and 18 DER records") {
  FeederModel f = shipped_feeder();
  CHECK(f.num_nodes == 37);
  CHECK(f.n() == 36);
  CHECK(f.ders.size() == 18);
  int at340 = 0;
  for (const auto& d : f.ders)
    if (d.s_max_kva == 340) ++at340;
  CHECK(at340 == 1);
  CHECK(f.slater_ok);
}

TEST_CASE("leaves on different laterals share only the root path") {
  // nodes 8 (lateral via 2-6-7-8) and 12 (via 3-9..12) share edges 0-1, 1-2
  FeederModel f = shipped_feeder();
  Sensitivity s = sensitivity_matrices(f);
  double shared = 0;
  // path impedances of edges (0,1) and (1,2)
  for (const auto& L : f.lines)
    if ((L.from == 0 && L.to == 1) || (L.from == 1 && L.to == 2)) shared += L.r_pu;
  CHECK(s.r(8 - 1, 12 - 1) == Catch::Approx(shared / f.bases.v0_pu));
  CHECK(s.r(8 - 1, 12 - 1) == s.r(12 - 1, 8 - 1));
}

TEST_CASE("sensitivity matrices are symmetric and positive semidefinite") {
  FeederModel f = shipped_feeder();
  Sensitivity s = sensitivity_matrices(f);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(s.n);
    for (auto& v : x) v = u(rng);
    double qr = 0, qx = 0;
    for (int i = 0; i < s.n; ++i)
      for (int j = 0; j < s.n; ++j) {
        qr += x[i] * s.r(i, j) * x[j];
        qx += x[i] * s.x(i, j) * x[j];
        if (rep == 0) {
          CHECK(s.r(i, j) == s.r(j, i));
          CHECK(s.r(i, j) >= 0.0);
        }
      }
    CHECK(qr >= -1e-12);
    CHECK(qx >= -1e-12);
  }
}

TEST_CASE("zero injections reproduce the substation voltage") {
  FeederModel f = shipped_feeder();
  std::vector<double> p(f.n(), 0.0), q(f.n(), 0.0);
  auto v = ac_power_flow(f, p, q);
  for (double vi : v) CHECK(vi == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("positive injection raises downstream voltage") {
  FeederModel f = shipped_feeder();
  std::vector<double> p(f.n(), 0.0), q(f.n(), 0.0);
  p[20 - 1] = 0.2;
  auto v = ac_power_flow(f, p, q);
  CHECK(v[20 - 1] > 1.0);
  CHECK(v[1 - 1] > 1.0);  // upstream of the injection also rises
}

TEST_CASE("linearization agrees to first order on a single line") {
  write_file("t_lines3.csv", "from,to,r_ohm,x_ohm\n0,1,0.02,0.01\n");
  write_file("t_nodes3.csv", "node,s_max_kva,p_min_kw,p_max_kw,cost_a,cost_b\n1,10,0,10,3,1\n");
  FeederModel f = load_feeder("t_lines3.csv", "t_nodes3.csv", {1.0, 1.0, 1.0});
  Sensitivity s = sensitivity_matrices(f);
  double e1, e2;
  {
    auto vl = linear_voltages(s, {0.05}, {0.0});
    auto va = ac_power_flow(f, {0.05}, {0.0});
    e1 = std::abs(vl[0] - va[0]);
  }
  {
    auto vl = linear_voltages(s, {0.10}, {0.0});
    auto va = ac_power_flow(f, {0.10}, {0.0});
    e2 = std::abs(vl[0] - va[0]);
  }
  CHECK(e2 / std::max(e1, 1e-15) == Catch::Approx(4.0).margin(0.5));
  std::remove("t_lines3.csv");
  std::remove("t_nodes3.csv");
}

TEST_CASE("linear model tracks the sweep within 0.01 pu at rated loading") {
  FeederModel f = shipped_feeder();
  Sensitivity s = sensitivity_matrices(f);
  std::vector<double> p, q;
  rated_injections(f, p, q);
  int iters = 0;
  auto vac = ac_power_flow(f, p, q, 100, 1e-10, &iters);
  auto vlin = linear_voltages(s, p, q);
  double worst = 0;
  for (int i = 0; i < f.n(); ++i) worst = std::max(worst, std::abs(vac[i] - vlin[i]));
  CHECK(worst <= 0.01);
  CHECK(iters < 100);
  // the shipped scenario is an overvoltage case
  double vmax = *std::max_element(vac.begin(), vac.end());
  CHECK(vmax > 1.045);
}

TEST_CASE("sweep reports divergence instead of looping") {
  write_file("t_lines4.csv", "from,to,r_ohm,x_ohm\n0,1,0.9,0.4\n");
  write_file("t_nodes4.csv", "node,s_max_kva,p_min_kw,p_max_kw,cost_a,cost_b\n1,10,0,10,3,1\n");
  FeederModel f = load_feeder("t_lines4.csv", "t_nodes4.csv", {1.0, 1.0, 1.0});
  try {
    ac_power_flow(f, {-1.2}, {-0.8});  // load far beyond the line's capability
    FAIL("expected SweepDiverged");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::sweep_diverged);
  }
  std::remove("t_lines4.csv");
  std::remove("t_nodes4.csv");
}

TEST_CASE("slater warning fires when the reference voltage is out of band") {
  write_file("t_lines5.csv", "from,to,r_ohm,x_ohm\n0,1,0.01,0.01\n");
  write_file("t_nodes5.csv", "node,s_max_kva,p_min_kw,p_max_kw,cost_a,cost_b\n1,10,0,10,3,1\n");
  FeederModel f = load_feeder("t_lines5.csv", "t_nodes5.csv", {1.0, 1.0, 1.2});
  CHECK_FALSE(f.slater_ok);
  std::remove("t_lines5.csv");
  std::remove("t_nodes5.csv");
}
