#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>

#include "ahtsim/experiments.hpp"
#include "oracle.hpp"

using namespace ahtsim;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("log grids include both endpoints") {
  const auto g = log_grid(1e-4, 1e-1, 16);
  REQUIRE(g.size() == 16);
  CHECK(g.front() == 1e-4);
  CHECK(g.back() == 1e-1);
  CHECK(g[5] == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(log_grid(2.0, 2.0, 1) == std::vector<double>{2.0});
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("fidelity scan is deterministic and independent of the thread count") {
  FidelityScanParams p;
  p.tau_d = {1e-4, 1e-2};
  p.tau_dw = {1e-3, 3e-1};
  p.seeds = 2;
  p.threads = 1;
  const auto a = fidelity_scan(p);
  p.threads = 3;
  const auto b = fidelity_scan(p);
  CHECK(a.values == b.values);
  CHECK(a.values(0, 0) >= 0.999);
  CHECK(a.values(0, 1) < a.values(0, 0));
  CHECK(a.metadata.at("seeds") == nlohmann::json{1, 2});
  CHECK(fidelity_point(p, 1e-4, 1e-3) == a.values(0, 0));

  p.seeds = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.seeds = 1;
  p.cycle = "[Z,Y]";
  CHECK_THROWS_AS(p.validate(), NotationError);
}

TEST_CASE("super-WHH recouples the target pair at 8/9 and removes spectators") {
  for (std::size_t n : {3u, 4u}) {
    RecouplingParams p;
    p.n = n;
    p.k = 0;
    p.l = 1;
    p.coupling = 1.0;
    p.evolve = false;
    const auto r = recoupling_check(p);
    CHECK(r.target_pair == std::pair<std::size_t, std::size_t>{0, 1});
    CHECK(r.pairs.size() == n * (n - 1) / 2);
    for (const auto& pc : r.pairs) {
      CAPTURE(pc.a);
      CAPTURE(pc.b);
      CHECK(pc.deviation_norm == 0.0);
      if (pc.a == 0 && pc.b == 1) {
        CHECK(pc.effective.terms() == ((8.0 / 9.0) * heisenberg_pair(n, 0, 1, 1.0)).terms());
      } else {
        CHECK(pc.effective.empty());
      }
    }
    CHECK(r.max_spectator_deviation() == 0.0);
    CHECK_FALSE(r.target_fidelity.has_value());
  }
}

TEST_CASE("recoupled evolution follows the 8/9 Heisenberg coupling") {
  RecouplingParams p;
  p.n = 3;
  p.T = 1e-3;
  const auto r = recoupling_check(p);
  REQUIRE(r.target_fidelity.has_value());
  CHECK(*r.target_fidelity >= 0.99);
  CHECK(r.evolution_time == doctest::Approx(1.0).epsilon(0.05));
  CHECK(*r.spectator_infidelity < 1e-6);
  CHECK(*r.spectator_phase_error == doctest::Approx(std::acos(std::sqrt(1 - *r.spectator_infidelity))).epsilon(1e-6));
  p.k = p.l;
  CHECK_THROWS(recoupling_check(p));
}

TEST_CASE("chain couplings fall off as the inverse cube") {
  const auto m = chain_couplings(4, 2.0);
  CHECK(m(0, 1) == 2.0);
  CHECK(m(0, 2) == 0.25);
  CHECK(m(3, 0) == doctest::Approx(2.0 / 27));
  CHECK(m(2, 2) == 0.0);
}

TEST_CASE("selectivity of a soft pi pulse") {
  for (double ratio : {0.0, 0.5, 3.7, 10.0}) {
    const double w = 1e3;
    const auto s = selectivity_error(ratio * w, w);
    CAPTURE(ratio);
    CHECK(s.rotation_angle == doctest::Approx(kPi).epsilon(1e-12));
    // detuned Rabi flip probability of the neighbour
    const double q = 1 + ratio * ratio;
    const double expect = std::pow(std::sin(kPi * std::sqrt(q) / 2), 2) / q;
    CHECK(s.simulated == doctest::Approx(expect).epsilon(1e-6));
    const double x = kPi * ratio / 2;
    CHECK(s.predicted == doctest::Approx(ratio == 0 ? 1.0 : std::abs(std::sin(x) / x)).epsilon(1e-12));
  }
  CHECK(selectivity_error(0.0, 1.0).simulated == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(selectivity_error(10.0, 1.0).envelope == doctest::Approx(2.0 / (kPi * 10.0)));
  const auto half = selectivity_error(0.0, 1.0, kPi / 2);
  CHECK(half.rotation_angle == doctest::Approx(kPi / 2));
  CHECK(half.simulated == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("symmetry checks separate symmetric and asymmetric cycles") {
  const auto hd = dipolar_pair(3, 0, 2, 1.0) + dipolar_pair(3, 0, 1, 0.5);
  const auto whh = symmetry_order_check(expand_cycle(parse_mansfield("[Z,Y,X]"), 1e-6), hd);
  CHECK(whh.average_vanishes);
  CHECK(whh.magnus1_vanishes);
  CHECK(whh.average_norm == 0.0);
  const auto sym = symmetry_order_check(build_super_whh(3, 0, 1, 1e-3, SuperWhhMode::Symmetrized).merged, hd);
  CHECK(sym.magnus1_vanishes);
  CHECK_FALSE(sym.average_vanishes);
  const auto plain = symmetry_order_check(build_super_whh(3, 0, 1, 1e-3, SuperWhhMode::Plain).merged, hd);
  CHECK_FALSE(plain.magnus1_vanishes);
  CHECK(plain.magnus1_relative > 1e-6);
}
