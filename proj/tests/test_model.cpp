#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ahtsim/model.hpp"
#include "oracle.hpp"

using namespace ahtsim;

TEST_CASE("Zeeman and dipolar terms have the expected words") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 1) = d(1, 0) = 2.0;
  d(1, 2) = d(2, 1) = 0.25;
  const SpinSystem sys({1.0, -2.0, 0.0}, d);
  const auto hz = build_zeeman(sys);
  CHECK(hz.size() == 2);
  CHECK(hz.coefficient(SpinWord::parse("ZEE")) == Complex(-1.0));
  CHECK(hz.coefficient(SpinWord::parse("EZE")) == Complex(2.0));
  const auto hd = build_dipolar(sys);
  CHECK(hd.size() == 6);
  CHECK(hd.coefficient(SpinWord::parse("ZZE")) == Complex(4.0));
  CHECK(hd.coefficient(SpinWord::parse("XXE")) == Complex(-2.0));
  CHECK(hd.coefficient(SpinWord::parse("EYY")) == Complex(-0.25));
  CHECK(oracle::dist(to_dense(hd), oracle::dipolar(3, 0, 1, 2.0) + oracle::dipolar(3, 1, 2, 0.25)) < 1e-14);
  CHECK(oracle::dist(to_dense(hz), -oracle::site_op(3, 0, 'Z') + 2.0 * oracle::site_op(3, 1, 'Z')) < 1e-15);
  CHECK(total_spin(3, Letter::Y).size() == 3);
  CHECK(oracle::dist(to_dense(heisenberg_pair(2, 0, 1, 1.5)),
                     1.5 * (oracle::word("XX") + oracle::word("YY") + oracle::word("ZZ"))) < 1e-15);
}

TEST_CASE("spin systems reject inconsistent data") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(SpinSystem({0.0, 1.0, 2.0}, bad), DimensionError);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(SpinSystem({0.0, 1.0}, bad), std::invalid_argument);
  bad(1, 0) = 1.0;
  bad(0, 0) = 0.5;
  CHECK_THROWS_AS(SpinSystem({0.0, 1.0}, bad), std::invalid_argument);
  CHECK_THROWS_AS(SpinSystem::uncoupled({0.0, NAN}), std::invalid_argument);
  CHECK(SpinSystem::uncoupled({1.0, 1.0}).coincident_offsets());
  CHECK_FALSE(SpinSystem::uncoupled({1.0, 2.0}).coincident_offsets());
}

TEST_CASE("dipolar constants follow the angular and r^-3 laws") {
  Geometry g;
  g.positions = {Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 0, 1e-8)};
  const double along = dipolar_constant(g, 0, 1);
  // two protons 10 nm apart along the field: of order 1 rad/s, negative
  const double expect = kMu0Over4Pi * kGammaProton * kGammaProton * kHbar * (1.0 - 3.0) / (2.0 * 1e-24);
  CHECK(along == doctest::Approx(expect).epsilon(1e-14));
  CHECK(along == doctest::Approx(-0.7547).epsilon(1e-3));

  g.positions[1] = Eigen::Vector3d(0, 0, 2e-8);
  CHECK(dipolar_constant(g, 0, 1) == doctest::Approx(along / 8.0).epsilon(1e-14));

  const double magic = std::acos(1.0 / std::sqrt(3.0));
  g.positions[1] = 1e-8 * Eigen::Vector3d(std::sin(magic), 0, std::cos(magic));
  CHECK(std::abs(dipolar_constant(g, 0, 1)) < 1e-15);

  g.positions[1] = Eigen::Vector3d(1e-8, 0, 0);
  CHECK(dipolar_constant(g, 0, 1) == doctest::Approx(-along / 2.0).epsilon(1e-14));

  CHECK_THROWS_AS(dipolar_constant(g, 0, 0), std::invalid_argument);
  g.positions[1] = Eigen::Vector3d::Zero();
  CHECK_THROWS(dipolar_constant(g, 0, 1));

  Geometry tri;
  tri.positions = {Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 0, 1e-9), Eigen::Vector3d(1e-9, 0, 0)};
  const auto sys = SpinSystem::from_geometry(tri, {0.0, 0.0, 0.0});
  CHECK(sys.coupling(0, 1) == doctest::Approx(dipolar_constant(tri, 0, 1)));
  CHECK(sys.coupling(2, 0) == sys.coupling(0, 2));
  CHECK_THROWS_AS(SpinSystem::from_geometry(tri, {0.0}), DimensionError);
}

TEST_CASE("drive Hamiltonian at the start and a quarter period later") {
  const auto sys = SpinSystem::uncoupled({0.0, 3.0});
  SelectiveDrive d;
  d.target = 1;
  d.amplitude = 0.5;
  d.carrier_offset = 3.0;
  d.phase = 0.0;
  d.start = 1.0;
  d.duration = 10.0;
  const auto h0 = drive_hamiltonian(d, sys, 1.0);
  CHECK(frobenius_norm(h0 + 0.5 * total_spin(2, Letter::X)) < 1e-15);
  const double quarter = 1.0 + std::numbers::pi / 2 / 3.0;
  const auto hq = drive_hamiltonian(d, sys, quarter);
  CHECK(frobenius_norm(hq - 0.5 * total_spin(2, Letter::Y)) < 1e-14);
  CHECK(drive_hamiltonian(d, sys, 0.5).empty());
  CHECK(drive_hamiltonian(d, sys, 11.0).empty());
  d.phase = std::numbers::pi / 2;
  CHECK(frobenius_norm(drive_hamiltonian(d, sys, 1.0) + 0.5 * total_spin(2, Letter::Y)) < 1e-14);
  CHECK(drive_hamiltonian(d, sys, 2.0).is_hermitian());

  SelectiveDrive bad = d;
  bad.target = 2;
  CHECK_THROWS_AS(bad.validate(2), std::out_of_range);
  bad = d;
  bad.duration = 0.0;
  CHECK_THROWS_AS(bad.validate(2), std::invalid_argument);
}
