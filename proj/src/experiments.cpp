#include "ahtsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "ahtsim/model.hpp"
#include "ahtsim/propagator.hpp"

namespace ahtsim {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n == 0) throw std::invalid_argument("grid needs at least one point");
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log grid needs 0 < lo <= hi");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Fidelity map

void FidelityScanParams::validate() const {
  if (tau_d.empty() || tau_dw.empty()) throw std::invalid_argument("scan grid is empty");
  for (double v : tau_d) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("tau_D values must be >= 0");
  }
  for (double v : tau_dw) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("tau_dw values must be > 0");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (seeds == 0) throw std::invalid_argument("need at least one seed");
  if (!(amplitude_ratio > 0.0)) throw std::invalid_argument("amplitude ratio must be > 0");
  if (!(dt_fraction > 0.0) || !(dt_scale > 0.0)) throw std::invalid_argument("dt factors must be > 0");
  parse_mansfield(cycle);
}

namespace {

struct ScanPoint {
  SpinSystem system;
  PulseSequence seq;
  SelectiveDrive drive;
  OperatorSum hz_bar;
  OperatorSum hsec_bar;
  std::size_t cycles;
  double dt;
};

ScanPoint scan_point(const FidelityScanParams& p, double tau_d, double tau_dw) {
  const double d = tau_d / p.tau;
  const double dw = tau_dw / p.tau;
  Eigen::MatrixXd couplings{{0.0, d}, {d, 0.0}};
  // k sits on the broadband carrier. With offsets +-dw/2 the counter-rotating
  // part of the averaged drive would be resonant with k, since dw_j + dw_k = 0.
  SpinSystem system({dw, 0.0}, couplings);
  PulseSequence seq = expand_cycle(parse_mansfield(p.cycle), p.tau);
  const OffsetVectors v = offset_vectors(seq);

  const double omega = p.amplitude_ratio * dw;
  OperatorSum hsec = secular_selective(v, omega, p.phase, 0, 2);
  // rotation rate of the secular drive; a pi rotation fixes the window
  double rate = 0.0;
  for (const auto& [w, c] : hsec.terms()) rate += std::norm(c);
  rate = std::sqrt(rate);
  const double t_pi = std::numbers::pi / rate;
  const double tc = seq.cycle_time();
  const auto cycles = static_cast<std::size_t>(std::max(1LL, std::llround(t_pi / tc)));

  SelectiveDrive drive;
  drive.target = 0;
  drive.amplitude = omega;
  drive.carrier_offset = resonant_carrier(v, system.offset(0));
  drive.phase = p.phase;
  drive.start = 0.0;
  drive.duration = static_cast<double>(cycles) * tc;

  const double fastest = std::max(std::abs(dw), omega);
  const double dt = std::min(p.tau, p.dt_fraction * 2.0 * std::numbers::pi / fastest) * p.dt_scale;
  OperatorSum hz = average0(seq, build_zeeman(system));
  return {system, seq, drive, hz, hsec, cycles, dt};
}

}  // namespace

double fidelity_point(const FidelityScanParams& p, double tau_d, double tau_dw) {
  const ScanPoint sp = scan_point(p, tau_d, tau_dw);
  Eigen::MatrixXcd states(4, static_cast<Eigen::Index>(p.seeds));
  for (std::size_t s = 0; s < p.seeds; ++s) {
    states.col(static_cast<Eigen::Index>(s)) = random_state(p.seed + s, 2);
  }
  ExactPropagator prop(sp.system, sp.seq, {sp.drive}, sp.dt);
  const Eigen::MatrixXcd exact = prop.evolve_columns(states, sp.cycles);
  const double t = sp.drive.duration;
  double sum = 0.0;
  for (std::size_t s = 0; s < p.seeds; ++s) {
    const auto c = static_cast<Eigen::Index>(s);
    const StateVector ref = aht_evolve(sp.hz_bar, sp.hsec_bar, t, states.col(c));
    StateVector out = exact.col(c);
    renormalize(out);
    sum += fidelity(ref, out);
  }
  return sum / static_cast<double>(p.seeds);
}

ScanResult fidelity_scan(const FidelityScanParams& p) {
  p.validate();
  ScanResult r;
  r.x_axis = {"tau_D", p.tau_d};
  r.y_axis = {"tau_dw", p.tau_dw};
  const auto nx = static_cast<Eigen::Index>(p.tau_d.size());
  const auto ny = static_cast<Eigen::Index>(p.tau_dw.size());
  r.values = Eigen::MatrixXd::Zero(nx, ny);
  parallel_for(p.tau_d.size() * p.tau_dw.size(), p.threads, [&](std::size_t idx) {
    const std::size_t i = idx / p.tau_dw.size();
    const std::size_t j = idx % p.tau_dw.size();
    r.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        fidelity_point(p, p.tau_d[i], p.tau_dw[j]);
  });
  if (!r.values.allFinite()) throw std::runtime_error("fidelity scan produced non-finite values");

  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < p.seeds; ++s) seeds.push_back(p.seed + s);
  r.metadata = {
      {"experiment", "fidelity-scan"},
      {"sequence", p.cycle},
      {"tau_s", p.tau},
      {"seeds", seeds},
      {"phase_rad", p.phase},
      {"amplitude_ratio", p.amplitude_ratio},
      {"drive_target", 0},
      {"offsets", "dw_j = dw (driven), dw_k = 0"},
      {"drive_window", "whole cycles nearest to a pi rotation"},
      {"dt_rule", "min(tau, dt_fraction * 2pi / max(|dw_k|, w_RF)) * dt_scale"},
      {"dt_fraction", p.dt_fraction},
      {"dt_scale", p.dt_scale},
      {"fidelity", "|<aht|exact>|^2 averaged over seeds"},
  };
  return r;
}

// ---------------------------------------------------------------------------
// Recoupling

void RecouplingParams::validate() const {
  if (n < 2) throw std::invalid_argument("recoupling needs at least two spins");
  if (k >= n || l >= n || k == l) throw std::out_of_range("invalid recoupling pair");
  if (!(coupling > 0.0)) throw std::invalid_argument("coupling must be > 0");
  if (!(T > 0.0)) throw std::invalid_argument("T must be > 0");
  if (!offsets.empty() && offsets.size() != n) {
    throw std::invalid_argument("offsets must list one value per spin");
  }
  if (duration < 0.0) throw std::invalid_argument("duration must be >= 0");
  if (evolve && seeds == 0) throw std::invalid_argument("need at least one seed");
}

Eigen::MatrixXd chain_couplings(std::size_t n, double d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = std::abs(static_cast<double>(i) - static_cast<double>(j));
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d / (r * r * r);
    }
  }
  return m;
}

double RecouplingReport::max_spectator_deviation() const {
  double worst = 0.0;
  for (const auto& pc : pairs) {
    const bool target = (pc.a == target_pair.first && pc.b == target_pair.second) ||
                        (pc.a == target_pair.second && pc.b == target_pair.first);
    if (!target) worst = std::max(worst, pc.deviation_norm);
  }
  return worst;
}

RecouplingReport recoupling_check(const RecouplingParams& p) {
  p.validate();
  const double r = std::abs(static_cast<double>(p.k) - static_cast<double>(p.l));
  const Eigen::MatrixXd couplings = chain_couplings(p.n, p.coupling * r * r * r);
  const double dkl = couplings(static_cast<Eigen::Index>(p.k), static_cast<Eigen::Index>(p.l));
  SpinSystem system(p.offsets.empty() ? std::vector<double>(p.n, 0.0) : p.offsets, couplings);

  const SuperWhh sw = build_super_whh(p.n, p.k, p.l, p.T, p.mode, p.pi_train);
  RecouplingReport rep;
  rep.target_pair = {p.k, p.l};
  rep.cycle_time = sw.merged.cycle_time();

  const std::size_t lo = std::min(p.k, p.l);
  const std::size_t hi = std::max(p.k, p.l);
  const OperatorSum target_ideal = heisenberg_pair(p.n, lo, hi, 8.0 / 9.0 * dkl);
  for (std::size_t a = 0; a < p.n; ++a) {
    for (std::size_t b = a + 1; b < p.n; ++b) {
      const double d = couplings(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      OperatorSum eff = average0(sw.merged, dipolar_pair(p.n, a, b, d));
      OperatorSum expected = (a == lo && b == hi) ? target_ideal : OperatorSum(p.n);
      const double dev = frobenius_norm(eff - expected);
      rep.pairs.push_back({a, b, std::move(eff), std::move(expected), dev});
    }
  }
  if (!p.evolve) return rep;

  const double t_goal = p.duration > 0.0 ? p.duration : 1.0 / dkl;
  rep.cycles = static_cast<std::size_t>(std::max(1LL, std::llround(t_goal / rep.cycle_time)));
  rep.evolution_time = static_cast<double>(rep.cycles) * rep.cycle_time;

  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << p.n);
  Eigen::MatrixXcd states(dim, static_cast<Eigen::Index>(p.seeds));
  std::vector<std::vector<Eigen::Vector2cd>> factors(p.seeds);
  for (std::size_t s = 0; s < p.seeds; ++s) {
    for (std::size_t m = 0; m < p.n; ++m) {
      factors[s].push_back(random_state(p.seed + s * p.n + m, 1));
    }
    states.col(static_cast<Eigen::Index>(s)) = product_state(factors[s]);
  }
  ExactPropagator prop(system, sw.merged, {}, p.T);
  const Eigen::MatrixXcd exact = prop.evolve_columns(states, rep.cycles);
  const Eigen::MatrixXcd u_ideal = expm_hermitian(to_dense(target_ideal), rep.evolution_time);

  double fid = 0.0;
  double infid = 0.0;
  double angle = 0.0;
  std::size_t spectator_samples = 0;
  for (std::size_t s = 0; s < p.seeds; ++s) {
    const auto c = static_cast<Eigen::Index>(s);
    StateVector out = exact.col(c);
    renormalize(out);
    const StateVector ideal = u_ideal * states.col(c);
    fid += fidelity(ideal, out);
    for (std::size_t m = 0; m < p.n; ++m) {
      if (m == p.k || m == p.l) continue;
      const Eigen::MatrixXcd rho = reduced_density(out, p.n, {m});
      const Eigen::Vector2cd& phi = factors[s][m];
      const double overlap = std::clamp((phi.adjoint() * rho * phi)(0, 0).real(), 0.0, 1.0);
      infid += 1.0 - overlap;
      angle += std::acos(std::sqrt(overlap));
      ++spectator_samples;
    }
  }
  rep.target_fidelity = fid / static_cast<double>(p.seeds);
  if (spectator_samples > 0) {
    rep.spectator_infidelity = infid / static_cast<double>(spectator_samples);
    rep.spectator_phase_error = angle / static_cast<double>(spectator_samples);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Selectivity guide

SelectivityResult selectivity_error(double delta_omega, double omega_rf, double duration,
                                    double dt) {
  if (!(omega_rf > 0.0)) throw std::invalid_argument("selective amplitude must be > 0");
  if (duration <= 0.0) duration = std::numbers::pi / omega_rf;
  if (dt <= 0.0) {
    const double fastest = std::max(std::abs(delta_omega), omega_rf);
    dt = std::min(duration / 64.0, 0.05 * 2.0 * std::numbers::pi / fastest);
  }

  SelectivityResult r{};
  const double x = std::numbers::pi * delta_omega / (2.0 * omega_rf);
  r.predicted = x == 0.0 ? 1.0 : std::abs(std::sin(x) / x);
  r.envelope = x == 0.0 ? 1.0 : std::min(1.0, 1.0 / std::abs(x));

  Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(2, 2);
  SpinSystem system({0.0, delta_omega}, couplings);
  PulseSequence seq;
  seq.add_free(duration);
  SelectiveDrive drive;
  drive.target = 0;
  drive.amplitude = omega_rf;
  drive.duration = duration;

  ExactPropagator prop(system, seq, {drive}, dt);
  const Eigen::Vector2cd up(1.0, 0.0);
  StateVector out = prop.evolve_columns(product_state({up, up}), 1).col(0);
  renormalize(out);
  const Eigen::MatrixXcd target = reduced_density(out, 2, {0});
  const Eigen::MatrixXcd neighbor = reduced_density(out, 2, {1});
  r.simulated = std::clamp(neighbor(1, 1).real(), 0.0, 1.0);
  r.rotation_angle = 2.0 * std::asin(std::sqrt(std::clamp(target(1, 1).real(), 0.0, 1.0)));
  return r;
}

// ---------------------------------------------------------------------------

SymmetryReport symmetry_order_check(const PulseSequence& seq, const OperatorSum& h, double tol) {
  const TogglingFrame frames = toggling_frames(seq, h);
  SymmetryReport r{};
  r.average_norm = frobenius_norm(average0(seq, h));
  r.magnus1_norm = frobenius_norm(magnus1(frames));
  const double hn = frobenius_norm(h);
  const double scale0 = hn > 0.0 ? hn : 1.0;
  const double scale1 = hn > 0.0 ? hn * hn * frames.cycle_time : 1.0;
  r.average_relative = r.average_norm / scale0;
  r.magnus1_relative = r.magnus1_norm / scale1;
  r.average_vanishes = r.average_relative <= tol;
  r.magnus1_vanishes = r.magnus1_relative <= tol;
  return r;
}

}  // namespace ahtsim
