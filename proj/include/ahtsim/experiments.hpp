#pragma once

// Packaged studies: the two-spin selective-rotation fidelity map, pair
// recoupling under super-WHH, the selectivity guide and symmetry checks.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ahtsim/aht.hpp"
#include "ahtsim/sequence.hpp"
#include "ahtsim/spin_algebra.hpp"

namespace ahtsim {

/// n values log-spaced over [lo, hi], endpoints included.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

/// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

struct GridAxis {
  std::string label;
  std::vector<double> values;
};

struct ScanResult {
  GridAxis x_axis;
  GridAxis y_axis;
  Eigen::MatrixXd values;  // values(i, j) at x_axis[i], y_axis[j]
  nlohmann::json metadata;
};

struct FidelityScanParams {
  std::vector<double> tau_d = log_grid(1e-4, 1e-1, 16);   // tau * D_jk
  std::vector<double> tau_dw = log_grid(1e-3, 1.0, 16);   // tau * dw_jk
  double tau = 1e-6;                                      // s
  std::string cycle{kMrev16Notation};
  std::size_t seeds = 3;
  std::uint64_t seed = 1;
  double phase = 0.7;            // rad
  double amplitude_ratio = 0.01; // w_RF / dw_jk
  double dt_fraction = 0.05;     // step bound as a fraction of the fastest period
  double dt_scale = 1.0;         // extra refinement factor for convergence checks
  unsigned threads = 0;

  void validate() const;
};

/// Two spins at offsets dw (j, driven) and 0 (k) with coupling D,
/// under the cycle and a resonant selective pi pulse on j lasting a whole
/// number of cycles. Each value is the mean fidelity between the exact and the
/// averaged-Hamiltonian evolution over the random initial states.
ScanResult fidelity_scan(const FidelityScanParams& p);

/// One grid point of the scan above.
double fidelity_point(const FidelityScanParams& p, double tau_d, double tau_dw);

struct PairCoupling {
  std::size_t a;
  std::size_t b;
  OperatorSum effective;
  OperatorSum expected;
  double deviation_norm;
};

struct RecouplingParams {
  std::size_t n = 3;
  std::size_t k = 0;
  std::size_t l = 1;
  double coupling = 1.0;  // D_kl, rad/s; other pairs fall off as 1/|i-j|^3 along a chain
  double T = 1e-3;        // s, slow WHH-4 spacing
  SuperWhhMode mode = SuperWhhMode::Symmetrized;
  PiTrain pi_train;       // nullopt: idealized
  std::vector<double> offsets;  // rad/s; empty means all zero
  bool evolve = true;
  double duration = 0.0;  // s; 0 means 1 / D_kl
  std::size_t seeds = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct RecouplingReport {
  std::pair<std::size_t, std::size_t> target_pair;
  std::vector<PairCoupling> pairs;
  double cycle_time = 0.0;
  std::size_t cycles = 0;
  double evolution_time = 0.0;
  /// Mean |<ideal|exact>|^2 with ideal = exp(-i (8/9) D I_k.I_l t) on the pair
  /// and the identity elsewhere.
  std::optional<double> target_fidelity;
  /// Mean 1 - <phi_m| rho_m |phi_m> over spectators m, where rho_m is the
  /// reduced state of spectator m and phi_m its initial product factor.
  std::optional<double> spectator_infidelity;
  /// Mean Bures angle arccos(sqrt(<phi_m|rho_m|phi_m>)) of the same quantity.
  std::optional<double> spectator_phase_error;

  double max_spectator_deviation() const;
};

RecouplingReport recoupling_check(const RecouplingParams& p);

/// Chain couplings D / |i-j|^3.
Eigen::MatrixXd chain_couplings(std::size_t n, double d);

struct SelectivityResult {
  double predicted;  // |sinc(pi dw / 2 w_RF)|
  double simulated;  // neighbor flip probability
  double rotation_angle;  // rad, target rotation actually applied
  double envelope;   // 2 w_RF / (pi dw), the sinc envelope
};

/// A soft pulse of amplitude w_RF resonant with one spin; the neighbor sits at
/// offset dw and starts spin up. duration <= 0 selects a pi rotation, pi / w_RF.
SelectivityResult selectivity_error(double delta_omega, double omega_rf, double duration = 0.0,
                                    double dt = 0.0);

struct SymmetryReport {
  double average_norm;
  double magnus1_norm;
  double average_relative;  // / |h|
  double magnus1_relative;  // / (|h|^2 t_c)
  bool average_vanishes;
  bool magnus1_vanishes;
};

SymmetryReport symmetry_order_check(const PulseSequence& seq, const OperatorSum& h,
                                    double tol = 1e-12);

}  // namespace ahtsim
