#pragma once

// Physical Hamiltonians in the rotating frame of the broadband carrier.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ahtsim/spin_algebra.hpp"

namespace ahtsim {

inline constexpr double kMu0Over4Pi = 1e-7;             // T^2 m^3 / J
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kGammaProton = 2.6752218744e8;  // rad / (s T)

/// Spin positions for deriving dipolar constants. The field axis is the
/// quantization (z) axis.
struct Geometry {
  std::vector<Eigen::Vector3d> positions;  // m
  double gamma = kGammaProton;             // rad s^-1 T^-1
  Eigen::Vector3d field_axis = Eigen::Vector3d::UnitZ();

  void validate() const;
};

/// Rotating-frame offsets dw_k and secular dipolar constants D_kl, both rad/s.
class SpinSystem {
 public:
  SpinSystem() = default;
  SpinSystem(std::vector<double> offsets, Eigen::MatrixXd couplings);

  static SpinSystem uncoupled(std::vector<double> offsets);
  static SpinSystem from_geometry(const Geometry& geometry, std::vector<double> offsets);

  std::size_t size() const { return offsets_.size(); }
  const std::vector<double>& offsets() const { return offsets_; }
  double offset(std::size_t k) const { return offsets_.at(k); }
  const Eigen::MatrixXd& couplings() const { return couplings_; }
  double coupling(std::size_t k, std::size_t l) const { return couplings_(k, l); }

  /// Set when two offsets coincide, so no selective drive can tell them apart.
  bool coincident_offsets() const { return coincident_; }

 private:
  std::vector<double> offsets_;
  Eigen::MatrixXd couplings_;
  bool coincident_ = false;
};

/// Selective RF drive aimed at spin `target`: amplitude w_RF, carrier offset
/// dw' relative to the broadband carrier, and phase phi.
struct SelectiveDrive {
  std::size_t target = 0;
  double amplitude = 0.0;       // rad/s
  double carrier_offset = 0.0;  // rad/s
  double phase = 0.0;           // rad
  double start = 0.0;           // s
  double duration = 0.0;        // s

  double end() const { return start + duration; }
  bool active_at(double t) const { return t >= start && t < end(); }
  void validate(std::size_t n) const;
};

/// -sum_k dw_k I^z_k
OperatorSum build_zeeman(const SpinSystem& system);

/// sum_{k<l} D_kl (2 I^z_k I^z_l - I^x_k I^x_l - I^y_k I^y_l)
OperatorSum build_dipolar(const SpinSystem& system);

/// Secular dipolar coupling of one pair with constant d.
OperatorSum dipolar_pair(std::size_t n, std::size_t k, std::size_t l, double d);

/// Isotropic coupling I_k . I_l.
OperatorSum heisenberg_pair(std::size_t n, std::size_t k, std::size_t l, double j);

/// sum_k I^a_k for one letter.
OperatorSum total_spin(std::size_t n, Letter l);

/// (mu0 / 4pi) gamma^2 hbar (1 - 3 cos^2 theta) / (2 r^3) in rad/s.
double dipolar_constant(const Geometry& geometry, std::size_t k, std::size_t l);

/// Instantaneous drive term; every spin couples to the field. Empty outside
/// the drive window.
OperatorSum drive_hamiltonian(const SelectiveDrive& drive, const SpinSystem& system, double t);

}  // namespace ahtsim
