#pragma once

// Toggling-frame bookkeeping and average Hamiltonian theory: zeroth-order
// averages, the first Magnus correction, offset-averaging vectors and the
// secular selective drive.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ahtsim/sequence.hpp"
#include "ahtsim/spin_algebra.hpp"

namespace ahtsim {

struct TogglingInterval {
  double duration;     // s
  FrameRotation frame; // composition of every delta rotation before the interval
  OperatorSum hamiltonian;
};

struct TogglingFrame {
  std::vector<TogglingInterval> intervals;
  FrameRotation final_frame;
  double cycle_time = 0.0;
};

/// Toggled Hamiltonian U^dag h U for each free interval. Selective pulses take
/// part, so W subcycles land in the second-toggled frame. Drive windows are
/// ignored here.
TogglingFrame toggling_frames(const PulseSequence& seq, const OperatorSum& h);

/// Zeroth-order average. Clifford cycles with commensurate durations are
/// summed on integer tick weights with an exactly rounded final sum, so terms
/// that cancel analytically come out as exact zeros.
OperatorSum average0(const PulseSequence& seq, const OperatorSum& h);
OperatorSum average0(const TogglingFrame& frames);

/// First Magnus term (-i / 2t_c) sum_{j>i} d_j d_i [H_j, H_i].
OperatorSum magnus1(const PulseSequence& seq, const OperatorSum& h);
OperatorSum magnus1(const TogglingFrame& frames);

struct OffsetVectors {
  Eigen::Vector3d zeta = Eigen::Vector3d::Zero();  // from I^z
  Eigen::Vector3d xi = Eigen::Vector3d::Zero();    // from I^x
  Eigen::Vector3d eta = Eigen::Vector3d::Zero();   // from I^y
};

/// Single-site averaging coefficients of a pure broadband cycle.
OffsetVectors offset_vectors(const PulseSequence& seq);

/// Secular part of a resonant selective drive on `target` in the frame of the
/// averaged Zeeman term:
///   -(w/2) I_l . [cos(phi) (xi_perp - zhat x eta) + sin(phi) (eta_perp + zhat x xi)]
/// with perp taken against zhat. Resonance is dw' = |zeta| dw_l.
OperatorSum secular_selective(const OffsetVectors& v, double amplitude, double phase,
                              std::size_t target, std::size_t n);

/// Carrier offset that puts a selective drive on resonance with spin offset dw.
double resonant_carrier(const OffsetVectors& v, double offset);

/// Two-spin effective coupling from averaging W_k(alpha), W_l(beta) over a
/// secular dipolar pair of strength d.
OperatorSum effective_pair_coupling(std::optional<Axis> alpha, std::optional<Axis> beta, double d);

/// Exactly rounded sum of doubles.
double exact_sum(const std::vector<double>& values);

}  // namespace ahtsim
