#pragma once

// Exact state evolution under pulses, free evolution and selective drives,
// plus the average-Hamiltonian reference propagator.

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "ahtsim/model.hpp"
#include "ahtsim/sequence.hpp"
#include "ahtsim/spin_algebra.hpp"

namespace ahtsim {

/// Amplitudes over 2^n basis states; site 0 is the most significant bit and
/// bit value 0 is spin up.
using StateVector = Eigen::VectorXcd;

struct TrajectorySample {
  double time;
  StateVector state;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;

  const StateVector& final_state() const { return samples.back().state; }
};

/// exp(-i h t) for Hermitian h.
Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& h, double t);

/// exp(-i angle axis.sigma/2) as a 2x2 matrix.
Eigen::Matrix2cd spin_rotation(const Eigen::Vector3d& axis, double angle);

/// Applies a one-site unitary to every column of `states`.
void apply_site_unitary(Eigen::MatrixXcd& states, std::size_t n, std::size_t site,
                        const Eigen::Matrix2cd& u);

/// Repeats a pulse sequence under H_Z + H_D plus selective drives. Many states
/// can be carried at once as matrix columns.
class ExactPropagator {
 public:
  /// dt bounds the midpoint step inside drive windows; each drive segment is
  /// split into ceil(length / dt) equal steps.
  ExactPropagator(const SpinSystem& system, const PulseSequence& seq,
                  std::vector<SelectiveDrive> drives, double dt);

  std::size_t spin_count() const { return n_; }
  double dt() const { return dt_; }

  /// States at every cycle boundary (t = 0 included) and at each extra time.
  Trajectory evolve(const StateVector& psi0, std::size_t cycles,
                    const std::vector<double>& extra_times = {});

  /// Final states after `cycles` repetitions, one column per state.
  Eigen::MatrixXcd evolve_columns(Eigen::MatrixXcd states, std::size_t cycles);

 private:
  using SampleHook = void (*)(void*, double, const Eigen::MatrixXcd&);

  void run(Eigen::MatrixXcd& states, std::size_t cycles, const std::vector<double>& stops,
           void* ctx, SampleHook hook);
  void free_segment(Eigen::MatrixXcd& states, double a, double b);
  const Eigen::MatrixXcd& static_propagator(double duration);

  std::size_t n_;
  std::size_t dim_;
  PulseSequence seq_;
  std::vector<SelectiveDrive> drives_;
  double dt_;
  Eigen::MatrixXcd h0_;
  Eigen::MatrixXcd sx_;
  Eigen::MatrixXcd sy_;
  Eigen::MatrixXcd eigvecs_;
  Eigen::VectorXd eigvals_;
  std::map<double, Eigen::MatrixXcd> cache_;
};

Trajectory exact_evolve(const SpinSystem& system, const PulseSequence& seq,
                        const std::vector<SelectiveDrive>& drives, double dt,
                        const StateVector& psi0, std::size_t cycles = 1);

/// exp(-i hz_bar t) exp(-i hsec_bar t) psi0
StateVector aht_evolve(const OperatorSum& hz_bar, const OperatorSum& hsec_bar, double t,
                       const StateVector& psi0);

/// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);

/// Normalized vector of independent complex Gaussians from mt19937_64.
StateVector random_state(std::uint64_t seed, std::size_t n);

/// Tensor product of single-spin states, site 0 first.
StateVector product_state(const std::vector<Eigen::Vector2cd>& spins);

/// Reduced density matrix on the listed sites (ascending).
Eigen::MatrixXcd reduced_density(const StateVector& psi, std::size_t n,
                                 const std::vector<std::size_t>& keep);

/// Rescales to unit norm and logs the correction.
void renormalize(StateVector& psi);

}  // namespace ahtsim
