#include "ahtsim/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace ahtsim {

namespace {

constexpr double kNormTolerance = 1e-8;
constexpr std::size_t kCacheLimit = 512;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dim(const Eigen::MatrixXcd& op, Eigen::Index dim) {
  if (op.rows() != dim) throw DimensionError("operator and state dimensions differ");
}

Eigen::MatrixXcd dense_sum(std::size_t n, Letter l) { return to_dense(total_spin(n, l)); }

}  // namespace

Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& h, double t) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd phases =
      (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::Matrix2cd spin_rotation(const Eigen::Vector3d& axis, double angle) {
  const Eigen::Vector3d a = axis.normalized();
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd u;
  u(0, 0) = c - i * s * a.z();
  u(1, 1) = c + i * s * a.z();
  u(0, 1) = -i * s * Complex(a.x(), -a.y());
  u(1, 0) = -i * s * Complex(a.x(), a.y());
  return u;
}

void apply_site_unitary(Eigen::MatrixXcd& states, std::size_t n, std::size_t site,
                        const Eigen::Matrix2cd& u) {
  if (site >= n) throw DimensionError("pulse site out of range");
  const std::size_t dim = std::size_t{1} << n;
  if (static_cast<std::size_t>(states.rows()) != dim) {
    throw DimensionError("state dimension does not match spin count");
  }
  const std::size_t bit = std::size_t{1} << (n - 1 - site);
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    auto col = states.col(c);
    for (std::size_t i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const auto i0 = static_cast<Eigen::Index>(i);
      const auto i1 = static_cast<Eigen::Index>(i | bit);
      const Complex a0 = col(i0);
      const Complex a1 = col(i1);
      col(i0) = u(0, 0) * a0 + u(0, 1) * a1;
      col(i1) = u(1, 0) * a0 + u(1, 1) * a1;
    }
  }
}

// ---------------------------------------------------------------------------

ExactPropagator::ExactPropagator(const SpinSystem& system, const PulseSequence& seq,
                                 std::vector<SelectiveDrive> drives, double dt)
    : n_(system.size()), dim_(std::size_t{1} << system.size()), seq_(seq),
      drives_(std::move(drives)), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (n_ == 0) throw DimensionError("empty spin system");
  if (seq.min_spin_count() > n_) throw DimensionError("sequence addresses missing spins");
  for (const auto& d : drives_) d.validate(n_);

  OperatorSum h = build_dipolar(system);
  if (!seq.zeeman_suppressed()) h += build_zeeman(system);
  h0_ = to_dense(h);
  sx_ = dense_sum(n_, Letter::X);
  sy_ = dense_sum(n_, Letter::Y);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h0_);
  eigvecs_ = es.eigenvectors();
  eigvals_ = es.eigenvalues();

  double fastest = 0.0;
  for (double w : system.offsets()) fastest = std::max(fastest, std::abs(w));
  for (const auto& d : drives_) fastest = std::max(fastest, std::abs(d.amplitude));
  if (!drives_.empty() && fastest > 0.0 && dt_ > 2.0 * std::numbers::pi / fastest / 20.0 * (1.0 + 1e-12)) {
    spdlog::warn("dt = {} exceeds 1/20 of the fastest period {}", dt_, 2.0 * std::numbers::pi / fastest);
  }
}

const Eigen::MatrixXcd& ExactPropagator::static_propagator(double duration) {
  auto it = cache_.find(duration);
  if (it != cache_.end()) return it->second;
  if (cache_.size() >= kCacheLimit) cache_.clear();
  const Eigen::VectorXcd phases =
      (eigvals_.cast<Complex>() * Complex(0.0, -duration)).array().exp().matrix();
  return cache_.emplace(duration, eigvecs_ * phases.asDiagonal() * eigvecs_.adjoint())
      .first->second;
}

void ExactPropagator::free_segment(Eigen::MatrixXcd& states, double a, double b) {
  const double mid = 0.5 * (a + b);
  std::vector<const SelectiveDrive*> active;
  for (const auto& d : drives_) {
    if (d.amplitude != 0.0 && d.active_at(mid)) active.push_back(&d);
  }
  if (active.empty()) {
    states = static_propagator(b - a) * states;
    return;
  }
  const auto steps = static_cast<long>(std::ceil((b - a) / dt_ * (1.0 - 1e-12)));
  const long m = std::max(1L, steps);
  const double h = (b - a) / static_cast<double>(m);
  for (long k = 0; k < m; ++k) {
    const double t = a + (static_cast<double>(k) + 0.5) * h;
    Eigen::MatrixXcd ham = h0_;
    for (const auto* d : active) {
      const double theta = d->carrier_offset * (t - d->start) - d->phase;
      ham += (-d->amplitude * std::cos(theta)) * sx_ + (d->amplitude * std::sin(theta)) * sy_;
    }
    states = expm_hermitian(ham, h) * states;
  }
}

void ExactPropagator::run(Eigen::MatrixXcd& states, std::size_t cycles,
                          const std::vector<double>& stops, void* ctx, SampleHook hook) {
  if (static_cast<std::size_t>(states.rows()) != dim_) {
    throw DimensionError("state dimension does not match spin count");
  }
  // Segment boundaries inside free intervals: drive edges and extra samples.
  std::vector<double> cuts = stops;
  for (const auto& d : drives_) {
    cuts.push_back(d.start);
    cuts.push_back(d.end());
  }
  std::sort(cuts.begin(), cuts.end());

  double t = 0.0;
  if (hook) hook(ctx, t, states);
  for (std::size_t c = 0; c < cycles; ++c) {
    for (const auto& e : seq_.events()) {
      std::visit(Overloaded{
                     [&](const BroadbandPulse& p) {
                       const Eigen::Matrix2cd u = spin_rotation(p.rotation.axis, p.rotation.angle);
                       for (std::size_t s = 0; s < n_; ++s) apply_site_unitary(states, n_, s, u);
                     },
                     [&](const SelectivePulse& p) {
                       apply_site_unitary(states, n_, p.rotation.site,
                                          spin_rotation(p.rotation.axis, p.rotation.angle));
                     },
                     [&](const FreeEvolution& f) {
                       const double end = t + f.duration;
                       double a = t;
                       auto it = std::upper_bound(cuts.begin(), cuts.end(), a);
                       while (it != cuts.end() && *it < end) {
                         free_segment(states, a, *it);
                         a = *it;
                         if (hook && std::binary_search(stops.begin(), stops.end(), a)) {
                           hook(ctx, a, states);
                         }
                         ++it;
                       }
                       free_segment(states, a, end);
                       t = end;
                     },
                     [&](const DriveWindow&) {},
                 },
                 e);
    }
    if (hook) hook(ctx, t, states);
  }
}

Trajectory ExactPropagator::evolve(const StateVector& psi0, std::size_t cycles,
                                   const std::vector<double>& extra_times) {
  std::vector<double> stops = extra_times;
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  Eigen::MatrixXcd states = psi0;
  Trajectory traj;
  auto hook = [](void* ctx, double time, const Eigen::MatrixXcd& s) {
    auto& samples = static_cast<Trajectory*>(ctx)->samples;
    if (!samples.empty() && time <= samples.back().time) return;
    samples.push_back({time, s.col(0)});
  };
  run(states, cycles, stops, &traj, hook);
  return traj;
}

Eigen::MatrixXcd ExactPropagator::evolve_columns(Eigen::MatrixXcd states, std::size_t cycles) {
  run(states, cycles, {}, nullptr, nullptr);
  return states;
}

Trajectory exact_evolve(const SpinSystem& system, const PulseSequence& seq,
                        const std::vector<SelectiveDrive>& drives, double dt,
                        const StateVector& psi0, std::size_t cycles) {
  ExactPropagator prop(system, seq, drives, dt);
  return prop.evolve(psi0, cycles);
}

StateVector aht_evolve(const OperatorSum& hz_bar, const OperatorSum& hsec_bar, double t,
                       const StateVector& psi0) {
  if (hz_bar.spin_count() != hsec_bar.spin_count()) {
    throw DimensionError("averaged Hamiltonians act on different spin counts");
  }
  const Eigen::MatrixXcd hz = to_dense(hz_bar);
  const Eigen::MatrixXcd hs = to_dense(hsec_bar);
  check_dim(hz, psi0.size());
  return expm_hermitian(hz, t) * (expm_hermitian(hs, t) * psi0);
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw DimensionError("fidelity of states with different dimension");
  if (std::abs(a.norm() - 1.0) > kNormTolerance || std::abs(b.norm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("fidelity needs unit-norm states");
  }
  return std::min(1.0, std::norm(a.dot(b)));
}

StateVector random_state(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw DimensionError("random state needs at least one spin");
  if (n > kDefaultDenseCap) throw DimensionError("random state exceeds the dense cap");
  std::mt19937_64 rng(seed);
  // uniform in (0, 1] from the top 53 bits; Box-Muller keeps the stream
  // identical across standard libraries
  auto uniform = [&rng] { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53; };
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  StateVector psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    psi(i) = Complex(r * std::cos(phi), r * std::sin(phi));
  }
  psi.normalize();
  return psi;
}

StateVector product_state(const std::vector<Eigen::Vector2cd>& spins) {
  if (spins.empty()) throw DimensionError("product state needs at least one spin");
  StateVector psi = StateVector::Ones(1);
  for (const auto& s : spins) {
    StateVector next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      next(2 * i) = psi(i) * s(0);
      next(2 * i + 1) = psi(i) * s(1);
    }
    psi = std::move(next);
  }
  return psi;
}

Eigen::MatrixXcd reduced_density(const StateVector& psi, std::size_t n,
                                 const std::vector<std::size_t>& keep) {
  if (psi.size() != static_cast<Eigen::Index>(std::size_t{1} << n)) {
    throw DimensionError("state dimension does not match spin count");
  }
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= n || (i > 0 && keep[i] <= keep[i - 1])) {
      throw std::invalid_argument("kept sites must be ascending and in range");
    }
  }
  const std::size_t k = keep.size();
  const std::size_t kdim = std::size_t{1} << k;
  std::vector<std::size_t> rest;
  for (std::size_t s = 0; s < n; ++s) {
    if (!std::binary_search(keep.begin(), keep.end(), s)) rest.push_back(s);
  }
  auto index = [&](std::size_t kept_bits, std::size_t rest_bits) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if ((kept_bits >> (k - 1 - j)) & 1U) idx |= std::size_t{1} << (n - 1 - keep[j]);
    }
    for (std::size_t j = 0; j < rest.size(); ++j) {
      if ((rest_bits >> (rest.size() - 1 - j)) & 1U) idx |= std::size_t{1} << (n - 1 - rest[j]);
    }
    return static_cast<Eigen::Index>(idx);
  };
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(kdim),
                                                static_cast<Eigen::Index>(kdim));
  const std::size_t rdim = std::size_t{1} << rest.size();
  for (std::size_t r = 0; r < rdim; ++r) {
    for (std::size_t a = 0; a < kdim; ++a) {
      for (std::size_t b = 0; b < kdim; ++b) {
        rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
            psi(index(a, r)) * std::conj(psi(index(b, r)));
      }
    }
  }
  return rho;
}

void renormalize(StateVector& psi) {
  const double nrm = psi.norm();
  if (!(nrm > 0.0)) throw std::invalid_argument("cannot renormalize a zero state");
  if (std::abs(nrm - 1.0) > 1e-10) spdlog::info("renormalizing state with norm {}", nrm);
  psi /= nrm;
}

}  // namespace ahtsim
