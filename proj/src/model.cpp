#include "ahtsim/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ahtsim {

void Geometry::validate() const {
  if (std::abs(field_axis.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("field axis must be a unit vector");
  }
  for (std::size_t k = 0; k < positions.size(); ++k) {
    for (std::size_t l = k + 1; l < positions.size(); ++l) {
      if ((positions[k] - positions[l]).norm() <= 0.0) {
        throw std::invalid_argument("spins " + std::to_string(k) + " and " + std::to_string(l) +
                                    " share a position");
      }
    }
  }
}

SpinSystem::SpinSystem(std::vector<double> offsets, Eigen::MatrixXd couplings)
    : offsets_(std::move(offsets)), couplings_(std::move(couplings)) {
  const auto n = static_cast<Eigen::Index>(offsets_.size());
  if (couplings_.rows() != n || couplings_.cols() != n) {
    throw DimensionError("coupling matrix must be n x n");
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!std::isfinite(offsets_[static_cast<std::size_t>(k)])) {
      throw std::invalid_argument("offsets must be finite");
    }
    if (couplings_(k, k) != 0.0) throw std::invalid_argument("coupling diagonal must be zero");
    for (Eigen::Index l = 0; l < n; ++l) {
      if (!std::isfinite(couplings_(k, l))) throw std::invalid_argument("couplings must be finite");
      if (couplings_(k, l) != couplings_(l, k)) {
        throw std::invalid_argument("coupling matrix must be symmetric");
      }
    }
  }
  for (std::size_t k = 0; k < offsets_.size(); ++k) {
    for (std::size_t l = k + 1; l < offsets_.size(); ++l) {
      if (offsets_[k] == offsets_[l]) coincident_ = true;
    }
  }
}

SpinSystem SpinSystem::uncoupled(std::vector<double> offsets) {
  const auto n = static_cast<Eigen::Index>(offsets.size());
  return {std::move(offsets), Eigen::MatrixXd::Zero(n, n)};
}

SpinSystem SpinSystem::from_geometry(const Geometry& geometry, std::vector<double> offsets) {
  geometry.validate();
  if (geometry.positions.size() != offsets.size()) {
    throw DimensionError("geometry and offsets disagree on the spin count");
  }
  const std::size_t n = offsets.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const double v = dipolar_constant(geometry, k, l);
      d(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = v;
      d(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return {std::move(offsets), std::move(d)};
}

void SelectiveDrive::validate(std::size_t n) const {
  if (target >= n) throw std::out_of_range("drive target out of range");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("drive amplitude must be >= 0");
  if (!(duration > 0.0)) throw std::invalid_argument("drive duration must be > 0");
}

OperatorSum build_zeeman(const SpinSystem& system) {
  OperatorSum h(system.size());
  for (std::size_t k = 0; k < system.size(); ++k) {
    h.add_term(SpinWord::single(system.size(), k, Letter::Z), -system.offset(k));
  }
  return h;
}

OperatorSum dipolar_pair(std::size_t n, std::size_t k, std::size_t l, double d) {
  OperatorSum h(n);
  h.add_term(SpinWord::pair(n, k, Letter::Z, l, Letter::Z), 2.0 * d);
  h.add_term(SpinWord::pair(n, k, Letter::X, l, Letter::X), -d);
  h.add_term(SpinWord::pair(n, k, Letter::Y, l, Letter::Y), -d);
  return h;
}

OperatorSum heisenberg_pair(std::size_t n, std::size_t k, std::size_t l, double j) {
  OperatorSum h(n);
  for (const Letter a : {Letter::X, Letter::Y, Letter::Z}) {
    h.add_term(SpinWord::pair(n, k, a, l, a), j);
  }
  return h;
}

OperatorSum build_dipolar(const SpinSystem& system) {
  const std::size_t n = system.size();
  OperatorSum h(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const double d = system.coupling(k, l);
      if (d != 0.0) h += dipolar_pair(n, k, l, d);
    }
  }
  return h;
}

OperatorSum total_spin(std::size_t n, Letter l) {
  OperatorSum h(n);
  for (std::size_t k = 0; k < n; ++k) h.add_term(SpinWord::single(n, k, l), 1.0);
  return h;
}

double dipolar_constant(const Geometry& geometry, std::size_t k, std::size_t l) {
  if (k == l) throw std::invalid_argument("dipolar constant needs two distinct spins");
  const Eigen::Vector3d r = geometry.positions.at(l) - geometry.positions.at(k);
  const double dist = r.norm();
  if (dist <= 0.0) throw std::invalid_argument("coincident spin positions");
  const double cos_theta = r.dot(geometry.field_axis) / dist;
  return kMu0Over4Pi * geometry.gamma * geometry.gamma * kHbar *
         (1.0 - 3.0 * cos_theta * cos_theta) / (2.0 * dist * dist * dist);
}

OperatorSum drive_hamiltonian(const SelectiveDrive& drive, const SpinSystem& system, double t) {
  const std::size_t n = system.size();
  OperatorSum h(n);
  if (!drive.active_at(t) || drive.amplitude == 0.0) return h;
  const double theta = drive.carrier_offset * (t - drive.start) - drive.phase;
  const double cx = -drive.amplitude * std::cos(theta);
  const double cy = drive.amplitude * std::sin(theta);
  for (std::size_t k = 0; k < n; ++k) {
    h.add_term(SpinWord::single(n, k, Letter::X), cx);
    h.add_term(SpinWord::single(n, k, Letter::Y), cy);
  }
  return h;
}

}  // namespace ahtsim
