#pragma once

// Dense reference implementations used by the tests. Built from explicit
// Kronecker products and matrix functions so that they share no code with the
// library's symbolic paths.

#include <complex>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using Mat = Eigen::MatrixXcd;
using C = std::complex<double>;

inline Mat single(char letter) {
  Mat m = Mat::Zero(2, 2);
  switch (letter) {
    case 'E': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 0.5, 0.5, 0; break;
    case 'Y': m << 0, C(0, -0.5), C(0, 0.5), 0; break;
    case 'Z': m << 0.5, 0, 0, -0.5; break;
    default: throw std::invalid_argument("bad letter");
  }
  return m;
}

/// Site 0 is the leftmost Kronecker factor.
inline Mat word(const std::string& w) {
  Mat m = Mat::Identity(1, 1);
  for (char c : w) {
    Mat next = Eigen::kroneckerProduct(m, single(c)).eval();
    m = next;
  }
  return m;
}

/// Operator `letter` on `site` of n spins.
inline Mat site_op(std::size_t n, std::size_t site, char letter) {
  std::string w(n, 'E');
  w[site] = letter;
  return word(w);
}

inline Mat total(std::size_t n, char letter) {
  Mat m = Mat::Zero(1 << n, 1 << n);
  for (std::size_t s = 0; s < n; ++s) m += site_op(n, s, letter);
  return m;
}

/// exp(-i angle (a.S)) with S the spin operators summed over `sites` (all if empty).
inline Mat rotation(std::size_t n, const Eigen::Vector3d& a, double angle, int site = -1) {
  Mat g = Mat::Zero(1 << n, 1 << n);
  for (std::size_t s = 0; s < n; ++s) {
    if (site >= 0 && static_cast<std::size_t>(site) != s) continue;
    g += a.x() * site_op(n, s, 'X') + a.y() * site_op(n, s, 'Y') + a.z() * site_op(n, s, 'Z');
  }
  return (C(0, -angle) * g).exp();
}

inline Mat expmi(const Mat& h, double t) { return (C(0, -t) * h).exp(); }

inline Mat dipolar(std::size_t n, std::size_t k, std::size_t l, double d) {
  return d * (2.0 * site_op(n, k, 'Z') * site_op(n, l, 'Z') - site_op(n, k, 'X') * site_op(n, l, 'X') -
              site_op(n, k, 'Y') * site_op(n, l, 'Y'));
}

inline Mat random_hermitian(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(dim, dim);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = C(g(rng), g(rng));
  return (a + a.adjoint()) / 2.0;
}

inline double dist(const Mat& a, const Mat& b) { return (a - b).norm(); }

}  // namespace oracle
