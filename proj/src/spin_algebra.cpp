#include "ahtsim/spin_algebra.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ahtsim {

namespace {

constexpr std::uint64_t bit(std::size_t site) { return std::uint64_t{1} << site; }

// Pauli product sigma_a sigma_b = i^phase sigma_c for single-site letters.
struct PauliProduct {
  Letter letter;
  int phase;  // power of i
};

PauliProduct pauli_product(Letter a, Letter b) {
  if (a == Letter::E) return {b, 0};
  if (b == Letter::E) return {a, 0};
  if (a == b) return {Letter::E, 0};
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  const auto c = static_cast<Letter>(6 - ia - ib);
  // cyclic X->Y->Z gives +i
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {c, cyclic ? 1 : 3};
}

Complex i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Exact rotation matrix R_e(k pi/2) about coordinate axis e.
Eigen::Matrix3d quarter_turn(int axis, int k) {
  static constexpr std::array<int, 4> kCos{1, 0, -1, 0};
  static constexpr std::array<int, 4> kSin{0, 1, 0, -1};
  const int q = ((k % 4) + 4) % 4;
  const double c = kCos[q];
  const double s = kSin[q];
  Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
  const int a = (axis + 1) % 3;
  const int b = (axis + 2) % 3;
  r(axis, axis) = 1.0;
  r(a, a) = c;
  r(b, b) = c;
  r(b, a) = s;
  r(a, b) = -s;
  return r;
}

// Signed coordinate axis index if axis is +-e_i, otherwise -1.
int coordinate_axis(const Eigen::Vector3d& axis, int* sign) {
  for (int i = 0; i < 3; ++i) {
    if (near(std::abs(axis[i]), 1.0, 1e-12) && near(axis[(i + 1) % 3], 0.0, 1e-12) &&
        near(axis[(i + 2) % 3], 0.0, 1e-12)) {
      *sign = axis[i] > 0 ? 1 : -1;
      return i;
    }
  }
  return -1;
}

bool quarter_multiple(double angle, int* k) {
  const double q = angle / (std::numbers::pi / 2.0);
  const double r = std::round(q);
  if (!near(q, r, 1e-12)) return false;
  *k = static_cast<int>(std::fmod(r, 4.0));
  return true;
}

}  // namespace

char to_char(Letter l) {
  static constexpr std::array<char, 4> kChars{'E', 'X', 'Y', 'Z'};
  return kChars[static_cast<std::size_t>(l)];
}

// ---------------------------------------------------------------------------
// SpinWord

SpinWord::SpinWord(std::size_t n) : n_(static_cast<std::uint32_t>(n)) {
  if (n > kMaxWordLength) throw DimensionError("spin word longer than 64 sites");
}

SpinWord SpinWord::parse(std::string_view text) {
  SpinWord w(text.size());
  for (std::size_t s = 0; s < text.size(); ++s) {
    switch (text[s]) {
      case 'E': case 'e': break;
      case 'X': case 'x': w.set(s, Letter::X); break;
      case 'Y': case 'y': w.set(s, Letter::Y); break;
      case 'Z': case 'z': w.set(s, Letter::Z); break;
      default:
        throw std::invalid_argument("invalid spin letter '" + std::string(1, text[s]) + "'");
    }
  }
  return w;
}

SpinWord SpinWord::single(std::size_t n, std::size_t site, Letter l) {
  SpinWord w(n);
  w.set(site, l);
  return w;
}

SpinWord SpinWord::pair(std::size_t n, std::size_t a, Letter la, std::size_t b, Letter lb) {
  SpinWord w(n);
  w.set(a, la);
  w.set(b, lb);
  return w;
}

Letter SpinWord::at(std::size_t site) const {
  if (site >= n_) throw DimensionError("site index out of range");
  const bool x = x_ & bit(site);
  const bool z = z_ & bit(site);
  if (x && z) return Letter::Y;
  if (x) return Letter::X;
  if (z) return Letter::Z;
  return Letter::E;
}

void SpinWord::set(std::size_t site, Letter l) {
  if (site >= n_) throw DimensionError("site index out of range");
  x_ &= ~bit(site);
  z_ &= ~bit(site);
  if (l == Letter::X || l == Letter::Y) x_ |= bit(site);
  if (l == Letter::Z || l == Letter::Y) z_ |= bit(site);
}

std::size_t SpinWord::weight() const { return static_cast<std::size_t>(std::popcount(x_ | z_)); }

std::string SpinWord::str() const {
  std::string s(n_, 'E');
  for (std::size_t i = 0; i < n_; ++i) s[i] = to_char(at(i));
  return s;
}

// ---------------------------------------------------------------------------
// OperatorSum

OperatorSum::OperatorSum(std::size_t n, double prune) : n_(n), prune_(prune) {
  if (n > kMaxWordLength) throw DimensionError("operator on more than 64 sites");
}

OperatorSum OperatorSum::identity(std::size_t n, Complex c) { return word(SpinWord(n), c); }

OperatorSum OperatorSum::single(std::size_t n, std::size_t site, Letter l, Complex c) {
  return word(SpinWord::single(n, site, l), c);
}

OperatorSum OperatorSum::word(const SpinWord& w, Complex c) {
  OperatorSum h(w.size());
  h.add_term(w, c);
  return h;
}

Complex OperatorSum::coefficient(const SpinWord& w) const {
  const auto it = terms_.find(w);
  return it == terms_.end() ? Complex{} : it->second;
}

void OperatorSum::add_term(const SpinWord& w, Complex c) {
  if (w.size() != n_) throw DimensionError("word length does not match operator spin count");
  auto [it, inserted] = terms_.try_emplace(w, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < prune_) terms_.erase(it);
}

bool OperatorSum::is_hermitian(double tol) const {
  for (const auto& [w, c] : terms_) {
    if (std::abs(c.imag()) > tol) return false;
  }
  return true;
}

void OperatorSum::check_same_size(const OperatorSum& other) const {
  if (other.n_ != n_) {
    throw DimensionError("operator spin counts differ: " + std::to_string(n_) + " vs " +
                         std::to_string(other.n_));
  }
}

OperatorSum& OperatorSum::operator+=(const OperatorSum& other) {
  check_same_size(other);
  for (const auto& [w, c] : other.terms_) add_term(w, c);
  return *this;
}

OperatorSum& OperatorSum::operator-=(const OperatorSum& other) {
  check_same_size(other);
  for (const auto& [w, c] : other.terms_) add_term(w, -c);
  return *this;
}

OperatorSum& OperatorSum::operator*=(Complex s) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= s;
    if (std::abs(it->second) < prune_) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

OperatorSum operator*(const OperatorSum& a, const OperatorSum& b) {
  if (a.spin_count() != b.spin_count()) {
    throw DimensionError("operator spin counts differ in product");
  }
  const std::size_t n = a.spin_count();
  std::map<SpinWord, Complex> acc;
  for (const auto& [wa, ca] : a.terms()) {
    for (const auto& [wb, cb] : b.terms()) {
      SpinWord wc(n);
      int phase = 0;
      for (std::size_t s = 0; s < n; ++s) {
        const auto p = pauli_product(wa.at(s), wb.at(s));
        wc.set(s, p.letter);
        phase += p.phase;
      }
      const int scale = static_cast<int>(wc.weight()) - static_cast<int>(wa.weight()) -
                        static_cast<int>(wb.weight());
      acc[wc] += ca * cb * i_power(phase) * std::ldexp(1.0, scale);
    }
  }
  OperatorSum out(n, a.prune_threshold());
  for (const auto& [w, c] : acc) out.add_term(w, c);
  return out;
}

OperatorSum commutator(const OperatorSum& a, const OperatorSum& b) { return a * b - b * a; }

double frobenius_norm(const OperatorSum& h) {
  double sum = 0.0;
  for (const auto& [w, c] : h.terms()) {
    // ||W_I||_F^2 = 2^n / 4^weight
    sum += std::norm(c) * std::ldexp(1.0, static_cast<int>(h.spin_count()) -
                                              2 * static_cast<int>(w.weight()));
  }
  return std::sqrt(sum);
}

Eigen::MatrixXcd to_dense(const OperatorSum& h, std::size_t max_spins) {
  const std::size_t n = h.spin_count();
  if (n > max_spins) {
    throw DimensionError("dense realization of " + std::to_string(n) +
                         " spins exceeds the cap of " + std::to_string(max_spins));
  }
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (const auto& [w, c] : h.terms()) {
    // dense bit for site s is (n - 1 - s)
    std::size_t flip = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const Letter l = w.at(s);
      if (l == Letter::X || l == Letter::Y) flip |= std::size_t{1} << (n - 1 - s);
    }
    const double scale = std::ldexp(1.0, -static_cast<int>(w.weight()));
    for (std::size_t col = 0; col < dim; ++col) {
      Complex amp = c * scale;
      for (std::size_t s = 0; s < n; ++s) {
        const bool down = (col >> (n - 1 - s)) & 1U;
        switch (w.at(s)) {
          case Letter::Y: amp *= down ? Complex{0.0, -1.0} : Complex{0.0, 1.0}; break;
          case Letter::Z: amp *= down ? -1.0 : 1.0; break;
          default: break;
        }
      }
      m(static_cast<Eigen::Index>(col ^ flip), static_cast<Eigen::Index>(col)) += amp;
    }
  }
  return m;
}

std::string OperatorSum::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [w, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    if (c.imag() == 0.0) {
      os << c.real();
    } else {
      os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    }
    os << "*" << w.str();
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Rotations

SiteRotation::SiteRotation(std::size_t site_, const Eigen::Vector3d& axis_, double angle_)
    : site(site_), axis(axis_), angle(angle_) {
  if (std::abs(axis.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("rotation axis must have unit norm");
  }
}

bool SiteRotation::is_clifford() const {
  int sign = 0;
  int k = 0;
  return coordinate_axis(axis, &sign) >= 0 && quarter_multiple(angle, &k);
}

SiteMap SiteMap::from_rotation(const Eigen::Vector3d& axis, double angle) {
  // U^dag (v.I) U = (R_n(-angle) v).I for U = exp(-i angle n.I)
  int sign = 0;
  int k = 0;
  const int ax = coordinate_axis(axis, &sign);
  if (ax >= 0 && quarter_multiple(angle, &k)) {
    return {quarter_turn(ax, -sign * k), true};
  }
  const Eigen::AngleAxisd r(-angle, axis.normalized());
  return {r.toRotationMatrix(), false};
}

bool SiteMap::is_identity(double tol) const {
  return (m_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol;
}

SiteMap SiteMap::then(const SiteMap& later) const {
  return {m_ * later.m_, clifford_ && later.clifford_};
}

bool FrameRotation::is_clifford() const {
  for (const auto& s : sites_) {
    if (!s.is_clifford()) return false;
  }
  return true;
}

bool FrameRotation::is_identity(double tol) const {
  for (const auto& s : sites_) {
    if (!s.is_identity(tol)) return false;
  }
  return true;
}

bool FrameRotation::operator==(const FrameRotation& o) const { return sites_ == o.sites_; }

void FrameRotation::apply(const SiteRotation& r) {
  const SiteMap step = SiteMap::from_rotation(r.axis, r.angle);
  if (r.on_all_sites()) {
    for (auto& s : sites_) s = s.then(step);
    return;
  }
  if (r.site >= sites_.size()) throw DimensionError("rotation site out of range");
  sites_[r.site] = sites_[r.site].then(step);
}

std::pair<SpinWord, int> FrameRotation::conjugate_word(const SpinWord& w) const {
  if (w.size() != sites_.size()) throw DimensionError("word length does not match frame");
  SpinWord out(w.size());
  int sign = 1;
  for (std::size_t s = 0; s < w.size(); ++s) {
    const Letter l = w.at(s);
    if (l == Letter::E) continue;
    const auto& m = sites_[s].matrix();
    const int col = static_cast<int>(l) - 1;
    for (int row = 0; row < 3; ++row) {
      if (m(row, col) != 0.0) {
        out.set(s, static_cast<Letter>(row + 1));
        if (m(row, col) < 0.0) sign = -sign;
        break;
      }
    }
  }
  return {out, sign};
}

OperatorSum FrameRotation::conjugate(const OperatorSum& h) const {
  if (h.spin_count() != sites_.size()) throw DimensionError("operator does not match frame");
  OperatorSum out(h.spin_count(), h.prune_threshold());
  if (is_clifford()) {
    for (const auto& [w, c] : h.terms()) {
      const auto [image, sign] = conjugate_word(w);
      out.add_term(image, sign > 0 ? c : -c);
    }
    return out;
  }
  std::map<SpinWord, Complex> acc;
  for (const auto& [w, c] : h.terms()) {
    std::vector<std::pair<SpinWord, Complex>> partial{{SpinWord(w.size()), c}};
    for (std::size_t s = 0; s < w.size(); ++s) {
      const Letter l = w.at(s);
      if (l == Letter::E) continue;
      const auto& m = sites_[s].matrix();
      const int col = static_cast<int>(l) - 1;
      std::vector<std::pair<SpinWord, Complex>> next;
      next.reserve(partial.size() * 3);
      for (const auto& [pw, pc] : partial) {
        for (int row = 0; row < 3; ++row) {
          if (m(row, col) == 0.0) continue;
          SpinWord nw = pw;
          nw.set(s, static_cast<Letter>(row + 1));
          next.emplace_back(nw, pc * m(row, col));
        }
      }
      partial = std::move(next);
    }
    for (const auto& [pw, pc] : partial) acc[pw] += pc;
  }
  for (const auto& [w, c] : acc) out.add_term(w, c);
  return out;
}

OperatorSum rotate_conj(const OperatorSum& h, const SiteRotation& r) {
  if (!r.on_all_sites() && r.site >= h.spin_count()) {
    throw DimensionError("rotation site out of range");
  }
  FrameRotation f(h.spin_count());
  f.apply(r);
  return f.conjugate(h);
}

}  // namespace ahtsim
