#pragma once

// Operator algebra over sums of tensor products of spin-1/2 operators
// {E, I^x, I^y, I^z} with I^a = sigma^a / 2. Coefficients are angular
// frequencies (rad/s, hbar = 1).

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ahtsim {

using Complex = std::complex<double>;

inline constexpr double kDefaultPrune = 1e-14;
inline constexpr std::size_t kMaxWordLength = 64;
inline constexpr std::size_t kDefaultDenseCap = 12;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Letter : std::uint8_t { E = 0, X = 1, Y = 2, Z = 3 };

char to_char(Letter l);

/// A length-n tensor product of single-site letters. Site 0 is the leftmost
/// letter and the most significant qubit of the dense realization.
class SpinWord {
 public:
  SpinWord() = default;
  explicit SpinWord(std::size_t n);

  static SpinWord parse(std::string_view text);
  static SpinWord single(std::size_t n, std::size_t site, Letter l);
  static SpinWord pair(std::size_t n, std::size_t a, Letter la, std::size_t b, Letter lb);

  std::size_t size() const { return n_; }
  Letter at(std::size_t site) const;
  void set(std::size_t site, Letter l);
  std::size_t weight() const;
  bool is_identity() const { return (x_ | z_) == 0; }
  std::string str() const;

  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }

  auto operator<=>(const SpinWord&) const = default;

 private:
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  std::uint32_t n_ = 0;
};

/// Complex-weighted sum of spin words on a fixed number of sites.
class OperatorSum {
 public:
  using TermMap = std::map<SpinWord, Complex>;

  explicit OperatorSum(std::size_t n = 0, double prune = kDefaultPrune);

  static OperatorSum identity(std::size_t n, Complex c = 1.0);
  static OperatorSum single(std::size_t n, std::size_t site, Letter l, Complex c = 1.0);
  static OperatorSum word(const SpinWord& w, Complex c = 1.0);

  std::size_t spin_count() const { return n_; }
  double prune_threshold() const { return prune_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  Complex coefficient(const SpinWord& w) const;

  /// Adds c to the coefficient of w; drops the entry if it falls below the
  /// prune threshold.
  void add_term(const SpinWord& w, Complex c);

  /// Hermitian iff every coefficient is real (each I^a is Hermitian).
  bool is_hermitian(double tol = 0.0) const;

  OperatorSum& operator+=(const OperatorSum& other);
  OperatorSum& operator-=(const OperatorSum& other);
  OperatorSum& operator*=(Complex s);

  friend OperatorSum operator+(OperatorSum a, const OperatorSum& b) { return a += b; }
  friend OperatorSum operator-(OperatorSum a, const OperatorSum& b) { return a -= b; }
  friend OperatorSum operator-(OperatorSum a) { return a *= -1.0; }
  friend OperatorSum operator*(OperatorSum a, Complex s) { return a *= s; }
  friend OperatorSum operator*(Complex s, OperatorSum a) { return a *= s; }
  friend OperatorSum operator*(const OperatorSum& a, const OperatorSum& b);

  std::string str() const;

 private:
  void check_same_size(const OperatorSum& other) const;

  TermMap terms_;
  std::size_t n_ = 0;
  double prune_ = kDefaultPrune;
};

OperatorSum commutator(const OperatorSum& a, const OperatorSum& b);

/// Frobenius norm of the dense realization, computed from word orthogonality.
double frobenius_norm(const OperatorSum& h);

Eigen::MatrixXcd to_dense(const OperatorSum& h, std::size_t max_spins = kDefaultDenseCap);

/// Rotation exp(-i angle axis.I) on one site or on every site.
struct SiteRotation {
  static constexpr std::size_t kAllSites = std::numeric_limits<std::size_t>::max();

  SiteRotation(std::size_t site, const Eigen::Vector3d& axis, double angle);

  static SiteRotation all(const Eigen::Vector3d& axis, double angle) {
    return {kAllSites, axis, angle};
  }

  bool on_all_sites() const { return site == kAllSites; }
  bool is_clifford() const;
  SiteRotation inverse() const { return {site, axis, -angle}; }

  std::size_t site;
  Eigen::Vector3d axis;
  double angle;
};

/// Action of conjugation U^dag (.) U on the (X, Y, Z) letters of one site:
/// U^dag I^a U = sum_b M(b, a) I^b.
class SiteMap {
 public:
  SiteMap() : m_(Eigen::Matrix3d::Identity()) {}

  static SiteMap from_rotation(const Eigen::Vector3d& axis, double angle);

  const Eigen::Matrix3d& matrix() const { return m_; }
  bool is_clifford() const { return clifford_; }
  bool is_identity(double tol = 0.0) const;

  /// Map for U then V applied in time order, i.e. conjugation by V*U.
  SiteMap then(const SiteMap& later) const;

  bool operator==(const SiteMap& o) const { return m_ == o.m_; }

 private:
  SiteMap(const Eigen::Matrix3d& m, bool clifford) : m_(m), clifford_(clifford) {}

  Eigen::Matrix3d m_;
  bool clifford_ = true;
};

/// Accumulated rotation of a multi-pulse history, one SiteMap per spin.
class FrameRotation {
 public:
  explicit FrameRotation(std::size_t n = 0) : sites_(n) {}

  std::size_t spin_count() const { return sites_.size(); }
  const SiteMap& site(std::size_t s) const { return sites_.at(s); }
  bool is_clifford() const;
  bool is_identity(double tol = 0.0) const;

  /// Appends a later pulse to the history.
  void apply(const SiteRotation& r);

  OperatorSum conjugate(const OperatorSum& h) const;

  /// Clifford image of a single word: (image word, sign). Requires is_clifford().
  std::pair<SpinWord, int> conjugate_word(const SpinWord& w) const;

  bool operator==(const FrameRotation& o) const;

 private:
  std::vector<SiteMap> sites_;
};

/// Returns R^dag h R with R = exp(-i angle axis.I) at the rotation's site(s).
OperatorSum rotate_conj(const OperatorSum& h, const SiteRotation& r);

}  // namespace ahtsim
