#include "ahtsim/aht.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "ahtsim/model.hpp"

namespace ahtsim {

namespace {

constexpr int kMaxTickDenominator = 64;
constexpr double kTickTolerance = 1e-9;

// Integer tick weights proportional to the durations, or empty when the
// durations are not commensurate with a small denominator.
std::vector<std::int64_t> tick_weights(const std::vector<double>& durations) {
  double shortest = durations.front();
  for (double d : durations) shortest = std::min(shortest, d);
  for (int q = 1; q <= kMaxTickDenominator; ++q) {
    std::vector<std::int64_t> ticks;
    ticks.reserve(durations.size());
    bool ok = true;
    for (double d : durations) {
      const double r = d / shortest * q;
      const double k = std::round(r);
      if (std::abs(r - k) > kTickTolerance * std::max(1.0, r)) {
        ok = false;
        break;
      }
      ticks.push_back(static_cast<std::int64_t>(k));
    }
    if (ok) return ticks;
  }
  return {};
}

void split_product(double a, double b, std::vector<double>& out) {
  const double p = a * b;
  out.push_back(p);
  out.push_back(std::fma(a, b, -p));
}

}  // namespace

double exact_sum(const std::vector<double>& values) {
  // Shewchuk partials: the list of non-overlapping partials is kept exact and
  // only the final reduction rounds.
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  double hi = partials.back();
  partials.pop_back();
  double lo = 0.0;
  while (!partials.empty()) {
    const double x = hi;
    const double y = partials.back();
    partials.pop_back();
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  // round-half-even correction across the remaining partials
  if (!partials.empty() && ((lo < 0.0 && partials.back() < 0.0) || (lo > 0.0 && partials.back() > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

TogglingFrame toggling_frames(const PulseSequence& seq, const OperatorSum& h) {
  const std::size_t n = h.spin_count();
  if (seq.min_spin_count() > n) {
    throw DimensionError("sequence addresses more spins than the Hamiltonian has");
  }
  TogglingFrame out;
  FrameRotation frame(n);
  for (const auto& e : seq.events()) {
    if (const auto* p = std::get_if<BroadbandPulse>(&e)) {
      frame.apply(p->rotation);
    } else if (const auto* p = std::get_if<SelectivePulse>(&e)) {
      frame.apply(p->rotation);
    } else if (const auto* f = std::get_if<FreeEvolution>(&e)) {
      out.intervals.push_back({f->duration, frame, frame.conjugate(h)});
      out.cycle_time += f->duration;
    }
  }
  out.final_frame = frame;
  return out;
}

OperatorSum average0(const PulseSequence& seq, const OperatorSum& h) {
  const TogglingFrame frames = toggling_frames(seq, h);
  if (frames.intervals.empty() || !(frames.cycle_time > 0.0)) {
    throw std::invalid_argument("average over a zero cycle time");
  }
  bool clifford = true;
  for (const auto& iv : frames.intervals) clifford = clifford && iv.frame.is_clifford();

  std::vector<double> durations;
  for (const auto& iv : frames.intervals) durations.push_back(iv.duration);
  const std::vector<std::int64_t> ticks = clifford ? tick_weights(durations) : std::vector<std::int64_t>{};
  if (ticks.empty()) return average0(frames);

  // Rebuild the source of every image word from the frames, so that each
  // coefficient is an integer combination of the input coefficients.
  std::int64_t total = 0;
  for (auto k : ticks) total += k;
  std::map<std::pair<SpinWord, SpinWord>, std::int64_t> weight;
  std::map<SpinWord, Complex> source;
  for (std::size_t i = 0; i < frames.intervals.size(); ++i) {
    const FrameRotation& frame = frames.intervals[i].frame;
    for (const auto& [w, c] : h.terms()) {
      const auto [image, sign] = frame.conjugate_word(w);
      weight[{image, w}] += sign * ticks[i];
      source[w] = c;
    }
  }
  std::map<SpinWord, std::pair<std::vector<double>, std::vector<double>>> parts;
  for (const auto& [key, wgt] : weight) {
    if (wgt == 0) continue;
    const Complex c = source.at(key.second);
    auto& [re, im] = parts[key.first];
    split_product(c.real(), static_cast<double>(wgt), re);
    split_product(c.imag(), static_cast<double>(wgt), im);
  }
  OperatorSum out(h.spin_count(), h.prune_threshold());
  const double denom = static_cast<double>(total);
  for (const auto& [w, p] : parts) {
    const Complex c(exact_sum(p.first) / denom, exact_sum(p.second) / denom);
    if (c != Complex(0.0)) out.add_term(w, c);
  }
  return out;
}

OperatorSum average0(const TogglingFrame& frames) {
  if (frames.intervals.empty() || !(frames.cycle_time > 0.0)) {
    throw std::invalid_argument("average over a zero cycle time");
  }
  const auto& first = frames.intervals.front().hamiltonian;
  OperatorSum acc(first.spin_count(), first.prune_threshold());
  for (const auto& iv : frames.intervals) acc += iv.hamiltonian * Complex(iv.duration);
  return acc * Complex(1.0 / frames.cycle_time);
}

OperatorSum magnus1(const PulseSequence& seq, const OperatorSum& h) {
  return magnus1(toggling_frames(seq, h));
}

OperatorSum magnus1(const TogglingFrame& frames) {
  if (frames.intervals.empty() || !(frames.cycle_time > 0.0)) {
    throw std::invalid_argument("average over a zero cycle time");
  }
  const auto& first = frames.intervals.front().hamiltonian;
  OperatorSum prefix(first.spin_count(), first.prune_threshold());
  OperatorSum acc(first.spin_count(), first.prune_threshold());
  for (const auto& iv : frames.intervals) {
    if (!prefix.empty()) acc += commutator(iv.hamiltonian, prefix) * Complex(iv.duration);
    prefix += iv.hamiltonian * Complex(iv.duration);
  }
  return acc * Complex(0.0, -0.5 / frames.cycle_time);
}

OffsetVectors offset_vectors(const PulseSequence& seq) {
  for (const auto& e : seq.events()) {
    if (std::holds_alternative<SelectivePulse>(e)) {
      throw std::invalid_argument("offset vectors need a pure broadband cycle");
    }
  }
  auto read = [&](Letter l) {
    const OperatorSum avg = average0(seq, OperatorSum::single(1, 0, l));
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (const auto& [w, c] : avg.terms()) {
      if (w.is_identity() || c.imag() != 0.0) {
        throw std::invalid_argument("averaged offset is not a single-site rotation generator");
      }
      v[static_cast<int>(w.at(0)) - 1] = c.real();
    }
    return v;
  };
  OffsetVectors v;
  v.zeta = read(Letter::Z);
  v.xi = read(Letter::X);
  v.eta = read(Letter::Y);
  return v;
}

double resonant_carrier(const OffsetVectors& v, double offset) { return v.zeta.norm() * offset; }

OperatorSum secular_selective(const OffsetVectors& v, double amplitude, double phase,
                              std::size_t target, std::size_t n) {
  const double zn = v.zeta.norm();
  if (!(zn > 0.0)) throw std::invalid_argument("degenerate zeta: the cycle removes all offsets");
  if (target >= n) throw DimensionError("drive target out of range");
  OperatorSum out(n);
  if (amplitude == 0.0) return out;

  const Eigen::Vector3d zhat = v.zeta / zn;
  const Eigen::Vector3d xi_perp = v.xi - zhat * zhat.dot(v.xi);
  const Eigen::Vector3d eta_perp = v.eta - zhat * zhat.dot(v.eta);
  const Eigen::Vector3d a = std::cos(phase) * (xi_perp - zhat.cross(v.eta)) +
                            std::sin(phase) * (eta_perp + zhat.cross(v.xi));
  const Letter letters[3] = {Letter::X, Letter::Y, Letter::Z};
  for (int i = 0; i < 3; ++i) {
    if (a[i] != 0.0) out.add_term(SpinWord::single(n, target, letters[i]), -0.5 * amplitude * a[i]);
  }
  return out;
}

OperatorSum effective_pair_coupling(std::optional<Axis> alpha, std::optional<Axis> beta, double d) {
  const PulseSequence w = build_w_schedule({alpha, beta}, 1.0);
  return average0(w, dipolar_pair(2, 0, 1, d));
}

}  // namespace ahtsim
