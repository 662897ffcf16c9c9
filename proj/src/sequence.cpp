#include "ahtsim/sequence.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include <spdlog/spdlog.h>

namespace ahtsim {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool same_rotation(const SiteRotation& a, const SiteRotation& b, double tol) {
  if (a.site != b.site) return false;
  const SiteMap ma = SiteMap::from_rotation(a.axis, a.angle);
  const SiteMap mb = SiteMap::from_rotation(b.axis, b.angle);
  return (ma.matrix() - mb.matrix()).cwiseAbs().maxCoeff() <= tol;
}

// Quarter turn whose conjugation action carries z onto `target` (perpendicular to z).
SiteRotation quarter_turn_onto(const Eigen::Vector3d& target) {
  for (const Eigen::Vector3d axis : {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY()}) {
    for (const double s : {1.0, -1.0}) {
      const Eigen::Vector3d a = s * axis;
      const SiteMap m = SiteMap::from_rotation(a, kHalfPi);
      if ((m.matrix() * Eigen::Vector3d::UnitZ() - target).cwiseAbs().maxCoeff() == 0.0) {
        return SiteRotation::all(a, kHalfPi);
      }
    }
  }
  throw std::invalid_argument("toggling frame target must be a transverse coordinate axis");
}

std::string rotation_label(const SiteRotation& r) {
  std::ostringstream os;
  os << "R(";
  for (int i = 0; i < 3; ++i) {
    if (std::abs(r.axis[i]) == 1.0) {
      os << (r.axis[i] < 0 ? "-" : "") << "xyz"[i];
    }
  }
  os << "," << r.angle / kHalfPi << "*pi/2";
  if (!r.on_all_sites()) os << ",s" << r.site;
  os << ")";
  return os.str();
}

}  // namespace

char to_char(Axis a) { return "XYZ"[static_cast<int>(a)]; }

Eigen::Vector3d unit_vector(Axis a) { return Eigen::Vector3d::Unit(static_cast<int>(a)); }

std::optional<Axis> parse_axis(std::string_view text) {
  if (text.size() != 1) return std::nullopt;
  switch (std::toupper(static_cast<unsigned char>(text[0]))) {
    case 'X': return Axis::X;
    case 'Y': return Axis::Y;
    case 'Z': return Axis::Z;
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// PulseSequence

void PulseSequence::add_broadband(const Eigen::Vector3d& axis, double angle) {
  events_.emplace_back(BroadbandPulse{SiteRotation::all(axis, angle)});
}

void PulseSequence::add_selective(std::size_t site, const Eigen::Vector3d& axis, double angle) {
  events_.emplace_back(SelectivePulse{SiteRotation(site, axis, angle)});
}

void PulseSequence::add_free(double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("free evolution duration must be > 0");
  events_.emplace_back(FreeEvolution{duration});
  cycle_time_ += duration;
}

void PulseSequence::add_drive(const SelectiveDrive& drive) {
  events_.emplace_back(DriveWindow{drive});
}

void PulseSequence::append(const PulseSequence& other) {
  events_.insert(events_.end(), other.events_.begin(), other.events_.end());
  cycle_time_ += other.cycle_time_;
  zeeman_suppressed_ = zeeman_suppressed_ || other.zeeman_suppressed_;
}

std::size_t PulseSequence::free_interval_count() const {
  std::size_t count = 0;
  for (const auto& e : events_) count += std::holds_alternative<FreeEvolution>(e);
  return count;
}

std::size_t PulseSequence::min_spin_count() const {
  std::size_t n = 0;
  for (const auto& e : events_) {
    if (const auto* p = std::get_if<SelectivePulse>(&e)) n = std::max(n, p->rotation.site + 1);
    if (const auto* d = std::get_if<DriveWindow>(&e)) n = std::max(n, d->drive.target + 1);
  }
  return n;
}

bool PulseSequence::broadband_closed(double tol) const {
  SiteMap total;
  for (const auto& e : events_) {
    if (const auto* p = std::get_if<BroadbandPulse>(&e)) {
      total = total.then(SiteMap::from_rotation(p->rotation.axis, p->rotation.angle));
    }
  }
  return total.is_identity(tol);
}

bool PulseSequence::frame_closed(std::size_t n, double tol) const {
  FrameRotation frame(n);
  for (const auto& e : events_) {
    if (const auto* p = std::get_if<BroadbandPulse>(&e)) frame.apply(p->rotation);
    if (const auto* p = std::get_if<SelectivePulse>(&e)) frame.apply(p->rotation);
  }
  return frame.is_identity(tol);
}

PulseSequence PulseSequence::time_reversed() const {
  PulseSequence out;
  out.zeeman_suppressed_ = zeeman_suppressed_;
  for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
    std::visit(Overloaded{
                   [&](const BroadbandPulse& p) {
                     out.events_.emplace_back(BroadbandPulse{p.rotation.inverse()});
                   },
                   [&](const SelectivePulse& p) {
                     out.events_.emplace_back(SelectivePulse{p.rotation.inverse()});
                   },
                   [&](const FreeEvolution& f) { out.add_free(f.duration); },
                   [&](const DriveWindow& d) { out.events_.emplace_back(d); },
               },
               *it);
  }
  return out;
}

bool PulseSequence::equivalent(const PulseSequence& other, double tol) const {
  if (events_.size() != other.events_.size()) return false;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& a = events_[i];
    const auto& b = other.events_[i];
    if (a.index() != b.index()) return false;
    const bool same = std::visit(
        Overloaded{
            [&](const BroadbandPulse& p) {
              return same_rotation(p.rotation, std::get<BroadbandPulse>(b).rotation, tol);
            },
            [&](const SelectivePulse& p) {
              return same_rotation(p.rotation, std::get<SelectivePulse>(b).rotation, tol);
            },
            [&](const FreeEvolution& f) {
              const double d = std::get<FreeEvolution>(b).duration;
              return std::abs(f.duration - d) <= tol * std::max(f.duration, d);
            },
            [&](const DriveWindow&) { return true; },
        },
        a);
    if (!same) return false;
  }
  return true;
}

std::string PulseSequence::describe() const {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& e : events_) {
    if (!first) os << ' ';
    first = false;
    std::visit(Overloaded{
                   [&](const BroadbandPulse& p) { os << 'B' << rotation_label(p.rotation); },
                   [&](const SelectivePulse& p) { os << 'S' << rotation_label(p.rotation); },
                   [&](const FreeEvolution& f) { os << f.duration; },
                   [&](const DriveWindow& d) { os << "drive(" << d.drive.target << ")"; },
               },
               e);
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Mansfield notation

CycleSpec parse_mansfield(std::string_view text) {
  CycleSpec spec;
  std::size_t i = 0;
  auto col = [&](std::size_t pos) { return pos + 1; };
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };

  skip_ws();
  if (i == text.size()) throw NotationError("empty cycle notation", col(i));
  while (i < text.size()) {
    if (text[i] != '[') throw NotationError("expected '['", col(i));
    const std::size_t open = i;
    ++i;
    std::vector<SignedAxis> axes;
    while (true) {
      skip_ws();
      if (i >= text.size()) throw NotationError("unterminated bracket", col(i));
      int sign = 1;
      if (text[i] == '-') {
        sign = -1;
        ++i;
        skip_ws();
        if (i >= text.size()) throw NotationError("unterminated bracket", col(i));
      }
      const auto axis = parse_axis(text.substr(i, 1));
      if (!axis) throw NotationError("expected axis X, Y or Z", col(i));
      axes.push_back({*axis, sign});
      ++i;
      skip_ws();
      if (i >= text.size()) throw NotationError("unterminated bracket", col(i));
      if (text[i] == ',') {
        ++i;
        continue;
      }
      if (text[i] == ']') {
        ++i;
        break;
      }
      throw NotationError("expected ',' or ']'", col(i));
    }
    if (axes.size() != 3) {
      throw NotationError("bracket needs exactly 3 axes, found " + std::to_string(axes.size()),
                          col(open));
    }
    if (axes[0] != SignedAxis{Axis::Z, 1}) {
      throw NotationError("bracket must start in frame Z", col(open));
    }
    if (axes[1].axis == axes[2].axis || axes[1].axis == Axis::Z || axes[2].axis == Axis::Z) {
      throw NotationError("bracket axes must be a permutation of Z, X, Y", col(open));
    }
    spec.brackets.push_back({axes[0], axes[1], axes[2]});
    skip_ws();
  }
  return spec;
}

std::string to_string(const CycleSpec& spec) {
  std::string out;
  for (const auto& b : spec.brackets) {
    out += '[';
    for (std::size_t j = 0; j < 3; ++j) {
      if (j) out += ',';
      if (b[j].sign < 0) out += '-';
      out += to_char(b[j].axis);
    }
    out += ']';
  }
  return out;
}

PulseSequence expand_cycle(const CycleSpec& spec, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  PulseSequence seq;
  for (const auto& b : spec.brackets) {
    const SiteRotation p1 = quarter_turn_onto(b[1].vector());
    // second pulse must carry z onto P1 b P1^dag so the accumulated frame shows b
    const SiteMap m1 = SiteMap::from_rotation(p1.axis, p1.angle);
    const Eigen::Vector3d pre = m1.matrix().transpose() * b[2].vector();
    const SiteRotation p2 = quarter_turn_onto(pre);

    seq.add_free(tau);
    seq.add_broadband(p1.axis, p1.angle);
    seq.add_free(tau);
    seq.add_broadband(p2.axis, p2.angle);
    seq.add_free(2.0 * tau);
    seq.add_broadband(p2.axis, -p2.angle);
    seq.add_free(tau);
    seq.add_broadband(p1.axis, -p1.angle);
    seq.add_free(tau);
  }
  return seq;
}

PulseSequence build_mrev16(double tau) { return expand_cycle(parse_mansfield(kMrev16Notation), tau); }

// ---------------------------------------------------------------------------
// W subcycles

PulseSequence build_w_schedule(const WAxes& axes, double T, PiTrain spacing) {
  if (!(T > 0.0)) throw std::invalid_argument("subcycle spacing T must be > 0");
  if (spacing && !(*spacing > 0.0)) throw std::invalid_argument("pi-train spacing must be > 0");

  const PulseSequence skeleton = expand_cycle(parse_mansfield("[Z,Y,X]"), T);
  auto selective = [&](PulseSequence& seq) {
    for (std::size_t s = 0; s < axes.size(); ++s) {
      if (axes[s]) seq.add_selective(s, unit_vector(*axes[s]), std::numbers::pi);
    }
  };

  PulseSequence seq;
  seq.set_zeeman_suppressed(!spacing);
  for (const auto& e : skeleton.events()) {
    if (const auto* p = std::get_if<BroadbandPulse>(&e)) {
      seq.add_broadband(p->rotation.axis, p->rotation.angle);
      continue;
    }
    const double d = std::get<FreeEvolution>(e).duration;
    selective(seq);
    if (!spacing) {
      seq.add_free(d);
    } else {
      auto count = static_cast<long>(std::llround(d / *spacing));
      if (count < 2) count = 2;
      if (count % 2 != 0) {
        spdlog::warn("pi-train count {} per interval is odd; using {}", count, count + 1);
        ++count;
      }
      const double sub = d / static_cast<double>(count);
      seq.add_free(sub / 2.0);
      for (long j = 0; j < count; ++j) {
        seq.add_broadband(Eigen::Vector3d::UnitX(), std::numbers::pi);
        seq.add_free(j + 1 < count ? sub : sub / 2.0);
      }
    }
    selective(seq);
  }
  return seq;
}

PulseSequence build_w_subcycle(std::size_t n, std::size_t target, std::optional<Axis> axis,
                               double T, PiTrain spacing) {
  if (target >= n) throw std::out_of_range("W subcycle target out of range");
  WAxes axes(n);
  axes[target] = axis;
  return build_w_schedule(axes, T, spacing);
}

std::string subcycle_label(std::optional<Axis> a, bool starred) {
  std::string s = "W";
  if (starred) s += '*';
  s += '(';
  s += a ? to_char(*a) : '-';
  s += ')';
  return s;
}

SuperWhh build_super_whh(std::size_t n, std::size_t k, std::size_t l, double T, SuperWhhMode mode,
                         PiTrain spacing) {
  if (k == l) throw std::invalid_argument("super-WHH needs two distinct spins");
  if (k >= n || l >= n) throw std::out_of_range("super-WHH spin index out of range");

  std::vector<Axis> k_order{Axis::Z, Axis::Y, Axis::X};
  std::vector<Axis> l_order{Axis::Z, Axis::X, Axis::Y};
  std::vector<bool> starred(3, false);
  if (mode == SuperWhhMode::Symmetrized) {
    for (int j = 2; j >= 0; --j) {
      k_order.push_back(k_order[static_cast<std::size_t>(j)]);
      l_order.push_back(l_order[static_cast<std::size_t>(j)]);
      starred.push_back(true);
    }
  }

  SuperWhh out;
  out.starred = starred;
  out.schedule.assign(n, WAxes(starred.size()));
  for (std::size_t j = 0; j < starred.size(); ++j) {
    out.schedule[k][j] = k_order[j];
    out.schedule[l][j] = l_order[j];
  }
  for (std::size_t j = 0; j < starred.size(); ++j) {
    WAxes axes(n);
    for (std::size_t s = 0; s < n; ++s) axes[s] = out.schedule[s][j];
    PulseSequence sub = build_w_schedule(axes, T, spacing);
    out.merged.append(starred[j] ? sub.time_reversed() : sub);
  }
  out.merged.set_zeeman_suppressed(!spacing);
  return out;
}

}  // namespace ahtsim
