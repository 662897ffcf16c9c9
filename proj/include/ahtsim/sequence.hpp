#pragma once

// Pulse sequences: Mansfield cycle notation, WHH-4 / MREV-16 expansion, the
// W_k(alpha) recoupling subcycles and the super-WHH supercycle.

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ahtsim/model.hpp"
#include "ahtsim/spin_algebra.hpp"

namespace ahtsim {

enum class Axis { X = 0, Y = 1, Z = 2 };

char to_char(Axis a);
Eigen::Vector3d unit_vector(Axis a);
std::optional<Axis> parse_axis(std::string_view text);  // "X", "y", "-" -> nullopt handled by caller

struct SignedAxis {
  Axis axis = Axis::Z;
  int sign = 1;

  Eigen::Vector3d vector() const { return sign * unit_vector(axis); }
  bool operator==(const SignedAxis&) const = default;
};

// Events --------------------------------------------------------------------

struct BroadbandPulse {
  SiteRotation rotation;
};

struct SelectivePulse {
  SiteRotation rotation;
};

struct FreeEvolution {
  double duration;  // s
};

/// Marks a selective drive; the drive's own start and duration are absolute.
struct DriveWindow {
  SelectiveDrive drive;
};

using SequenceEvent = std::variant<BroadbandPulse, SelectivePulse, FreeEvolution, DriveWindow>;

class PulseSequence {
 public:
  PulseSequence() = default;

  void add_broadband(const Eigen::Vector3d& axis, double angle);
  void add_selective(std::size_t site, const Eigen::Vector3d& axis, double angle);
  void add_free(double duration);
  void add_drive(const SelectiveDrive& drive);
  void append(const PulseSequence& other);

  const std::vector<SequenceEvent>& events() const { return events_; }
  double cycle_time() const { return cycle_time_; }
  std::size_t free_interval_count() const;

  /// Largest selective-pulse site plus one (0 when none).
  std::size_t min_spin_count() const;

  /// Zeeman offsets are removed analytically during propagation
  /// (idealized broadband pi-train).
  bool zeeman_suppressed() const { return zeeman_suppressed_; }
  void set_zeeman_suppressed(bool v) { zeeman_suppressed_ = v; }

  /// Broadband rotations compose to the identity.
  bool broadband_closed(double tol = 1e-12) const;
  /// Every rotation, selective ones included, composes to the identity on n spins.
  bool frame_closed(std::size_t n, double tol = 1e-12) const;

  /// Event list reversed in time with every rotation inverted.
  PulseSequence time_reversed() const;

  /// Same events up to rotation equivalence (SO(3) action) and durations.
  bool equivalent(const PulseSequence& other, double tol = 1e-12) const;

  std::string describe() const;

 private:
  std::vector<SequenceEvent> events_;
  double cycle_time_ = 0.0;
  bool zeeman_suppressed_ = false;
};

// Mansfield notation ----------------------------------------------------------

class NotationError : public std::invalid_argument {
 public:
  NotationError(const std::string& message, std::size_t column)
      : std::invalid_argument(message + " at column " + std::to_string(column)),
        column_(column) {}
  /// 1-based column in the input text.
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

struct CycleSpec {
  std::vector<std::array<SignedAxis, 3>> brackets;

  bool operator==(const CycleSpec&) const = default;
};

CycleSpec parse_mansfield(std::string_view text);
std::string to_string(const CycleSpec& spec);

/// Each bracket [Z,a,b] becomes tau, P1, tau, P2, 2tau, P2^-1, tau, P1^-1, tau.
PulseSequence expand_cycle(const CycleSpec& spec, double tau);

inline constexpr std::string_view kMrev16Notation = "[Z,Y,X][Z,-Y,X][Z,Y,-X][Z,-Y,-X]";

PulseSequence build_mrev16(double tau);

// Recoupling subcycles ----------------------------------------------------------

/// Per-spin selective axis for a W subcycle; nullopt is W(-).
using WAxes = std::vector<std::optional<Axis>>;

/// Spacing of the broadband pi-train inside each interval; nullopt selects the
/// idealized mode in which the Zeeman term is dropped instead.
using PiTrain = std::optional<double>;

/// Slow WHH-4 skeleton with spacing T; every free interval is bracketed by
/// selective pi rotations about axes[s] on each spin s that has one.
PulseSequence build_w_schedule(const WAxes& axes, double T, PiTrain spacing = std::nullopt);

PulseSequence build_w_subcycle(std::size_t n, std::size_t target, std::optional<Axis> axis,
                               double T, PiTrain spacing = std::nullopt);

enum class SuperWhhMode { Plain, Symmetrized };

struct SuperWhh {
  /// schedule[s][j]: selective axis of spin s in subcycle j.
  std::vector<WAxes> schedule;
  /// Subcycle j is the time-reflected W*.
  std::vector<bool> starred;
  PulseSequence merged;
};

SuperWhh build_super_whh(std::size_t n, std::size_t k, std::size_t l, double T, SuperWhhMode mode,
                         PiTrain spacing = std::nullopt);

std::string subcycle_label(std::optional<Axis> a, bool starred = false);

}  // namespace ahtsim
