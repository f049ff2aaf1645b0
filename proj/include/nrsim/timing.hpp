#pragma once

// Timing Advance arithmetic: TA unit per numerology, quantization of the
// measured round trip into a command, UE-side application, and the
// gNB-side decode tolerance verdict.

#include <cstdint>

#include "nrsim/types.hpp"

namespace nrsim::timing {

inline constexpr unsigned kTaCommandMax = 3846;
inline constexpr double kDefaultBaseQuantumUs = 0.5208;
inline constexpr double kDefaultCpToleranceUnits = 14.0;

struct Numerology {
  std::uint8_t mu = 0;

  // Throws InvariantViolation when mu > 4.
  static Numerology of(unsigned mu);
  friend bool operator==(const Numerology&, const Numerology&) = default;
};

// Overridable constants (`timing.base_quantum_us`, `timing.cp_tolerance_units`).
struct TimingConfig {
  double baseQuantumUs = kDefaultBaseQuantumUs;
  double cpToleranceUnits = kDefaultCpToleranceUnits;
};

struct TaState {
  Micros nta{0.0};
  Numerology numerology;
};

struct CpTolerance {
  Micros maxAbsOffset{0.0};
};

Micros ta_unit_duration(Numerology n, double baseQuantumUs = kDefaultBaseQuantumUs);

// Throws InvariantViolation if ta > 3846.
Micros ta_to_time(unsigned ta, Numerology n, double baseQuantumUs = kDefaultBaseQuantumUs);

// Nearest-integer command for a measured round trip, clamped to [0, 3846].
unsigned quantize_ta(Micros roundTripDelay, Numerology n,
                     double baseQuantumUs = kDefaultBaseQuantumUs);

// Initial-access semantics: the command replaces N_TA outright.
TaState apply_rar_ta(const TaState& state, unsigned taCommand,
                     double baseQuantumUs = kDefaultBaseQuantumUs);

// Positive = uplink arrives early, negative = late.
Micros uplink_arrival_offset(const TaState& state, Micros oneWayDelay);

// Inclusive: |offset| == tolerance still decodes.
bool is_uplink_decodable(Micros offset, const CpTolerance& tol);

CpTolerance default_tolerance(Numerology n, const TimingConfig& cfg = {});

}  // namespace nrsim::timing
