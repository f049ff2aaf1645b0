#include "nrsim/timing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nrsim/errors.hpp"

namespace nrsim::timing {

Numerology Numerology::of(unsigned mu) {
  if (mu > 4) throw InvariantViolation("numerology mu must be 0..4, got " + std::to_string(mu));
  return Numerology{static_cast<std::uint8_t>(mu)};
}

Micros ta_unit_duration(Numerology n, double baseQuantumUs) {
  return Micros{baseQuantumUs / static_cast<double>(1u << n.mu)};
}

Micros ta_to_time(unsigned ta, Numerology n, double baseQuantumUs) {
  if (ta > kTaCommandMax) {
    throw InvariantViolation("TA command " + std::to_string(ta) + " exceeds 3846");
  }
  return ta * ta_unit_duration(n, baseQuantumUs);
}

unsigned quantize_ta(Micros roundTripDelay, Numerology n, double baseQuantumUs) {
  if (roundTripDelay.count() < 0) throw PreconditionViolated("negative round-trip delay");
  const double units = std::round(roundTripDelay / ta_unit_duration(n, baseQuantumUs));
  return static_cast<unsigned>(std::clamp(units, 0.0, static_cast<double>(kTaCommandMax)));
}

TaState apply_rar_ta(const TaState& state, unsigned taCommand, double baseQuantumUs) {
  return TaState{ta_to_time(taCommand, state.numerology, baseQuantumUs), state.numerology};
}

Micros uplink_arrival_offset(const TaState& state, Micros oneWayDelay) {
  if (oneWayDelay.count() < 0) throw PreconditionViolated("negative one-way delay");
  return state.nta - 2.0 * oneWayDelay;
}

bool is_uplink_decodable(Micros offset, const CpTolerance& tol) {
  return std::abs(offset.count()) <= tol.maxAbsOffset.count();
}

CpTolerance default_tolerance(Numerology n, const TimingConfig& cfg) {
  return CpTolerance{cfg.cpToleranceUnits * ta_unit_duration(n, cfg.baseQuantumUs)};
}

}  // namespace nrsim::timing
