#include "nrsim/radio.hpp"

#include <algorithm>
#include <cmath>

#include "nrsim/errors.hpp"

namespace nrsim::radio {

double pathloss_db(double distanceM, const PathlossModel& model) {
  const double d = std::max(distanceM, 1.0);
  return model.refLossDb + 10.0 * model.exponent * std::log10(d);
}

double rsrp_dbm(double txPowerDbm, double distanceM, const PathlossModel& model) {
  return txPowerDbm - pathloss_db(distanceM, model);
}

double distance_for_pathloss(double pathlossDb, const PathlossModel& model) {
  const double d = std::pow(10.0, (pathlossDb - model.refLossDb) / (10.0 * model.exponent));
  return std::max(d, 1.0);
}

Micros propagation_delay(double distanceM) {
  if (distanceM < 0) throw PreconditionViolated("negative distance");
  return Micros{distanceM / kSpeedOfLightMPerUs};
}

}  // namespace nrsim::radio
