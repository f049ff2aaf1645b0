#pragma once

#include "nrsim/types.hpp"

namespace nrsim::radio {

// Log-distance pathloss constants shared by the environment and the
// TA/RSRP consistency detector.
struct PathlossModel {
  double exponent = 2.7;
  double refLossDb = 40.0;  // at 1 m
};

inline constexpr double kDefaultRsrpFloorDbm = -120.0;

// Distances below 1 m are evaluated at 1 m.
double pathloss_db(double distanceM, const PathlossModel& model = {});
double rsrp_dbm(double txPowerDbm, double distanceM, const PathlossModel& model = {});

// Inverse of pathloss_db; never below 1 m.
double distance_for_pathloss(double pathlossDb, const PathlossModel& model = {});

// One-way.
Micros propagation_delay(double distanceM);

}  // namespace nrsim::radio
