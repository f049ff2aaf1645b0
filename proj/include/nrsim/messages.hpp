#pragma once

#include <cstdint>

#include "nrsim/codec.hpp"
#include "nrsim/types.hpp"

namespace nrsim {

struct Msg1 {
  std::uint8_t preambleIndex = 0;
  codec::RachOccasion occasion;
  double txPowerDbm = 0.0;
};

enum class Msg3Kind { SetupRequest, ReestablishmentRequest };

struct Msg3 {
  std::uint64_t contentionIdentity = 0;  // 48-bit UE identity echoed in Msg4
  std::uint16_t tcRnti = 0;
  Msg3Kind kind = Msg3Kind::SetupRequest;
  SimTime txTime{0};
};

struct Msg4 {
  std::uint64_t contentionIdentity = 0;
};

}  // namespace nrsim
