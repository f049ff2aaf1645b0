#pragma once

// Legitimate and rogue cell behaviour: SIB1 broadcast with attack
// mutations, PRACH handling with optional TA-delta injection, uplink decode
// verdicts, and configuration harvesting for the rogue clone.

#include <cstdint>
#include <optional>
#include <vector>

#include "nrsim/codec.hpp"
#include "nrsim/messages.hpp"
#include "nrsim/timing.hpp"
#include "nrsim/types.hpp"

namespace nrsim::gnb {

enum class AttackKind { None, ValueTagIncrement, TacCycle, SiWindowToggle, TaDelta };

struct AttackProfile {
  AttackKind kind = AttackKind::None;
  SimTime period{0};
  std::vector<std::uint32_t> tacList;
  std::vector<codec::SiWindowLength> sequence;
  int deltaUnits = 0;

  static AttackProfile none() { return {}; }
  static AttackProfile value_tag_increment(SimTime period = SimTime{10000});
  static AttackProfile tac_cycle(std::vector<std::uint32_t> tacs, SimTime period = SimTime{30000});
  static AttackProfile si_window_toggle(std::vector<codec::SiWindowLength> seq = {
                                            codec::SiWindowLength::MS5, codec::SiWindowLength::MS10,
                                            codec::SiWindowLength::MS20});
  static AttackProfile ta_delta(int deltaUnits);
};

struct CellConfig {
  CellId id{};
  std::uint16_t pci = 0;
  double txPowerDbm = 30.0;
  double positionM = 0.0;
  codec::Sib1Message sib1;
  AttackProfile attack;
  bool isRogue = false;
  SimTime activeFrom{0};
  std::optional<SimTime> activeUntil;
  codec::Msg3Grant msg3Grant{12, 3, 4};

  bool active_at(SimTime t) const noexcept {
    return t >= activeFrom && (!activeUntil || t < *activeUntil);
  }
};

inline constexpr double kDefaultRogueTxOffsetDb = 5.0;

const char* to_string(AttackKind kind) noexcept;

// Throws InvariantViolation naming the first broken rule.
void validate(const AttackProfile& attack);
void validate(const CellConfig& cell);

// Rogue clone of `target`: bit-identical SIB1, fresh id, no attack yet.
CellConfig harvest_cell_config(const CellConfig& target, CellId freshId,
                               double txOffsetDb = kDefaultRogueTxOffsetDb);

// SIB1 as broadcast at `now`; a pure function of (cell, now).
codec::Sib1Message next_sib1(const CellConfig& cell, SimTime now);

// Per-cell mutable state owned by the event loop.
struct CellRuntime {
  CellConfig config;
  std::uint16_t nextTcRnti = 0x0100;
};

struct RarTransmission {
  std::uint16_t raRnti = 0;
  unsigned legitTa = 0;
  codec::RarPdu pdu;
};

RarTransmission handle_prach(CellRuntime& cell, const Msg1& msg1, Micros measuredRoundTrip,
                             timing::Numerology numerology,
                             double baseQuantumUs = timing::kDefaultBaseQuantumUs,
                             const codec::OccasionGrid& grid = {});

bool ul_receive(const CellConfig& cell, Micros arrivalOffset, const timing::CpTolerance& tol);

// A legitimate cell answers only a decoded Msg3. A rogue cell runs without
// a core network and synthesizes Msg4 from the identity it expects, so the
// victim always perceives RACH success.
std::optional<Msg4> resolve_contention(const CellConfig& cell, const Msg3& msg3, bool decoded);

}  // namespace nrsim::gnb
