#include "nrsim/gnb.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "nrsim/errors.hpp"

namespace nrsim::gnb {

AttackProfile AttackProfile::value_tag_increment(SimTime period) {
  AttackProfile a;
  a.kind = AttackKind::ValueTagIncrement;
  a.period = period;
  return a;
}

AttackProfile AttackProfile::tac_cycle(std::vector<std::uint32_t> tacs, SimTime period) {
  AttackProfile a;
  a.kind = AttackKind::TacCycle;
  a.period = period;
  a.tacList = std::move(tacs);
  return a;
}

AttackProfile AttackProfile::si_window_toggle(std::vector<codec::SiWindowLength> seq) {
  AttackProfile a;
  a.kind = AttackKind::SiWindowToggle;
  a.sequence = std::move(seq);
  return a;
}

AttackProfile AttackProfile::ta_delta(int deltaUnits) {
  AttackProfile a;
  a.kind = AttackKind::TaDelta;
  a.deltaUnits = deltaUnits;
  return a;
}

const char* to_string(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::ValueTagIncrement: return "value_tag_increment";
    case AttackKind::TacCycle: return "tac_cycle";
    case AttackKind::SiWindowToggle: return "si_window_toggle";
    case AttackKind::TaDelta: return "ta_delta";
  }
  return "?";
}

void validate(const AttackProfile& a) {
  switch (a.kind) {
    case AttackKind::None: break;
    case AttackKind::ValueTagIncrement:
      if (a.period.count() <= 0) throw InvariantViolation("period_ms must be > 0");
      break;
    case AttackKind::TacCycle:
      if (a.period.count() <= 0) throw InvariantViolation("period_ms must be > 0");
      if (a.tacList.empty()) throw InvariantViolation("tac_list must not be empty");
      for (auto tac : a.tacList) {
        if (tac > codec::kTacMax) throw InvariantViolation("tac_list entry exceeds 24 bits");
      }
      break;
    case AttackKind::SiWindowToggle:
      if (a.sequence.empty()) throw InvariantViolation("sequence must not be empty");
      break;
    case AttackKind::TaDelta:
      if (std::abs(a.deltaUnits) > static_cast<int>(timing::kTaCommandMax)) {
        throw InvariantViolation("|delta_units| must not exceed 3846");
      }
      break;
  }
}

void validate(const CellConfig& cell) {
  if (cell.pci > 1007) throw InvariantViolation("pci must be 0..1007");
  if (cell.positionM < 0) throw InvariantViolation("position must be >= 0");
  if (!cell.isRogue && cell.attack.kind != AttackKind::None) {
    throw InvariantViolation("legitimate cells cannot carry an attack profile");
  }
  if (cell.activeUntil && *cell.activeUntil <= cell.activeFrom) {
    throw InvariantViolation("active_until_ms must be after active_from_ms");
  }
  codec::validate(cell.sib1);
  codec::validate(codec::RarPdu{0, 0, cell.msg3Grant, 0});
  validate(cell.attack);
}

CellConfig harvest_cell_config(const CellConfig& target, CellId freshId, double txOffsetDb) {
  CellConfig rogue = target;
  rogue.id = freshId;
  rogue.isRogue = true;
  rogue.attack = AttackProfile::none();
  rogue.txPowerDbm = target.txPowerDbm + txOffsetDb;
  rogue.activeFrom = SimTime{0};
  rogue.activeUntil.reset();
  return rogue;
}

codec::Sib1Message next_sib1(const CellConfig& cell, SimTime now) {
  codec::Sib1Message m = cell.sib1;
  const auto& a = cell.attack;
  switch (a.kind) {
    case AttackKind::ValueTagIncrement: {
      const auto steps = now / a.period;
      m.valueTag = static_cast<std::uint8_t>((cell.sib1.valueTag + steps) % 32);
      break;
    }
    case AttackKind::TacCycle: {
      const auto idx = static_cast<std::size_t>(now / a.period) % a.tacList.size();
      m.trackingAreaCode = a.tacList[idx];
      break;
    }
    case AttackKind::SiWindowToggle: {
      const auto idx = static_cast<std::size_t>(now / cell.sib1.sib1Periodicity) % a.sequence.size();
      m.siWindowLength = a.sequence[idx];
      break;
    }
    case AttackKind::None:
    case AttackKind::TaDelta:
      break;
  }
  return m;
}

RarTransmission handle_prach(CellRuntime& cell, const Msg1& msg1, Micros measuredRoundTrip,
                             timing::Numerology numerology, double baseQuantumUs,
                             const codec::OccasionGrid& grid) {
  RarTransmission tx;
  tx.legitTa = timing::quantize_ta(measuredRoundTrip, numerology, baseQuantumUs);
  int command = static_cast<int>(tx.legitTa);
  if (cell.config.attack.kind == AttackKind::TaDelta) {
    command = std::clamp(command + cell.config.attack.deltaUnits, 0, static_cast<int>(timing::kTaCommandMax));
  }
  tx.pdu.rapid = msg1.preambleIndex;
  tx.pdu.taCommand = static_cast<std::uint16_t>(command);
  tx.pdu.msg3Grant = cell.config.msg3Grant;
  tx.pdu.tcRnti = cell.nextTcRnti++;
  tx.raRnti = codec::compute_ra_rnti(msg1.occasion, grid);
  return tx;
}

bool ul_receive(const CellConfig& /*cell*/, Micros arrivalOffset, const timing::CpTolerance& tol) {
  return timing::is_uplink_decodable(arrivalOffset, tol);
}

std::optional<Msg4> resolve_contention(const CellConfig& cell, const Msg3& msg3, bool decoded) {
  if (!decoded && !cell.isRogue) return std::nullopt;
  return Msg4{msg3.contentionIdentity};
}

}  // namespace nrsim::gnb
