#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace nrsim {

// Event-loop clock. Sub-millisecond timing lives in Micros values.
using SimTime = std::chrono::milliseconds;
using Micros = std::chrono::duration<double, std::micro>;

enum class CellId : std::uint32_t {};
enum class UeId : std::uint32_t {};

constexpr std::uint32_t to_underlying(CellId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr std::uint32_t to_underlying(UeId id) noexcept { return static_cast<std::uint32_t>(id); }

inline std::string subject_of(CellId id) { return "cell" + std::to_string(to_underlying(id)); }
inline std::string subject_of(UeId id) { return "ue" + std::to_string(to_underlying(id)); }

// Speed of light in metres per microsecond.
inline constexpr double kSpeedOfLightMPerUs = 299.792;

}  // namespace nrsim
