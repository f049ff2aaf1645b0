#include "nrsim/bits.hpp"

#include <string>

#include "nrsim/errors.hpp"

namespace nrsim {

void BitWriter::put(std::uint64_t value, unsigned width) {
  if (width == 0 || width > 64) throw InvariantViolation("bit width must be 1..64");
  if (width < 64 && (value >> width) != 0) {
    throw InvariantViolation("value " + std::to_string(value) + " exceeds " +
                             std::to_string(width) + "-bit field");
  }
  for (unsigned i = width; i-- > 0;) {
    if (bits_ % 8 == 0) buf_.push_back(0);
    if ((value >> i) & 1u) buf_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
    ++bits_;
  }
}

void BitWriter::put_signed(std::int64_t value, unsigned width) {
  const std::int64_t lo = -(std::int64_t{1} << (width - 1));
  const std::int64_t hi = (std::int64_t{1} << (width - 1)) - 1;
  if (value < lo || value > hi) {
    throw InvariantViolation("value " + std::to_string(value) + " exceeds signed " +
                             std::to_string(width) + "-bit field");
  }
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  put(static_cast<std::uint64_t>(value) & mask, width);
}

Bytes BitWriter::finish() && { return std::move(buf_); }

std::uint64_t BitReader::get(unsigned width) {
  if (width == 0 || width > 64) throw MalformedMessage("bit width must be 1..64");
  if (remaining_bits() < width) throw MalformedMessage("truncated field");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i, ++pos_) {
    const auto bit = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
    v = (v << 1) | bit;
  }
  return v;
}

std::int64_t BitReader::get_signed(unsigned width) {
  const std::uint64_t raw = get(width);
  const std::uint64_t sign = std::uint64_t{1} << (width - 1);
  return (raw & sign) ? static_cast<std::int64_t>(raw) - static_cast<std::int64_t>(sign << 1)
                      : static_cast<std::int64_t>(raw);
}

bool BitReader::rest_is_zero() const {
  for (std::size_t p = pos_; p < data_.size() * 8; ++p) {
    if ((data_[p / 8] >> (7 - p % 8)) & 1u) return false;
  }
  return true;
}

}  // namespace nrsim
