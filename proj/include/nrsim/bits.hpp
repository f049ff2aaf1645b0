#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nrsim {

using Bytes = std::vector<std::uint8_t>;

// MSB-first bit packer. Values wider than `width` are a caller bug and throw
// InvariantViolation rather than being silently truncated.
class BitWriter {
 public:
  void put(std::uint64_t value, unsigned width);
  void put_bool(bool v) { put(v ? 1u : 0u, 1); }
  void put_signed(std::int64_t value, unsigned width);

  std::size_t bit_size() const noexcept { return bits_; }
  // Zero-pads to the next octet boundary and hands over the buffer.
  Bytes finish() &&;

 private:
  Bytes buf_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}

  // Throws MalformedMessage when fewer than `width` bits remain.
  std::uint64_t get(unsigned width);
  bool get_bool() { return get(1) != 0; }
  std::int64_t get_signed(unsigned width);

  std::size_t remaining_bits() const noexcept { return data_.size() * 8 - pos_; }
  // True iff every unread bit is zero.
  bool rest_is_zero() const;

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace nrsim
