#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace adjckpt {

// Frozen checkpoint frame, all integers little-endian:
//
//   offset  size      field
//   0       4         magic "ACKP"
//   4       2         version (1)
//   6       1         codec id
//   7       1         ndim (1..3)
//   8       8*ndim    shape, u64 each
//   ..      8         codec parameter, f64 (tolerance; 0 when unused)
//   ..      8         body length, u64
//   ..      body

enum class CodecId : std::uint8_t {
  null = 0,
  cast = 1,
  quantize = 2,
  lossless = 3,
  fixed_rate = 4,
};

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kMaxDims = 3;

struct FrameHeader {
  CodecId codec = CodecId::null;
  std::vector<std::size_t> shape;
  double parameter = 0.0;
  std::size_t body_length = 0;
};

std::size_t frame_header_size(std::size_t ndim);

void write_frame_header(const FrameHeader& header, std::vector<std::byte>& out);

/// Parses and validates the header; the body must fill the rest of `bytes`
/// exactly. Returns the body offset through `body_offset`.
FrameHeader read_frame_header(std::span<const std::byte> bytes, std::size_t& body_offset);

// Little-endian scalar helpers used by the body encoders.
void put_u64(std::vector<std::byte>& out, std::uint64_t v);
void put_f64(std::vector<std::byte>& out, double v);
std::uint64_t get_u64(std::span<const std::byte> in, std::size_t offset);
double get_f64(std::span<const std::byte> in, std::size_t offset);

}  // namespace adjckpt
