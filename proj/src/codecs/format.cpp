#include "adjckpt/format.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <string>

#include "adjckpt/error.hpp"

namespace adjckpt {
namespace {

constexpr std::byte kMagic[4] = {std::byte{'A'}, std::byte{'C'}, std::byte{'K'}, std::byte{'P'}};

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  } else {
    return v;
  }
}

bool known_codec(std::uint8_t id) { return id <= static_cast<std::uint8_t>(CodecId::fixed_rate); }

}  // namespace

void put_u64(std::vector<std::byte>& out, std::uint64_t v) {
  v = to_little(v);
  const auto* p = reinterpret_cast<const std::byte*>(&v);
  out.insert(out.end(), p, p + 8);
}

void put_f64(std::vector<std::byte>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::span<const std::byte> in, std::size_t offset) {
  std::uint64_t v = 0;
  std::memcpy(&v, in.data() + offset, 8);
  return to_little(v);
}

double get_f64(std::span<const std::byte> in, std::size_t offset) {
  return std::bit_cast<double>(get_u64(in, offset));
}

std::size_t frame_header_size(std::size_t ndim) { return 8 + 8 * ndim + 16; }

void write_frame_header(const FrameHeader& header, std::vector<std::byte>& out) {
  if (header.shape.empty() || header.shape.size() > kMaxDims) {
    throw InvalidArgument("frame supports 1 to 3 dimensions, got " +
                          std::to_string(header.shape.size()));
  }
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(std::byte{static_cast<unsigned char>(kFormatVersion & 0xff)});
  out.push_back(std::byte{static_cast<unsigned char>(kFormatVersion >> 8)});
  out.push_back(std::byte{static_cast<std::uint8_t>(header.codec)});
  out.push_back(std::byte{static_cast<std::uint8_t>(header.shape.size())});
  for (std::size_t extent : header.shape) put_u64(out, extent);
  put_f64(out, header.parameter);
  put_u64(out, header.body_length);
}

FrameHeader read_frame_header(std::span<const std::byte> bytes, std::size_t& body_offset) {
  if (bytes.size() < 8) throw DecodeError(bytes.size(), "truncated frame header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DecodeError(0, "bad magic");
  const auto version = static_cast<std::uint16_t>(std::to_integer<unsigned>(bytes[4]) |
                                                  (std::to_integer<unsigned>(bytes[5]) << 8));
  if (version != kFormatVersion) {
    throw DecodeError(4, "unsupported format version " + std::to_string(version));
  }
  const auto codec = std::to_integer<std::uint8_t>(bytes[6]);
  if (!known_codec(codec)) throw DecodeError(6, "unknown codec id " + std::to_string(codec));
  const auto ndim = std::to_integer<std::size_t>(bytes[7]);
  if (ndim == 0 || ndim > kMaxDims) throw DecodeError(7, "bad dimension count " + std::to_string(ndim));

  const std::size_t header_size = frame_header_size(ndim);
  if (bytes.size() < header_size) throw DecodeError(bytes.size(), "truncated frame header");

  FrameHeader header;
  header.codec = static_cast<CodecId>(codec);
  std::size_t offset = 8;
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndim; ++d, offset += 8) {
    const std::uint64_t extent = get_u64(bytes, offset);
    if (extent == 0 || count > std::numeric_limits<std::size_t>::max() / 8 / extent) {
      throw DecodeError(offset, "bad extent " + std::to_string(extent));
    }
    count *= extent;
    header.shape.push_back(extent);
  }
  header.parameter = get_f64(bytes, offset);
  offset += 8;
  header.body_length = get_u64(bytes, offset);
  const std::size_t remaining = bytes.size() - header_size;
  if (header.body_length != remaining) {
    throw DecodeError(header.body_length > remaining ? bytes.size() : offset,
                      "body length " + std::to_string(header.body_length) + " but " +
                          std::to_string(remaining) + " bytes follow the header");
  }
  body_offset = header_size;
  return header;
}

}  // namespace adjckpt
