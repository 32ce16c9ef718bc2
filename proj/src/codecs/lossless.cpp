#include <zlib.h>

#include <bit>
#include <string>

#include "adjckpt/codec.hpp"
#include "adjckpt/error.hpp"

namespace adjckpt {

LosslessCodec::LosslessCodec(int level) : level_(level) {
  if (level < 0 || level > 9) throw InvalidArgument("deflate level must be in 0..9");
}

FramedCodec::Body LosslessCodec::encode_body(const Field& field) const {
  // Byte planes, least significant first, so exponent bytes sit together.
  const std::size_t n = field.size();
  std::vector<std::byte> planes(8 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(field.values[i]);
    for (std::size_t p = 0; p < 8; ++p) planes[p * n + i] = std::byte{static_cast<unsigned char>(bits >> (8 * p))};
  }
  uLongf length = compressBound(static_cast<uLong>(planes.size()));
  Body body;
  body.bytes.resize(length);
  const int rc = compress2(reinterpret_cast<Bytef*>(body.bytes.data()), &length,
                           reinterpret_cast<const Bytef*>(planes.data()), static_cast<uLong>(planes.size()), level_);
  if (rc != Z_OK) throw EncodeError("deflate failed with code " + std::to_string(rc));
  body.bytes.resize(length);
  return body;
}

void LosslessCodec::decode_body(std::span<const std::byte> body, std::size_t body_offset,
                                const FrameHeader&, std::span<double> out) const {
  const std::size_t n = out.size();
  std::vector<std::byte> planes(8 * n);
  uLongf length = static_cast<uLongf>(planes.size());
  const int rc = uncompress(reinterpret_cast<Bytef*>(planes.data()), &length,
                            reinterpret_cast<const Bytef*>(body.data()), static_cast<uLong>(body.size()));
  if (rc != Z_OK || length != planes.size()) {
    throw DecodeError(body_offset, "corrupt deflate stream (zlib code " + std::to_string(rc) + ")");
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (std::size_t p = 0; p < 8; ++p) bits |= std::to_integer<std::uint64_t>(planes[p * n + i]) << (8 * p);
    out[i] = std::bit_cast<double>(bits);
  }
}

}  // namespace adjckpt
