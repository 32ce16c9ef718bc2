#include "adjckpt/codec.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "adjckpt/error.hpp"

namespace adjckpt {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void validate_field(const Field& field) {
  if (field.shape.empty() || field.shape.size() > kMaxDims) {
    throw InvalidArgument("codecs accept 1 to 3 dimensions, got " + std::to_string(field.shape.size()));
  }
  if (field.values.empty() || element_count(field.shape) != field.values.size()) {
    throw InvalidArgument("field shape does not match its value count");
  }
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    if (!std::isfinite(field.values[i])) {
      throw EncodeError("non-finite value at index " + std::to_string(i));
    }
  }
}

std::string codec_label(CodecId id) {
  switch (id) {
    case CodecId::null: return "null";
    case CodecId::cast: return "cast";
    case CodecId::quantize: return "quantize";
    case CodecId::lossless: return "lossless";
    case CodecId::fixed_rate: return "fixed-rate";
  }
  return "unknown";
}

}  // namespace

Encoded FramedCodec::encode(const Field& field) const {
  validate_field(field);
  const auto start = Clock::now();
  Body body = encode_body(field);
  FrameHeader header{id(), field.shape, body.parameter, body.bytes.size()};
  Encoded out;
  out.bytes.reserve(frame_header_size(field.shape.size()) + body.bytes.size());
  write_frame_header(header, out.bytes);
  out.bytes.insert(out.bytes.end(), body.bytes.begin(), body.bytes.end());
  out.stats.t_c = seconds_since(start);
  out.stats.input_bytes = field.bytes();
  out.stats.output_bytes = body.bytes.size();
  out.stats.ratio = static_cast<double>(out.stats.input_bytes) / static_cast<double>(out.stats.output_bytes);
  out.stats.max_abs_error = lossless() ? 0.0 : body.max_abs_error;
  return out;
}

Field FramedCodec::decode(std::span<const std::byte> bytes) const {
  std::size_t body_offset = 0;
  const FrameHeader header = read_frame_header(bytes, body_offset);
  if (header.codec != id()) {
    throw DecodeError(6, "frame holds codec '" + codec_label(header.codec) + "', expected '" + name() + "'");
  }
  Field out(header.shape);
  decode_body(bytes.subspan(body_offset), body_offset, header, out.values);
  return out;
}

// --- null -------------------------------------------------------------------

FramedCodec::Body NullCodec::encode_body(const Field& field) const {
  Body body;
  body.bytes.reserve(field.bytes());
  for (double v : field.values) put_f64(body.bytes, v);
  return body;
}

void NullCodec::decode_body(std::span<const std::byte> body, std::size_t body_offset,
                            const FrameHeader&, std::span<double> out) const {
  if (body.size() != out.size() * 8) {
    throw DecodeError(body_offset + std::min(body.size(), out.size() * 8),
                      "expected " + std::to_string(out.size() * 8) + " body bytes");
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = get_f64(body, 8 * i);
}

// --- cast -------------------------------------------------------------------

FramedCodec::Body CastCodec::encode_body(const Field& field) const {
  Body body;
  body.bytes.resize(field.size() * 4);
  double worst = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double v = field.values[i];
    if (std::abs(v) > static_cast<double>(std::numeric_limits<float>::max())) {
      throw EncodeError("value at index " + std::to_string(i) + " overflows single precision");
    }
    const auto narrow = static_cast<float>(v);
    worst = std::max(worst, std::abs(v - static_cast<double>(narrow)));
    std::uint32_t bits = std::bit_cast<std::uint32_t>(narrow);
    for (int b = 0; b < 4; ++b) body.bytes[4 * i + b] = std::byte{static_cast<unsigned char>(bits >> (8 * b))};
  }
  body.max_abs_error = worst;
  return body;
}

void CastCodec::decode_body(std::span<const std::byte> body, std::size_t body_offset,
                            const FrameHeader&, std::span<double> out) const {
  if (body.size() != out.size() * 4) {
    throw DecodeError(body_offset + std::min(body.size(), out.size() * 4),
                      "expected " + std::to_string(out.size() * 4) + " body bytes");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::to_integer<std::uint32_t>(body[4 * i + b]) << (8 * b);
    out[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
}

// --- quantize ---------------------------------------------------------------

QuantizeCodec::QuantizeCodec(double tolerance) : tolerance_(tolerance) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw InvalidArgument("quantize tolerance must be positive and finite");
  }
}

FramedCodec::Body QuantizeCodec::encode_body(const Field& field) const {
  Body body;
  body.parameter = tolerance_;
  body.bytes = quantize(field, tolerance_, &body.max_abs_error);
  return body;
}

void QuantizeCodec::decode_body(std::span<const std::byte> body, std::size_t body_offset,
                                const FrameHeader& header, std::span<double> out) const {
  if (!(header.parameter > 0.0) || !std::isfinite(header.parameter)) {
    throw DecodeError(body_offset - 16, "bad tolerance in header");
  }
  dequantize(body, body_offset, header.shape, header.parameter, out);
}

// --- fixed rate ---------------------------------------------------------------

FixedRateCodec::FixedRateCodec(double bits_per_value) : rate_(bits_per_value) {
  if (!(bits_per_value > 0.0) || !std::isfinite(bits_per_value)) {
    throw InvalidArgument("fixed-rate bits per value must be positive");
  }
}

FramedCodec::Body FixedRateCodec::encode_body(const Field& field) const {
  const double target = rate_ * static_cast<double>(field.size()) / 8.0;
  const double upper_ok = 1.05 * target;
  const double lower_ok = 0.95 * target;

  double scale = 0.0;
  for (double v : field.values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;

  // Body size shrinks as the tolerance grows; bisect on log10(tolerance).
  double lo = std::log10(scale) - 17.0;
  double hi = std::log10(scale) + 1.0;
  Body best;
  bool have_best = false;
  auto consider = [&](double log_tol) {
    Body candidate;
    candidate.parameter = std::pow(10.0, log_tol);
    candidate.bytes = QuantizeCodec::quantize(field, candidate.parameter, &candidate.max_abs_error);
    const auto size = static_cast<double>(candidate.bytes.size());
    if (size <= upper_ok && (!have_best || size > static_cast<double>(best.bytes.size()))) {
      best = std::move(candidate);
      have_best = true;
    }
    return size;
  };

  if (consider(hi) > upper_ok) {
    throw EncodeError("rate " + std::to_string(rate_) + " bits/value is below what block metadata allows");
  }
  if (consider(lo) <= upper_ok) return best;  // even the finest tolerance fits
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double size = consider(mid);
    if (size >= lower_ok && size <= upper_ok) break;
    if (size > upper_ok) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

void FixedRateCodec::decode_body(std::span<const std::byte> body, std::size_t body_offset,
                                 const FrameHeader& header, std::span<double> out) const {
  if (!(header.parameter > 0.0) || !std::isfinite(header.parameter)) {
    throw DecodeError(body_offset - 16, "bad tolerance in header");
  }
  QuantizeCodec::dequantize(body, body_offset, header.shape, header.parameter, out);
}

// --- factory ------------------------------------------------------------------

std::unique_ptr<Codec> make_codec(std::string_view name, const CodecOptions& options) {
  if (name == "null") return std::make_unique<NullCodec>();
  if (name == "cast") return std::make_unique<CastCodec>();
  if (name == "quantize") return std::make_unique<QuantizeCodec>(options.tolerance);
  if (name == "fixed-rate") return std::make_unique<FixedRateCodec>(options.rate);
  if (name == "lossless") return std::make_unique<LosslessCodec>();
  throw InvalidArgument("unknown codec '" + std::string(name) +
                        "' (expected null, cast, quantize, fixed-rate or lossless)");
}

Field decode_frame(std::span<const std::byte> bytes) {
  std::size_t body_offset = 0;
  const FrameHeader header = read_frame_header(bytes, body_offset);
  switch (header.codec) {
    case CodecId::null: return NullCodec().decode(bytes);
    case CodecId::cast: return CastCodec().decode(bytes);
    case CodecId::lossless: return LosslessCodec().decode(bytes);
    // The tolerance the body needs travels in the header; the constructor
    // argument only matters for encoding.
    case CodecId::quantize: return QuantizeCodec(1.0).decode(bytes);
    case CodecId::fixed_rate: return FixedRateCodec(1.0).decode(bytes);
  }
  throw DecodeError(6, "unknown codec id");
}

}  // namespace adjckpt
