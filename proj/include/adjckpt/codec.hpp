#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adjckpt/field.hpp"
#include "adjckpt/format.hpp"

namespace adjckpt {

struct CodecStats {
  std::size_t input_bytes = 0;   ///< raw field bytes
  std::size_t output_bytes = 0;  ///< encoded body bytes, frame header excluded
  double ratio = 0.0;            ///< input_bytes / output_bytes
  double t_c = 0.0;              ///< seconds
  double t_d = 0.0;              ///< seconds
  double max_abs_error = 0.0;
};

struct Encoded {
  std::vector<std::byte> bytes;  ///< complete frame, header included
  CodecStats stats;
};

/// Compression contract. Implementations are stateless after construction,
/// so encode and decode may run concurrently on distinct fields.
class Codec {
 public:
  virtual ~Codec() = default;

  virtual std::string name() const = 0;
  virtual CodecId id() const = 0;
  virtual bool lossless() const = 0;

  /// Throws EncodeError for non-finite input or values the codec cannot hold.
  virtual Encoded encode(const Field& field) const = 0;
  /// Throws DecodeError (with byte offset) for corrupt or truncated input.
  virtual Field decode(std::span<const std::byte> bytes) const = 0;
};

/// Base for the built-in codecs: handles the frame header, input validation,
/// timing and error statistics; subclasses supply the body.
class FramedCodec : public Codec {
 public:
  Encoded encode(const Field& field) const final;
  Field decode(std::span<const std::byte> bytes) const final;

 protected:
  struct Body {
    std::vector<std::byte> bytes;
    double parameter = 0.0;  ///< written to the header's tolerance field
    double max_abs_error = 0.0;
  };
  virtual Body encode_body(const Field& field) const = 0;
  /// `body_offset` is the absolute offset of `body` in the frame, for errors.
  virtual void decode_body(std::span<const std::byte> body, std::size_t body_offset,
                           const FrameHeader& header, std::span<double> out) const = 0;
};

/// Bit-exact copy. Ratio 1.
class NullCodec final : public FramedCodec {
 public:
  std::string name() const override { return "null"; }
  CodecId id() const override { return CodecId::null; }
  bool lossless() const override { return true; }

 protected:
  Body encode_body(const Field& field) const override;
  void decode_body(std::span<const std::byte> body, std::size_t body_offset,
                   const FrameHeader& header, std::span<double> out) const override;
};

/// Precision cast to single precision; body is exactly half the input.
class CastCodec final : public FramedCodec {
 public:
  std::string name() const override { return "cast"; }
  CodecId id() const override { return CodecId::cast; }
  bool lossless() const override { return false; }

 protected:
  Body encode_body(const Field& field) const override;
  void decode_body(std::span<const std::byte> body, std::size_t body_offset,
                   const FrameHeader& header, std::span<double> out) const override;
};

/// Fixed-tolerance quantizer: every decoded element lies within `tolerance`
/// (absolute) of the input.
///
/// The field is split into blocks of 4 elements per dimension (partial at the
/// edges). Each block records its minimum and bit-packed indices
/// round((x - min) / step) at the minimal width for the block's range, with
/// step = 2 * tolerance. Blocks where floating-point rounding would break the
/// bound fall back to step = tolerance, then to verbatim storage.
class QuantizeCodec : public FramedCodec {
 public:
  explicit QuantizeCodec(double tolerance);
  std::string name() const override { return "quantize"; }
  CodecId id() const override { return CodecId::quantize; }
  bool lossless() const override { return false; }
  double tolerance() const noexcept { return tolerance_; }

  /// Body for an arbitrary tolerance; shared with the fixed-rate codec.
  static std::vector<std::byte> quantize(const Field& field, double tolerance,
                                         double* max_abs_error = nullptr);
  static void dequantize(std::span<const std::byte> body, std::size_t body_offset,
                         std::span<const std::size_t> shape, double tolerance,
                         std::span<double> out);

 protected:
  Body encode_body(const Field& field) const override;
  void decode_body(std::span<const std::byte> body, std::size_t body_offset,
                   const FrameHeader& header, std::span<double> out) const override;

 private:
  double tolerance_;
};

/// Fixed-rate mode: searches the quantizer tolerance until the body size is
/// within 5% of `bits_per_value` * n / 8. No error bound is promised. Block
/// metadata puts a floor on the rate (about 5 bits/value in 2-D, 20 in 1-D);
/// unreachable targets raise EncodeError.
class FixedRateCodec final : public FramedCodec {
 public:
  explicit FixedRateCodec(double bits_per_value);
  std::string name() const override { return "fixed-rate"; }
  CodecId id() const override { return CodecId::fixed_rate; }
  bool lossless() const override { return false; }
  double rate() const noexcept { return rate_; }

 protected:
  Body encode_body(const Field& field) const override;
  void decode_body(std::span<const std::byte> body, std::size_t body_offset,
                   const FrameHeader& header, std::span<double> out) const override;

 private:
  double rate_;
};

/// Lossless byte-shuffle followed by deflate.
class LosslessCodec final : public FramedCodec {
 public:
  explicit LosslessCodec(int level = 6);
  std::string name() const override { return "lossless"; }
  CodecId id() const override { return CodecId::lossless; }
  bool lossless() const override { return true; }

 protected:
  Body encode_body(const Field& field) const override;
  void decode_body(std::span<const std::byte> body, std::size_t body_offset,
                   const FrameHeader& header, std::span<double> out) const override;

 private:
  int level_;
};

struct CodecOptions {
  double tolerance = 1e-6;  ///< quantize
  double rate = 16.0;       ///< fixed-rate, bits per value
};

/// Names: null, cast, quantize, fixed-rate, lossless.
std::unique_ptr<Codec> make_codec(std::string_view name, const CodecOptions& options = {});

/// Decodes a frame written by any built-in codec, dispatching on its codec id.
Field decode_frame(std::span<const std::byte> bytes);

/// Median times over `repetitions` round trips. Throws if the encoder is not
/// deterministic across repetitions.
CodecStats profile(const Codec& codec, const Field& field, std::size_t repetitions);

}  // namespace adjckpt
