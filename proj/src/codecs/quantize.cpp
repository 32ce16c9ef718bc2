#include <algorithm>
#include <array>
#include <bit>
#include <cfloat>
#include <cmath>
#include <string>

#include "adjckpt/codec.hpp"
#include "adjckpt/error.hpp"

namespace adjckpt {
namespace {

constexpr std::size_t kBlockEdge = 4;
constexpr std::size_t kMaxBlock = kBlockEdge * kBlockEdge * kBlockEdge;
constexpr unsigned kMaxWidth = 52;  // indices stay exact in a double
constexpr double kMaxIndex = 4503599627370496.0;  // 2^52

enum class BlockMode : std::uint8_t { coarse = 0, fine = 1, raw = 2 };

// Shape padded to three dimensions with leading ones.
std::array<std::size_t, 3> padded(std::span<const std::size_t> shape) {
  std::array<std::size_t, 3> dims{1, 1, 1};
  std::copy(shape.begin(), shape.end(), dims.end() - shape.size());
  return dims;
}

/// Calls fn(indices, count) for each block in raster order of the block grid.
template <class Fn>
void for_each_block(std::span<const std::size_t> shape, Fn&& fn) {
  const auto dims = padded(shape);
  std::array<std::size_t, kMaxBlock> idx{};
  for (std::size_t b0 = 0; b0 < dims[0]; b0 += kBlockEdge) {
    for (std::size_t b1 = 0; b1 < dims[1]; b1 += kBlockEdge) {
      for (std::size_t b2 = 0; b2 < dims[2]; b2 += kBlockEdge) {
        std::size_t count = 0;
        for (std::size_t i0 = b0; i0 < std::min(b0 + kBlockEdge, dims[0]); ++i0) {
          for (std::size_t i1 = b1; i1 < std::min(b1 + kBlockEdge, dims[1]); ++i1) {
            const std::size_t row = (i0 * dims[1] + i1) * dims[2];
            for (std::size_t i2 = b2; i2 < std::min(b2 + kBlockEdge, dims[2]); ++i2) {
              idx[count++] = row + i2;
            }
          }
        }
        fn(std::span<const std::size_t>(idx.data(), count));
      }
    }
  }
}

inline double reconstruct(double min, std::uint64_t q, double step) {
  return min + static_cast<double>(q) * step;
}

struct Attempt {
  std::array<std::uint64_t, kMaxBlock> q{};
  unsigned width = 0;
  double error = 0.0;
};

/// Quantizes the block with `step`; false when indices would not be exact.
bool quantize_block(std::span<const double> x, double min, double max, double step, Attempt& out) {
  if (!((max - min) / step < kMaxIndex)) return false;
  std::uint64_t qmax = 0;
  double error = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto q = static_cast<std::uint64_t>(std::llround((x[k] - min) / step));
    out.q[k] = q;
    qmax = std::max(qmax, q);
    error = std::max(error, std::abs(x[k] - reconstruct(min, q, step)));
  }
  out.width = static_cast<unsigned>(std::bit_width(qmax));
  out.error = error;
  return out.width <= kMaxWidth;
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::byte>& out) : out_(out) {}
  void put(std::uint64_t value, unsigned width) {
    if (width == 0) return;
    acc_ |= value << bits_;
    bits_ += width;
    while (bits_ >= 8) {
      out_.push_back(std::byte{static_cast<unsigned char>(acc_ & 0xffu)});
      acc_ >>= 8;
      bits_ -= 8;
    }
  }
  void flush() {
    if (bits_ > 0) out_.push_back(std::byte{static_cast<unsigned char>(acc_ & 0xffu)});
    acc_ = 0;
    bits_ = 0;
  }

 private:
  std::vector<std::byte>& out_;
  std::uint64_t acc_ = 0;
  unsigned bits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::byte> in, std::size_t pos) : in_(in), pos_(pos) {}
  std::uint64_t get(unsigned width) {
    if (width == 0) return 0;
    while (bits_ < width) {
      acc_ |= std::to_integer<std::uint64_t>(in_[pos_++]) << bits_;
      bits_ += 8;
    }
    const std::uint64_t value = acc_ & ((std::uint64_t{1} << width) - 1);
    acc_ >>= width;
    bits_ -= width;
    return value;
  }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::byte> in_;
  std::size_t pos_;
  std::uint64_t acc_ = 0;
  unsigned bits_ = 0;
};

}  // namespace

std::vector<std::byte> QuantizeCodec::quantize(const Field& field, double tolerance, double* max_abs_error) {
  std::vector<std::byte> out;
  out.reserve(field.bytes() / 4);
  std::array<double, kMaxBlock> block{};
  Attempt attempt;
  double worst = 0.0;

  for_each_block(field.shape, [&](std::span<const std::size_t> idx) {
    const std::size_t count = idx.size();
    double min = field.values[idx[0]];
    double max = min;
    for (std::size_t k = 0; k < count; ++k) {
      block[k] = field.values[idx[k]];
      min = std::min(min, block[k]);
      max = std::max(max, block[k]);
    }
    const std::span<const double> x(block.data(), count);
    // Slack for rounding in min + q * step; re-encoding a decoded block then
    // reproduces it exactly.
    const double margin = 8.0 * DBL_EPSILON * std::max(std::abs(min), std::abs(max));

    BlockMode mode = BlockMode::raw;
    if (quantize_block(x, min, max, 2.0 * tolerance, attempt) &&
        (attempt.error == 0.0 || attempt.error <= tolerance - margin)) {
      mode = BlockMode::coarse;
    } else if (quantize_block(x, min, max, tolerance, attempt) &&
               (attempt.error == 0.0 || (tolerance >= margin && attempt.error <= tolerance))) {
      mode = BlockMode::fine;
    }

    out.push_back(std::byte{static_cast<std::uint8_t>(mode)});
    if (mode == BlockMode::raw) {
      for (double v : x) put_f64(out, v);
      return;
    }
    worst = std::max(worst, attempt.error);
    put_f64(out, min);
    out.push_back(std::byte{static_cast<std::uint8_t>(attempt.width)});
    BitWriter writer(out);
    for (std::size_t k = 0; k < count; ++k) writer.put(attempt.q[k], attempt.width);
    writer.flush();
  });
  if (max_abs_error) *max_abs_error = worst;
  return out;
}

void QuantizeCodec::dequantize(std::span<const std::byte> body, std::size_t body_offset,
                               std::span<const std::size_t> shape, double tolerance,
                               std::span<double> out) {
  std::size_t pos = 0;
  auto need = [&](std::size_t bytes, const char* what) {
    if (body.size() - pos < bytes) {
      throw DecodeError(body_offset + body.size(), std::string("truncated ") + what);
    }
  };

  for_each_block(shape, [&](std::span<const std::size_t> idx) {
    need(1, "block header");
    const auto mode_byte = std::to_integer<std::uint8_t>(body[pos]);
    if (mode_byte > static_cast<std::uint8_t>(BlockMode::raw)) {
      throw DecodeError(body_offset + pos, "unknown block mode " + std::to_string(mode_byte));
    }
    const auto mode = static_cast<BlockMode>(mode_byte);
    ++pos;
    if (mode == BlockMode::raw) {
      need(8 * idx.size(), "raw block");
      for (std::size_t k = 0; k < idx.size(); ++k, pos += 8) out[idx[k]] = get_f64(body, pos);
      return;
    }
    need(9, "block header");
    const double min = get_f64(body, pos);
    pos += 8;
    const auto width = std::to_integer<unsigned>(body[pos]);
    if (width > kMaxWidth) throw DecodeError(body_offset + pos, "bad index width " + std::to_string(width));
    ++pos;
    need((idx.size() * width + 7) / 8, "block indices");
    const double step = mode == BlockMode::coarse ? 2.0 * tolerance : tolerance;
    BitReader reader(body, pos);
    for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = reconstruct(min, reader.get(width), step);
    pos += (idx.size() * width + 7) / 8;
  });
  if (pos != body.size()) throw DecodeError(body_offset + pos, "trailing bytes after last block");
}

}  // namespace adjckpt
