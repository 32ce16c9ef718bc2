#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "../support/fields.hpp"
#include "adjckpt/codec.hpp"
#include "adjckpt/error.hpp"

using namespace adjckpt;
using testsupport::FieldKind;

namespace {

Field round_trip(const Codec& codec, const Field& f) { return codec.decode(codec.encode(f).bytes); }

std::vector<std::byte> bytes_of(std::initializer_list<unsigned> values) {
  std::vector<std::byte> out;
  for (unsigned v : values) out.push_back(std::byte{static_cast<unsigned char>(v)});
  return out;
}

}  // namespace

TEST_CASE("frame header bytes are frozen") {
  Field f({2, 3}, 1.5);
  const Encoded e = NullCodec().encode(f);
  REQUIRE(e.bytes.size() == 40 + 48);
  const auto expected = bytes_of({'A', 'C', 'K', 'P', 1, 0, 0, 2,    //
                                  2, 0, 0, 0, 0, 0, 0, 0,            // shape[0]
                                  3, 0, 0, 0, 0, 0, 0, 0,            // shape[1]
                                  0, 0, 0, 0, 0, 0, 0, 0,            // parameter 0.0
                                  48, 0, 0, 0, 0, 0, 0, 0});         // body length
  CHECK(std::equal(expected.begin(), expected.end(), e.bytes.begin()));
  // 1.5 = 0x3FF8000000000000
  const auto one_and_half = bytes_of({0, 0, 0, 0, 0, 0, 0xf8, 0x3f});
  CHECK(std::equal(one_and_half.begin(), one_and_half.end(), e.bytes.begin() + 40));

  const Encoded q = QuantizeCodec(0.25).encode(f);
  CHECK(std::to_integer<int>(q.bytes[6]) == 2);
  double tol = 0.0;
  std::memcpy(&tol, q.bytes.data() + 24, 8);
  CHECK(tol == 0.25);
}

TEST_CASE("null codec is bit exact with ratio one") {
  std::mt19937_64 rng(1);
  NullCodec codec;
  for (int trial = 0; trial < 50; ++trial) {
    Field f = testsupport::make_field(FieldKind::gaussian, testsupport::random_shape(rng), 1e3, rng);
    f.values[0] = -0.0;
    f.values.back() = std::numeric_limits<double>::denorm_min();
    const Encoded e = codec.encode(f);
    CHECK(e.stats.ratio == 1.0);
    CHECK(e.stats.max_abs_error == 0.0);
    CHECK(bitwise_equal(codec.decode(e.bytes), f));
  }
}

TEST_CASE("cast codec halves the body exactly") {
  std::mt19937_64 rng(2);
  CastCodec codec;
  Field f = testsupport::make_field(FieldKind::uniform, {17, 9}, 10.0, rng);
  const Encoded e = codec.encode(f);
  CHECK(e.stats.output_bytes * 2 == e.stats.input_bytes);
  CHECK(e.stats.ratio == 2.0);
  const Field back = codec.decode(e.bytes);
  CHECK(back.shape == f.shape);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(back.values[i] == static_cast<double>(static_cast<float>(f.values[i])));
  }
  CHECK(e.stats.max_abs_error == max_abs_difference(f, back));
  CHECK_THROWS_AS(codec.encode(Field({1}, 1e300)), EncodeError);
}

TEST_CASE("encode rejects non-finite input") {
  for (const char* name : {"null", "cast", "quantize", "fixed-rate", "lossless"}) {
    auto codec = make_codec(name);
    Field f({8}, 1.0);
    f.values[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(codec->encode(f), EncodeError);
    f.values[3] = -std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(codec->encode(f), EncodeError);
  }
  CHECK_THROWS_AS(make_codec("zfp"), InvalidArgument);
  CHECK_THROWS_AS(QuantizeCodec(0.0), InvalidArgument);
  CHECK_THROWS_AS(QuantizeCodec(-1.0), InvalidArgument);
  CHECK_THROWS_AS(NullCodec().encode(Field({2, 2, 2, 2}, 0.0)), InvalidArgument);
}

TEST_CASE("decode errors carry offsets") {
  std::mt19937_64 rng(3);
  const Field f = testsupport::make_field(FieldKind::smooth, {10, 10}, 1.0, rng);
  for (const char* name : {"null", "cast", "quantize", "fixed-rate", "lossless"}) {
    CAPTURE(name);
    auto codec = make_codec(name);
    const auto good = codec->encode(f).bytes;

    auto bad = good;
    bad[0] = std::byte{'X'};
    try {
      codec->decode(bad);
      FAIL("expected decode error");
    } catch (const DecodeError& e) {
      CHECK(e.offset() == 0);
    }

    bad = good;
    bad[4] = std::byte{9};
    CHECK_THROWS_AS(codec->decode(bad), DecodeError);

    for (std::size_t cut : {std::size_t{3}, std::size_t{20}, good.size() - 1}) {
      std::vector<std::byte> truncated(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(cut));
      CHECK_THROWS_AS(codec->decode(truncated), DecodeError);
    }
  }
  // Frame of one codec handed to another.
  const auto frame = NullCodec().encode(f).bytes;
  try {
    CastCodec().decode(frame);
    FAIL("expected decode error");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == 6);
  }
}

TEST_CASE("corrupt quantized bodies fail cleanly") {
  std::mt19937_64 rng(4);
  const Field f = testsupport::make_field(FieldKind::gaussian, {12, 12}, 1.0, rng);
  QuantizeCodec codec(1e-3);
  const auto good = codec.encode(f).bytes;
  const std::size_t body = frame_header_size(2);
  auto bad = good;
  bad[body] = std::byte{7};  // first block mode
  try {
    codec.decode(bad);
    FAIL("expected decode error");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == body);
  }
  // Random byte flips never crash; they either decode or raise DecodeError.
  for (int trial = 0; trial < 300; ++trial) {
    auto flipped = good;
    std::uniform_int_distribution<std::size_t> pos(body, good.size() - 1);
    flipped[pos(rng)] ^= std::byte{static_cast<unsigned char>(1u << (trial % 8))};
    try {
      const Field out = codec.decode(flipped);
      CHECK(out.size() == f.size());
    } catch (const DecodeError&) {
    }
  }
}

TEST_CASE("quantizer error bound across tolerances and magnitudes") {
  std::mt19937_64 rng(5);
  const FieldKind kinds[] = {FieldKind::uniform, FieldKind::gaussian, FieldKind::smooth};
  const double scales[] = {1e-6, 1.0, 3.7e4, 1e12};
  std::size_t checked = 0;
  for (int trial = 0; trial < 240; ++trial) {
    const double scale = scales[trial % 4];
    Field f = testsupport::make_field(kinds[trial % 3], testsupport::random_shape(rng, 1024), scale, rng);
    for (int e = 0; e <= 15; ++e) {
      const double tol = scale * std::pow(10.0, -e);
      QuantizeCodec codec(tol);
      const Encoded enc = codec.encode(f);
      const Field back = codec.decode(enc.bytes);
      REQUIRE(back.shape == f.shape);
      const double err = max_abs_difference(f, back);
      CHECK(err <= tol);
      CHECK(enc.stats.max_abs_error == err);
      ++checked;
    }
  }
  CHECK(checked == 240 * 16);
}

TEST_CASE("quantizer handles constant and edge-case blocks") {
  QuantizeCodec codec(1e-3);
  const Field constant({5, 7}, 42.0);
  const Encoded e = codec.encode(constant);
  CHECK(bitwise_equal(codec.decode(e.bytes), constant));
  CHECK(e.stats.ratio > 4.0);

  // Huge range relative to tolerance forces verbatim blocks.
  Field wide({4}, 0.0);
  wide.values = {1e300, -1e300, 5e-300, 0.0};
  QuantizeCodec tiny(1e-300);
  CHECK(max_abs_difference(tiny.decode(tiny.encode(wide).bytes), wide) <= 1e-300);
}

TEST_CASE("quantizer round trip is idempotent") {
  std::mt19937_64 rng(6);
  const FieldKind kinds[] = {FieldKind::uniform, FieldKind::gaussian, FieldKind::smooth};
  for (int trial = 0; trial < 200; ++trial) {
    const double scale = std::pow(10.0, static_cast<int>(rng() % 13) - 6);
    const Field f = testsupport::make_field(kinds[trial % 3], testsupport::random_shape(rng, 1024), scale, rng);
    const double tol = scale * std::pow(10.0, -static_cast<int>(rng() % 16));
    QuantizeCodec codec(tol);
    const Field once = round_trip(codec, f);
    const Field twice = round_trip(codec, once);
    CHECK(bitwise_equal(once, twice));
  }
}

TEST_CASE("smooth fields compress better than noise") {
  std::mt19937_64 rng(7);
  for (double tol : {1e-2, 1e-4, 1e-6}) {
    QuantizeCodec codec(tol);
    const Field smooth = testsupport::smooth_2d(128, 96, 1.0);
    const Field noise = testsupport::make_field(FieldKind::uniform, {128, 96}, 1.0, rng);
    CHECK(codec.encode(smooth).stats.ratio > codec.encode(noise).stats.ratio);
  }
}

TEST_CASE("fixed-rate codec meets its byte target") {
  std::mt19937_64 rng(8);
  const Field f = testsupport::smooth_2d(200, 160, 3.0);
  // A 4x4 block costs at least 10 bytes of metadata, so 2-D rates start near 5.
  for (double rate : {6.0, 8.0, 16.0, 32.0}) {
    CAPTURE(rate);
    FixedRateCodec codec(rate);
    const Encoded e = codec.encode(f);
    const double target = rate * static_cast<double>(f.size()) / 8.0;
    CHECK(static_cast<double>(e.stats.output_bytes) <= 1.05 * target);
    CHECK(static_cast<double>(e.stats.output_bytes) >= 0.95 * target);
    const Field back = codec.decode(e.bytes);
    CHECK(max_abs_difference(f, back) == e.stats.max_abs_error);
  }
  // Below the block metadata floor the target is unreachable.
  CHECK_THROWS_AS(FixedRateCodec(4.0).encode(f), EncodeError);
}

TEST_CASE("lossless codec is exact") {
  std::mt19937_64 rng(9);
  LosslessCodec codec;
  for (int trial = 0; trial < 30; ++trial) {
    const Field f = testsupport::make_field(FieldKind::gaussian, testsupport::random_shape(rng), 1.0, rng);
    const Encoded e = codec.encode(f);
    CHECK(e.stats.max_abs_error == 0.0);
    CHECK(bitwise_equal(codec.decode(e.bytes), f));
  }
}

TEST_CASE("profile times round trips and checks determinism") {
  std::mt19937_64 rng(10);
  const Field f = testsupport::make_field(FieldKind::smooth, {64, 64}, 1.0, rng);
  QuantizeCodec codec(1e-5);
  const CodecStats stats = profile(codec, f, 5);
  CHECK(stats.t_c > 0.0);
  CHECK(stats.t_d > 0.0);
  CHECK(stats.ratio == codec.encode(f).stats.ratio);
  CHECK(stats.max_abs_error <= 1e-5);
  CHECK_THROWS_AS(profile(codec, f, 0), InvalidArgument);
}
