#include <algorithm>
#include <chrono>
#include <string>

#include "adjckpt/codec.hpp"
#include "adjckpt/error.hpp"

namespace adjckpt {
namespace {

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

CodecStats profile(const Codec& codec, const Field& field, std::size_t repetitions) {
  if (repetitions == 0) throw InvalidArgument("profile needs at least one repetition");
  using Clock = std::chrono::steady_clock;
  CodecStats stats;
  std::vector<std::byte> first;
  std::vector<double> t_c, t_d;
  for (std::size_t r = 0; r < repetitions; ++r) {
    auto start = Clock::now();
    Encoded encoded = codec.encode(field);
    t_c.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    start = Clock::now();
    Field decoded = codec.decode(encoded.bytes);
    t_d.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    if (r == 0) {
      stats = encoded.stats;
      stats.max_abs_error = max_abs_difference(field, decoded);
      first = std::move(encoded.bytes);
    } else if (encoded.bytes != first) {
      throw EncodeError("codec '" + codec.name() + "' is not deterministic (repetition " + std::to_string(r) + ")");
    }
  }
  stats.t_c = median(t_c);
  stats.t_d = median(t_d);
  return stats;
}

}  // namespace adjckpt
