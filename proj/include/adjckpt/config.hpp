#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "adjckpt/wave.hpp"

namespace adjckpt {

/// Toy benchmark settings, read from `key = value` lines. `#` starts a
/// comment. Unknown keys are errors.
struct RunConfig {
  std::vector<std::size_t> grid{200, 200};  ///< `grid = 200x200` or `grid = 500`
  double spacing = 10.0;                    ///< meters
  double dt = 0.0;                          ///< seconds; 0 picks half the CFL limit
  std::size_t nt = 300;
  double velocity = 1500.0;     ///< m/s, background model
  double anomaly = 0.05;        ///< relative velocity bump in the model that made the data
  double frequency = 0.0;       ///< Ricker peak, Hz; 0 picks 10 points per wavelength
  std::string codec = "quantize";
  double tolerance = 1e-6;      ///< quantize, absolute (wavefields are scaled to max |u| = 1)
  double rate = 16.0;           ///< fixed-rate bits per value
  std::size_t budget = 0;       ///< checkpoint bytes; 0 means budget_states frames
  double budget_states = 4.0;
  std::size_t repeats = 3;      ///< timed runs per configuration; the median is kept
  std::size_t profile_repetitions = 5;
};

/// `origin` names the source in error messages. Throws ConfigError with the
/// line number.
RunConfig parse_run_config(std::istream& in, std::string_view origin = "config");
RunConfig load_run_config(const std::filesystem::path& path);

/// Accepts plain integers and decimal/binary suffixes: KB MB GB TB, KiB MiB
/// GiB TiB (case-insensitive, optional B).
std::size_t parse_byte_size(std::string_view text);

/// Builds the toy problem: homogeneous background model, Ricker source and a
/// receiver line near the top edge, and observed data from the model with a
/// velocity anomaly. The wavelet is scaled so the wavefield peaks near 1.
WaveParams make_toy_problem(const RunConfig& config);

}  // namespace adjckpt
