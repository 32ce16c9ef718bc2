#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace adjckpt::perfmodel {

/// Inputs of the runtime model, all strictly positive. Byte quantities are
/// doubles so terabyte-scale sizes need no rounding.
struct PerfParams {
  double step_cost = 0.0;    ///< C, seconds per primal (or adjoint) step
  std::size_t nsteps = 0;    ///< N
  double state_bytes = 0.0;  ///< S, one uncompressed state
  double bandwidth = 0.0;    ///< B, bytes per second
  double memory = 0.0;       ///< bytes available for checkpoints
  double ratio = 1.0;        ///< F >= 1
  double t_c = 0.0;          ///< seconds to compress one state
  double t_d = 0.0;          ///< seconds to decompress one state

  /// Throws InvalidArgument naming the first bad field.
  void validate() const;
};

/// 2 C N: one forward and one reverse sweep with every state kept.
double t_naive(const PerfParams& p);

/// floor(memory / S), or floor(memory F / S) when compressed. Not clamped
/// to N. Throws InfeasibleConfiguration below one checkpoint.
std::size_t slots(const PerfParams& p, bool compressed);

/// p(N, m) C.
double recompute_overhead(const PerfParams& p, std::size_t m);
/// (W + R) S / B for the schedule with m slots.
double storage_overhead_plain(const PerfParams& p, std::size_t m);
/// W (S / (F B) + t_c) + R (S / (F B) + t_d) for the schedule with m slots.
double storage_overhead_compressed(const PerfParams& p, std::size_t m);

/// Checkpointing only, floor(memory / S) slots.
double t_revolve(const PerfParams& p);
/// Checkpointing with compressed states, floor(memory F / S) slots.
double t_combined(const PerfParams& p);

/// Every quantity of one model evaluation.
struct Prediction {
  std::size_t m_plain = 0;
  std::size_t m_compressed = 0;
  std::uint64_t p_plain = 0;
  std::uint64_t p_compressed = 0;
  std::uint64_t w_plain = 0, r_plain = 0;
  std::uint64_t w_compressed = 0, r_compressed = 0;
  double t_naive = 0.0;
  double t_revolve = 0.0;
  double t_combined = 0.0;
  double speedup = 0.0;  ///< t_revolve / t_combined
};

Prediction predict(const PerfParams& p);

enum class Regime {
  checkpoint_required = 1,  ///< memory < N S / F
  compression_fits = 2,     ///< N S / F <= memory < N S
  no_action_needed = 3,     ///< memory >= N S
};

std::string_view regime_name(Regime r);

struct RegimeReport {
  Regime regime = Regime::checkpoint_required;
  double threshold_compressed_fit = 0.0;    ///< N S / F
  double threshold_uncompressed_fit = 0.0;  ///< N S
};

/// Boundaries are inclusive on the side where the trajectory fits. Throws
/// InfeasibleConfiguration when not even one compressed state fits.
RegimeReport classify_regime(const PerfParams& p);

enum class SweepAxis { memory, compute_cost, nsteps };

SweepAxis parse_axis(std::string_view name);
std::string_view axis_name(SweepAxis axis);

struct SweepRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t samples = 0;
  bool log_scale = false;

  /// Sample positions, lo and hi included; nsteps positions are rounded.
  std::vector<double> points() const;
};

/// Parses `lo:hi:samples`.
SweepRange parse_range(std::string_view text);

struct SweepRow {
  double x = 0.0;
  Prediction prediction;
};

/// Evaluates `base` with the axis parameter replaced by each sample point.
/// Rows come back ordered by x. `threads` caps worker threads (0 means the
/// ADJCKPT_THREADS environment variable, else hardware concurrency).
std::vector<SweepRow> sweep(const PerfParams& base, SweepAxis axis, const SweepRange& range,
                            unsigned threads = 0);

inline constexpr std::string_view kCsvHeader =
    "x,speedup,t_revolve_s,t_combined_s,m_plain,m_compressed,p_plain,p_compressed";

std::string csv_row(double x, const Prediction& prediction);
void write_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace adjckpt::perfmodel
