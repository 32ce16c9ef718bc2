#include "adjckpt/perfmodel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "adjckpt/error.hpp"
#include "adjckpt/schedule.hpp"

namespace adjckpt::perfmodel {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string(name) + " must be positive and finite");
  }
}

struct Counts {
  std::uint64_t recompute = 0;
  std::uint64_t writes = 0;
  std::uint64_t reads = 0;
};

// Slots beyond N buy nothing, so the schedule is evaluated at min(m, N).
Counts schedule_counts(std::size_t n, std::size_t m) {
  const std::size_t used = std::min(m, n);
  const auto table = schedule::shared_table(n, used);
  return {table->recompute(n, used), table->writes(n, used), table->reads(n, used)};
}

std::size_t floor_slots(double bytes, double state_bytes) {
  const double count = std::floor(bytes / state_bytes);
  if (count >= static_cast<double>(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(count);
}

}  // namespace

void PerfParams::validate() const {
  require_positive(step_cost, "step cost");
  if (nsteps == 0) throw InvalidArgument("step count must be positive");
  require_positive(state_bytes, "state bytes");
  require_positive(bandwidth, "bandwidth");
  require_positive(memory, "memory");
  require_positive(ratio, "compression ratio");
  if (ratio < 1.0) throw InvalidArgument("compression ratio must be at least 1");
  require_positive(t_c, "compression time");
  require_positive(t_d, "decompression time");
}

double t_naive(const PerfParams& p) {
  p.validate();
  return 2.0 * p.step_cost * static_cast<double>(p.nsteps);
}

std::size_t slots(const PerfParams& p, bool compressed) {
  p.validate();
  const double bytes = compressed ? p.memory * p.ratio : p.memory;
  const std::size_t m = floor_slots(bytes, p.state_bytes);
  if (m < 1) {
    throw InfeasibleConfiguration(std::string(compressed ? "compressed" : "uncompressed") +
                                  " checkpoint does not fit: memory " + std::to_string(p.memory) +
                                  " bytes, one state needs " +
                                  std::to_string(compressed ? p.state_bytes / p.ratio : p.state_bytes));
  }
  return m;
}

double recompute_overhead(const PerfParams& p, std::size_t m) {
  p.validate();
  if (m == 0) throw InvalidArgument("slot count must be positive");
  return static_cast<double>(schedule_counts(p.nsteps, m).recompute) * p.step_cost;
}

double storage_overhead_plain(const PerfParams& p, std::size_t m) {
  p.validate();
  if (m == 0) throw InvalidArgument("slot count must be positive");
  const Counts c = schedule_counts(p.nsteps, m);
  return static_cast<double>(c.writes + c.reads) * p.state_bytes / p.bandwidth;
}

double storage_overhead_compressed(const PerfParams& p, std::size_t m) {
  p.validate();
  if (m == 0) throw InvalidArgument("slot count must be positive");
  const Counts c = schedule_counts(p.nsteps, m);
  const double copy = p.state_bytes / (p.ratio * p.bandwidth);
  return static_cast<double>(c.writes) * (copy + p.t_c) + static_cast<double>(c.reads) * (copy + p.t_d);
}

double t_revolve(const PerfParams& p) {
  const std::size_t m = slots(p, false);
  return t_naive(p) + recompute_overhead(p, m) + storage_overhead_plain(p, m);
}

double t_combined(const PerfParams& p) {
  const std::size_t m = slots(p, true);
  return t_naive(p) + recompute_overhead(p, m) + storage_overhead_compressed(p, m);
}

Prediction predict(const PerfParams& p) {
  Prediction out;
  out.m_plain = slots(p, false);
  out.m_compressed = slots(p, true);
  const Counts plain = schedule_counts(p.nsteps, out.m_plain);
  const Counts comp = schedule_counts(p.nsteps, out.m_compressed);
  out.p_plain = plain.recompute;
  out.p_compressed = comp.recompute;
  out.w_plain = plain.writes;
  out.r_plain = plain.reads;
  out.w_compressed = comp.writes;
  out.r_compressed = comp.reads;
  out.t_naive = t_naive(p);
  out.t_revolve = t_revolve(p);
  out.t_combined = t_combined(p);
  out.speedup = out.t_revolve / out.t_combined;
  return out;
}

std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::checkpoint_required: return "checkpoint-required";
    case Regime::compression_fits: return "compression-fits";
    case Regime::no_action_needed: return "no-action-needed";
  }
  return "unknown";
}

RegimeReport classify_regime(const PerfParams& p) {
  slots(p, true);
  RegimeReport report;
  const double trajectory = static_cast<double>(p.nsteps) * p.state_bytes;
  report.threshold_uncompressed_fit = trajectory;
  report.threshold_compressed_fit = trajectory / p.ratio;
  if (p.memory >= report.threshold_uncompressed_fit) {
    report.regime = Regime::no_action_needed;
  } else if (p.memory >= report.threshold_compressed_fit) {
    report.regime = Regime::compression_fits;
  } else {
    report.regime = Regime::checkpoint_required;
  }
  return report;
}

}  // namespace adjckpt::perfmodel
