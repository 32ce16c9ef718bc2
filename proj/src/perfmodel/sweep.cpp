#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <string>
#include <thread>

#include "adjckpt/error.hpp"
#include "adjckpt/perfmodel.hpp"
#include "adjckpt/schedule.hpp"

namespace adjckpt::perfmodel {
namespace {

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InvalidArgument("bad " + std::string(what) + " '" + std::string(text) + "' in range");
  }
  return value;
}

PerfParams at(const PerfParams& base, SweepAxis axis, double x) {
  PerfParams p = base;
  switch (axis) {
    case SweepAxis::memory: p.memory = x; break;
    case SweepAxis::compute_cost: p.step_cost = x; break;
    case SweepAxis::nsteps: p.nsteps = static_cast<std::size_t>(x); break;
  }
  return p;
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ADJCKPT_THREADS")) {
      unsigned cap = 0;
      const std::string_view text(env);
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
      if (ec == std::errc{} && ptr == text.data() + text.size() && cap > 0) n = std::min(n, cap);
    }
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

}  // namespace

SweepAxis parse_axis(std::string_view name) {
  if (name == "memory") return SweepAxis::memory;
  if (name == "compute-cost") return SweepAxis::compute_cost;
  if (name == "nsteps") return SweepAxis::nsteps;
  throw InvalidArgument("unknown sweep axis '" + std::string(name) + "' (expected memory, compute-cost or nsteps)");
}

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::memory: return "memory";
    case SweepAxis::compute_cost: return "compute-cost";
    case SweepAxis::nsteps: return "nsteps";
  }
  return "unknown";
}

SweepRange parse_range(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos) {
    throw InvalidArgument("range must look like lo:hi:samples, got '" + std::string(text) + "'");
  }
  SweepRange r;
  r.lo = parse_double(text.substr(0, first), "lower bound");
  r.hi = parse_double(text.substr(first + 1, second - first - 1), "upper bound");
  const double samples = parse_double(text.substr(second + 1), "sample count");
  if (!(samples >= 1.0) || samples != std::floor(samples)) {
    throw InvalidArgument("sample count must be a positive integer");
  }
  r.samples = static_cast<std::size_t>(samples);
  return r;
}

std::vector<double> SweepRange::points() const {
  if (samples == 0) throw InvalidArgument("sample count must be positive");
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw InvalidArgument("range needs finite bounds with lo <= hi");
  }
  if (log_scale && !(lo > 0.0)) throw InvalidArgument("log-scale range needs lo > 0");
  std::vector<double> xs(samples);
  if (samples == 1) {
    xs[0] = lo;
    return xs;
  }
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
    xs[i] = log_scale ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
  }
  xs.front() = lo;
  xs.back() = hi;
  return xs;
}

std::vector<SweepRow> sweep(const PerfParams& base, SweepAxis axis, const SweepRange& range, unsigned threads) {
  std::vector<double> xs = range.points();
  if (axis == SweepAxis::nsteps) {
    for (double& x : xs) {
      x = std::round(x);
      if (x < 1.0) throw InvalidArgument("nsteps samples must be at least 1");
    }
  }
  std::vector<SweepRow> rows(xs.size());

  // Build the largest recompute table up front so workers only read it.
  std::size_t max_n = 1, max_m = 1;
  for (double x : xs) {
    const PerfParams p = at(base, axis, x);
    p.validate();
    for (double bytes : {p.memory, p.memory * p.ratio}) {
      const double m = std::floor(bytes / p.state_bytes);
      if (m >= 1.0 && m < static_cast<double>(p.nsteps)) {
        max_n = std::max(max_n, p.nsteps);
        max_m = std::max(max_m, static_cast<std::size_t>(m));
      }
    }
  }
  if (max_n > 1) schedule::shared_table(max_n, max_m);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < xs.size(); i = next++) {
      if (failed) return;
      try {
        rows[i] = {xs[i], predict(at(base, axis, xs[i]))};
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  const unsigned workers = worker_count(threads, xs.size());
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.x < b.x; });
  return rows;
}

std::string csv_row(double x, const Prediction& pr) {
  return fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{}", x, pr.speedup, pr.t_revolve, pr.t_combined,
                     pr.m_plain, pr.m_compressed, pr.p_plain, pr.p_compressed);
}

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kCsvHeader << '\n';
  for (const SweepRow& row : rows) os << csv_row(row.x, row.prediction) << '\n';
}

}  // namespace adjckpt::perfmodel
