#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "adjckpt/error.hpp"
#include "adjckpt/perfmodel.hpp"
#include "adjckpt/schedule.hpp"

using namespace adjckpt;
using namespace adjckpt::perfmodel;

namespace {

PerfParams large_run() {
  PerfParams p;
  p.step_cost = 0.1;
  p.nsteps = 2500;
  p.state_bytes = 900e6;
  p.bandwidth = 10e9;
  p.memory = 8e9;
  p.ratio = 42.0;
  p.t_c = 0.05;
  p.t_d = 0.05;
  return p;
}

// Unpruned recurrence, one column per slot count up to m_max.
std::uint64_t oracle_recompute(std::size_t n, std::size_t m) {
  if (m >= n) return 0;
  std::vector<std::vector<std::uint64_t>> p(m + 1, std::vector<std::uint64_t>(n + 1, 0));
  for (std::size_t k = 1; k <= n; ++k) p[1][k] = k * (k - 1) / 2;
  for (std::size_t j = 2; j <= m; ++j) {
    for (std::size_t k = j + 1; k <= n; ++k) {
      std::uint64_t best = ~std::uint64_t{0};
      for (std::size_t s = 1; s < k; ++s) best = std::min(best, s + p[j][s] + p[j - 1][k - s]);
      p[j][k] = best;
    }
  }
  return p[m][n];
}

}  // namespace

TEST_CASE("naive time") {
  PerfParams p = large_run();
  p.step_cost = 1.0;
  p.nsteps = 10;
  CHECK(t_naive(p) == 20.0);
  p.step_cost = 0.5;
  p.nsteps = 2500;
  CHECK(t_naive(p) == 2500.0);
}

TEST_CASE("parameter validation") {
  PerfParams p = large_run();
  CHECK_NOTHROW(p.validate());
  for (double PerfParams::*field : {&PerfParams::step_cost, &PerfParams::state_bytes, &PerfParams::bandwidth,
                                    &PerfParams::memory, &PerfParams::ratio, &PerfParams::t_c, &PerfParams::t_d}) {
    PerfParams bad = p;
    bad.*field = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad.*field = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad.*field = std::nan("");
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  }
  p.ratio = 0.5;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = large_run();
  p.nsteps = 0;
  CHECK_THROWS_AS(t_naive(p), InvalidArgument);
}

TEST_CASE("slot counts") {
  PerfParams p = large_run();
  p.state_bytes = 100.0;
  p.memory = 1000.0;
  p.ratio = 4.0;
  CHECK(slots(p, true) == 40);
  CHECK(slots(p, false) == 10);
  p.memory = 99.0;
  CHECK_THROWS_AS(slots(p, false), InfeasibleConfiguration);
  CHECK(slots(p, true) == 3);
  p.memory = 24.0;
  CHECK_THROWS_AS(slots(p, true), InfeasibleConfiguration);

  // The compressed trajectory fits once memory reaches N S / F.
  PerfParams q = large_run();
  q.memory = 2500 * 900e6 / 42.0;
  CHECK(slots(q, true) >= 2500);
  q.memory = 53e9;
  CHECK(slots(q, true) == 2473);
}

TEST_CASE("overhead terms against the schedule") {
  PerfParams p = large_run();
  p.nsteps = 120;
  p.state_bytes = 1e6;
  p.memory = 5e6;
  p.ratio = 3.0;
  const std::size_t m = slots(p, false);
  REQUIRE(m == 5);
  const auto actions = schedule::generate_schedule(120, 5);
  const auto stats = schedule::schedule_stats(actions, 120, 5);
  CHECK(recompute_overhead(p, m) == doctest::Approx(static_cast<double>(stats.recompute_steps) * p.step_cost));
  CHECK(storage_overhead_plain(p, m) ==
        doctest::Approx(static_cast<double>(stats.writes + stats.reads) * p.state_bytes / p.bandwidth));
  const double copy = p.state_bytes / (p.ratio * p.bandwidth);
  CHECK(storage_overhead_compressed(p, m) ==
        doctest::Approx(static_cast<double>(stats.writes) * (copy + p.t_c) +
                        static_cast<double>(stats.reads) * (copy + p.t_d)));
  // Slot counts past N behave as N.
  CHECK(recompute_overhead(p, 120) == 0.0);
  CHECK(recompute_overhead(p, 10000) == 0.0);
  CHECK(storage_overhead_plain(p, 10000) == storage_overhead_plain(p, 120));
}

TEST_CASE("full row recomputed independently") {
  const PerfParams p = large_run();
  const Prediction pr = predict(p);

  // Hand evaluation of every formula from first principles.
  const std::size_t m_plain = static_cast<std::size_t>(std::floor(8e9 / 900e6));
  const std::size_t m_comp = static_cast<std::size_t>(std::floor(8e9 * 42.0 / 900e6));
  CHECK(m_plain == 8);
  CHECK(m_comp == 373);
  CHECK(pr.m_plain == m_plain);
  CHECK(pr.m_compressed == m_comp);

  const std::uint64_t p_plain = oracle_recompute(2500, m_plain);
  const std::uint64_t p_comp = oracle_recompute(2500, m_comp);
  CHECK(pr.p_plain == p_plain);
  CHECK(pr.p_compressed == p_comp);

  const auto plain_stats = schedule::schedule_stats(schedule::generate_schedule(2500, m_plain), 2500, m_plain);
  const auto comp_stats = schedule::schedule_stats(schedule::generate_schedule(2500, m_comp), 2500, m_comp);
  CHECK(plain_stats.recompute_steps == p_plain);
  CHECK(comp_stats.recompute_steps == p_comp);

  const double naive = 2.0 * 0.1 * 2500.0;
  const double revolve = naive + static_cast<double>(p_plain) * 0.1 +
                         static_cast<double>(plain_stats.writes + plain_stats.reads) * 900e6 / 10e9;
  const double copy = 900e6 / (42.0 * 10e9);
  const double combined = naive + static_cast<double>(p_comp) * 0.1 +
                          static_cast<double>(comp_stats.writes) * (copy + 0.05) +
                          static_cast<double>(comp_stats.reads) * (copy + 0.05);
  CHECK(pr.t_naive == doctest::Approx(naive).epsilon(1e-12));
  CHECK(pr.t_revolve == doctest::Approx(revolve).epsilon(1e-12));
  CHECK(pr.t_combined == doctest::Approx(combined).epsilon(1e-12));
  CHECK(pr.speedup == doctest::Approx(revolve / combined).epsilon(1e-12));
  CHECK(pr.speedup > 1.0);
  MESSAGE("large-run row: p_plain=" << p_plain << " p_comp=" << p_comp << " speedup=" << pr.speedup);
}

TEST_CASE("everything fits: both strategies drop recomputation") {
  PerfParams p = large_run();
  p.memory = 3e12;
  const Prediction pr = predict(p);
  CHECK(pr.p_plain == 0);
  CHECK(pr.p_compressed == 0);
  CHECK(pr.t_revolve == doctest::Approx(t_naive(p) + storage_overhead_plain(p, 2500)));
  CHECK(pr.t_combined == doctest::Approx(t_naive(p) + storage_overhead_compressed(p, 2500)));
}

TEST_CASE("regime thresholds") {
  PerfParams p = large_run();
  RegimeReport r = classify_regime(p);
  CHECK(r.regime == Regime::checkpoint_required);
  CHECK(r.threshold_compressed_fit == doctest::Approx(2500 * 900e6 / 42.0));
  CHECK(r.threshold_uncompressed_fit == doctest::Approx(2.25e12));
  CHECK(std::abs(r.threshold_compressed_fit - 53e9) / 53e9 < 0.05);
  CHECK(std::abs(r.threshold_uncompressed_fit - 2.2e12) / 2.2e12 < 0.05);
  CHECK(r.threshold_compressed_fit <= r.threshold_uncompressed_fit);

  p.memory = 100e9;
  CHECK(classify_regime(p).regime == Regime::compression_fits);
  p.memory = 3e12;
  CHECK(classify_regime(p).regime == Regime::no_action_needed);
  p.memory = 2500 * 900e6;
  CHECK(classify_regime(p).regime == Regime::no_action_needed);
  p.memory = r.threshold_compressed_fit;
  CHECK(classify_regime(p).regime == Regime::compression_fits);
  p.memory = 1.0;
  CHECK_THROWS_AS(classify_regime(p), InfeasibleConfiguration);
  CHECK(regime_name(Regime::compression_fits) == "compression-fits");
}

TEST_CASE("compute-dominated speedup approaches the recompute ratio") {
  PerfParams p = large_run();
  p.nsteps = 600;
  p.memory = 4 * p.state_bytes;
  p.ratio = 12.0;
  for (double factor : {1e4, 1e5, 1e7}) {
    p.step_cost = factor * (p.t_c + p.t_d);
    const Prediction pr = predict(p);
    const double limit = (2.0 * 600 + static_cast<double>(pr.p_plain)) / (2.0 * 600 + static_cast<double>(pr.p_compressed));
    CHECK(std::abs(pr.speedup - limit) / limit < 0.01);
  }
}

TEST_CASE("outputs finite and positive over random parameters") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    PerfParams p;
    p.nsteps = 1 + rng() % 400;
    p.state_bytes = std::pow(10.0, 3.0 + 6.0 * u(rng));
    p.memory = p.state_bytes * (1.0 + 600.0 * u(rng));
    p.ratio = 1.0 + 60.0 * u(rng);
    p.bandwidth = std::pow(10.0, 8.0 + 3.0 * u(rng));
    p.step_cost = std::pow(10.0, -4.0 + 5.0 * u(rng));
    p.t_c = std::pow(10.0, -4.0 + 3.0 * u(rng));
    p.t_d = std::pow(10.0, -4.0 + 3.0 * u(rng));
    const Prediction pr = predict(p);
    CHECK(std::isfinite(pr.speedup));
    CHECK(pr.speedup > 0.0);
    CHECK(pr.t_revolve >= pr.t_naive);
    CHECK(pr.t_combined >= pr.t_naive);
    CHECK(pr.m_compressed >= pr.m_plain);
    CHECK(pr.p_compressed <= pr.p_plain);
  }
}

TEST_CASE("range parsing and sample points") {
  SweepRange r = parse_range("1:5:5");
  CHECK(r.points() == std::vector<double>{1, 2, 3, 4, 5});
  r = parse_range("1e9:1e12:4");
  r.log_scale = true;
  const auto xs = r.points();
  CHECK(xs.front() == 1e9);
  CHECK(xs[1] == doctest::Approx(1e10));
  CHECK(xs.back() == 1e12);
  CHECK(parse_range("3:3:1").points() == std::vector<double>{3});
  CHECK_THROWS_AS(parse_range("1:2"), InvalidArgument);
  CHECK_THROWS_AS(parse_range("1:2:3:4"), InvalidArgument);
  CHECK_THROWS_AS(parse_range("a:2:3"), InvalidArgument);
  CHECK_THROWS_AS(parse_range("1:2:0"), InvalidArgument);
  CHECK_THROWS_AS(parse_range("1:2:2.5"), InvalidArgument);
  CHECK_THROWS_AS(parse_range("5:1:3").points(), InvalidArgument);
  CHECK(parse_axis("compute-cost") == SweepAxis::compute_cost);
  CHECK_THROWS_AS(parse_axis("bandwidth"), InvalidArgument);
}

TEST_CASE("sweep rows are ordered and match single evaluations") {
  PerfParams p = large_run();
  p.nsteps = 400;
  SweepRange r{1e9, 400 * 900e6 * 1.5, 40, true};
  const auto serial = sweep(p, SweepAxis::memory, r, 1);
  const auto parallel = sweep(p, SweepAxis::memory, r, 4);
  REQUIRE(serial.size() == 40);
  REQUIRE(parallel.size() == 40);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    if (i > 0) CHECK(serial[i - 1].x <= serial[i].x);
    CHECK(serial[i].x == parallel[i].x);
    CHECK(serial[i].prediction.speedup == parallel[i].prediction.speedup);
    PerfParams q = p;
    q.memory = serial[i].x;
    CHECK(predict(q).speedup == serial[i].prediction.speedup);
  }
  std::ostringstream csv;
  write_csv(csv, serial);
  const std::string text = csv.str();
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 41);
}

TEST_CASE("nsteps sweep rounds sample points") {
  PerfParams p = large_run();
  const auto rows = sweep(p, SweepAxis::nsteps, SweepRange{10.2, 20.7, 3, false}, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].x == 10.0);
  CHECK(rows[2].x == 21.0);
}

TEST_CASE("memory sweep shape") {
  // Compute-dominant kernel: C = 100 (t_c + t_d).
  PerfParams p = large_run();
  p.nsteps = 1000;
  p.step_cost = 100 * (p.t_c + p.t_d);
  const double low = p.nsteps * p.state_bytes / p.ratio;
  const double high = p.nsteps * p.state_bytes;
  const auto rows = sweep(p, SweepAxis::memory, SweepRange{2 * p.state_bytes, 2 * high, 120, true});
  double last_regime3 = -1.0;
  for (const auto& row : rows) {
    PerfParams q = p;
    q.memory = row.x;
    const Regime regime = classify_regime(q).regime;
    if (regime == Regime::checkpoint_required) CHECK(row.prediction.speedup > 1.0);
    if (regime == Regime::no_action_needed) {
      if (last_regime3 >= 0.0) CHECK(row.prediction.speedup == last_regime3);
      last_regime3 = row.prediction.speedup;
      CHECK(std::abs(row.prediction.speedup - 1.0) < 0.01);
    }
    (void)low;
  }
  CHECK(last_regime3 > 0.0);
}

TEST_CASE("speedup grows with the number of steps once the compressed schedule recurses") {
  PerfParams p = large_run();
  p.step_cost = 10 * (p.t_c + p.t_d);
  const std::size_t m_c = slots(p, true);
  REQUIRE(m_c == 373);
  // Grid starts at 3 m_c; see the next case for what happens closer in.
  const auto rows = sweep(p, SweepAxis::nsteps, SweepRange{1200, 4000, 15, false});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CAPTURE(rows[i].x);
    CHECK(rows[i].prediction.speedup >= rows[i - 1].prediction.speedup);
  }
}

TEST_CASE("speedup dips just past the compressed-fit boundary") {
  // With N barely above memory F / S the compressed run recomputes almost
  // nothing, so the ratio starts high and falls before the long-run rise.
  PerfParams p = large_run();
  p.step_cost = 10 * (p.t_c + p.t_d);
  p.nsteps = 380;
  const double near = predict(p).speedup;
  p.nsteps = 980;
  const double dip = predict(p).speedup;
  p.nsteps = 3000;
  const double far = predict(p).speedup;
  CHECK(dip < near);
  CHECK(far > near);
}

TEST_CASE("speedup falls through the compression-fits regime") {
  PerfParams p = large_run();
  p.nsteps = 1000;
  p.step_cost = 100 * (p.t_c + p.t_d);
  const double lo = p.nsteps * p.state_bytes / p.ratio;
  const double hi = p.nsteps * p.state_bytes;
  const auto rows = sweep(p, SweepAxis::memory, SweepRange{lo, hi * 0.999, 60, true});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].prediction.p_compressed == 0);
    CHECK(rows[i].prediction.speedup <= rows[i - 1].prediction.speedup);
  }
  CHECK(rows.front().prediction.speedup > 1.5);
}
