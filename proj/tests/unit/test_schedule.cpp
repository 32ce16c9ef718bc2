#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <thread>

#include "adjckpt/error.hpp"
#include "adjckpt/schedule.hpp"

using namespace adjckpt;
using namespace adjckpt::schedule;

namespace {

// Un-memoized recursion straight from the recurrence; exponential, small n only.
std::uint64_t brute_force_recompute(std::size_t n, std::size_t m) {
  if (m >= n) return 0;
  if (m == 1) return n * (n - 1) / 2;
  std::uint64_t best = ~std::uint64_t{0};
  for (std::size_t s = 1; s < n; ++s) {
    best = std::min<std::uint64_t>(
        best, s + brute_force_recompute(s, m) + brute_force_recompute(n - s, m - 1));
  }
  return best;
}

// Full scan over every split with a dense table, no pruning.
std::vector<std::vector<std::uint64_t>> full_scan_table(std::size_t n_max, std::size_t m_max) {
  std::vector<std::vector<std::uint64_t>> p(n_max + 1, std::vector<std::uint64_t>(m_max + 1, 0));
  for (std::size_t m = 1; m <= m_max; ++m) {
    for (std::size_t n = 1; n <= n_max; ++n) {
      if (m >= n) {
        p[n][m] = 0;
      } else if (m == 1) {
        p[n][m] = n * (n - 1) / 2;
      } else {
        std::uint64_t best = ~std::uint64_t{0};
        for (std::size_t s = 1; s < n; ++s) best = std::min(best, s + p[s][m] + p[n - s][m - 1]);
        p[n][m] = best;
      }
    }
  }
  return p;
}

}  // namespace

TEST_CASE("recompute count examples") {
  CHECK(recompute_steps(4, 1) == 6);
  CHECK(recompute_steps(5, 5) == 0);
  // Frozen from the brute-force oracle.
  CHECK(brute_force_recompute(10, 3) == 13);
  CHECK(recompute_steps(10, 3) == 13);
  CHECK(recompute_steps(10, 2) == brute_force_recompute(10, 2));
  CHECK(recompute_steps(1, 1) == 0);
}

TEST_CASE("recompute count rejects empty arguments") {
  CHECK_THROWS_AS(recompute_steps(0, 3), InvalidArgument);
  CHECK_THROWS_AS(recompute_steps(3, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_schedule(0, 1), InvalidArgument);
  CHECK_THROWS_AS(generate_schedule(4, 0), InvalidArgument);
}

TEST_CASE("memoized table matches brute force for small n, m") {
  RecomputeTable table(12, 4);
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t m = 1; m <= 4; ++m) {
      CAPTURE(n);
      CAPTURE(m);
      CHECK(table.recompute(n, m) == brute_force_recompute(n, m));
    }
  }
}

TEST_CASE("pruned table matches unpruned full scan") {
  const std::size_t n_max = 300, m_max = 40;
  const auto reference = full_scan_table(n_max, m_max);
  RecomputeTable table(n_max, m_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t m = 1; m <= m_max; ++m) {
      REQUIRE(table.recompute(n, m) == reference[n][m]);
    }
  }
}

TEST_CASE("boundary and monotonicity properties") {
  RecomputeTable table(150, 25);
  for (std::size_t n = 1; n <= 100; ++n) CHECK(table.recompute(n, 1) == n * (n - 1) / 2);
  for (std::size_t n = 1; n <= 150; ++n) {
    for (std::size_t m = 1; m <= 25; ++m) {
      if (m >= n) REQUIRE(table.recompute(n, m) == 0);
      if (m < 25) REQUIRE(table.recompute(n, m + 1) <= table.recompute(n, m));
      if (n < 150) REQUIRE(table.recompute(n + 1, m) >= table.recompute(n, m));
    }
  }
}

TEST_CASE("single-step schedule") {
  const auto actions = generate_schedule(1, 1);
  const std::vector<Action> expected{Store{0, 0}, PrimalCapture{0}, AdjointStep{0}, Discard{0}};
  CHECK(actions == expected);
  const auto stats = schedule_stats(actions, 1, 1);
  CHECK(stats.recompute_steps == 0);
  CHECK(stats.primal_steps == 1);
}

TEST_CASE("full storage schedule") {
  const auto actions = generate_schedule(3, 3);
  const auto stats = schedule_stats(actions, 3, 3);
  CHECK(stats.recompute_steps == 0);
  CHECK(stats.writes == 3);
  CHECK(stats.reads == 2);
  CHECK(stats.peak_slots == 3);
  CHECK(stats.adjoint_steps == 3);
}

TEST_CASE("generated schedules replay exactly p(n, m) extra steps") {
  SUBCASE("20 steps, 4 slots") {
    const auto stats = schedule_stats(generate_schedule(20, 4), 20, 4);
    CHECK(stats.recompute_steps == 32);  // brute-force oracle value
    CHECK(brute_force_recompute(20, 4) == 32);
  }
  SUBCASE("10 steps, 2 slots") {
    const auto stats = schedule_stats(generate_schedule(10, 2), 10, 2);
    CHECK(stats.recompute_steps == recompute_steps(10, 2));
    CHECK(stats.peak_slots <= 2);
  }
  SUBCASE("grid") {
    auto table = shared_table(80, 10);
    for (std::size_t n = 1; n <= 80; ++n) {
      for (std::size_t m = 1; m <= 10; ++m) {
        const auto actions = generate_schedule(*table, n, m);
        const auto stats = schedule_stats(actions, n, m);
        REQUIRE(stats.recompute_steps == table->recompute(n, m));
        REQUIRE(stats.peak_slots <= m);
        REQUIRE(stats.writes == table->writes(n, m));
        REQUIRE(stats.reads == table->reads(n, m));
      }
    }
  }
}

TEST_CASE("adjoint steps appear once each in decreasing order") {
  const auto actions = generate_schedule(37, 3);
  std::vector<std::size_t> order;
  for (const auto& a : actions) {
    if (const auto* adj = std::get_if<AdjointStep>(&a)) order.push_back(adj->step);
  }
  REQUIRE(order.size() == 37);
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == 36 - i);
}

TEST_CASE("malformed streams are rejected with the offending index") {
  SUBCASE("restore before any store") {
    const std::vector<Action> actions{Restore{0, 0}, PrimalCapture{0}, AdjointStep{0}};
    try {
      schedule_stats(actions, 1, 1);
      FAIL("expected ScheduleError");
    } catch (const ScheduleError& e) {
      CHECK(e.index() == 0);
    }
  }
  SUBCASE("adjoint out of order") {
    const std::vector<Action> actions{Store{0, 0}, Advance{0, 1}, AdjointStep{1}};
    try {
      schedule_stats(actions, 2, 2);
      FAIL("expected ScheduleError");
    } catch (const ScheduleError& e) {
      CHECK(e.index() == 2);
    }
  }
  SUBCASE("too many slots") {
    const std::vector<Action> actions{Store{0, 0}, Advance{0, 1}, Store{1, 1}};
    CHECK_THROWS_AS(schedule_stats(actions, 2, 1), ScheduleError);
  }
  SUBCASE("store into occupied slot") {
    const std::vector<Action> actions{Store{0, 0}, Advance{0, 1}, Store{0, 1}};
    CHECK_THROWS_AS(schedule_stats(actions, 2, 2), ScheduleError);
  }
  SUBCASE("restore after discard") {
    const std::vector<Action> actions{Store{0, 0}, Discard{0}, Restore{0, 0}};
    try {
      schedule_stats(actions, 1, 1);
      FAIL("expected ScheduleError");
    } catch (const ScheduleError& e) {
      CHECK(e.index() == 2);
    }
  }
  SUBCASE("capture not followed by adjoint") {
    const std::vector<Action> actions{PrimalCapture{0}, Store{0, 1}};
    CHECK_THROWS_AS(schedule_stats(actions, 1, 1), ScheduleError);
  }
  SUBCASE("incomplete reversal") {
    const std::vector<Action> actions{Store{0, 0}, Advance{0, 1}, PrimalCapture{1}, AdjointStep{1}};
    try {
      schedule_stats(actions, 2, 1);
      FAIL("expected ScheduleError");
    } catch (const ScheduleError& e) {
      CHECK(e.index() == actions.size());
    }
  }
}

TEST_CASE("text form round trips") {
  const auto actions = generate_schedule(25, 3);
  std::stringstream ss;
  write_schedule(ss, actions);
  CHECK(read_schedule(ss) == actions);

  CHECK(to_string(Store{2, 17}) == "STORE slot=2 state=17");
  CHECK(parse_action("RESTORE slot=1 state=4") == Action{Restore{1, 4}});
  CHECK_THROWS_AS(parse_action("STORE slot=x state=1"), InvalidArgument);
  CHECK_THROWS_AS(parse_action("JUMP step=1"), InvalidArgument);
  CHECK_THROWS_AS(parse_action("ADJOINT step=1 extra"), InvalidArgument);
}

TEST_CASE("shared table is safe under concurrent queries") {
  std::vector<std::uint64_t> results(8);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < results.size(); ++t) {
    threads.emplace_back([t, &results] { results[t] = recompute_steps(60 + 10 * t, 2 + t); });
  }
  for (auto& th : threads) th.join();
  for (std::size_t t = 0; t < results.size(); ++t) {
    CHECK(results[t] == RecomputeTable(60 + 10 * t, 2 + t).recompute(60 + 10 * t, 2 + t));
  }
}
