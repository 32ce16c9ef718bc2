#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace adjckpt::schedule {

// Action vocabulary. State k is the primal state before step k (state 0 is
// the initial condition, state N the final one). The executor keeps a single
// working state; an AdjointStep for step i consumes working state i + 1.

/// Run primal steps from..to-1 without saving anything.
struct Advance {
  std::size_t from = 0;
  std::size_t to = 0;
  bool operator==(const Advance&) const = default;
};

/// Copy the working state (which must be `state`) into `slot`.
struct Store {
  std::size_t slot = 0;
  std::size_t state = 0;
  bool operator==(const Store&) const = default;
};

/// Load `state` from `slot` into the working state.
struct Restore {
  std::size_t slot = 0;
  std::size_t state = 0;
  bool operator==(const Restore&) const = default;
};

/// Run primal step `step`, keeping its output live for the AdjointStep that
/// must immediately follow.
struct PrimalCapture {
  std::size_t step = 0;
  bool operator==(const PrimalCapture&) const = default;
};

struct AdjointStep {
  std::size_t step = 0;
  bool operator==(const AdjointStep&) const = default;
};

struct Discard {
  std::size_t slot = 0;
  bool operator==(const Discard&) const = default;
};

using Action = std::variant<Advance, Store, Restore, PrimalCapture, AdjointStep, Discard>;

struct ScheduleStats {
  std::uint64_t primal_steps = 0;     ///< every primal step executed, first sweep included
  std::uint64_t recompute_steps = 0;  ///< primal_steps - N
  std::uint64_t adjoint_steps = 0;
  std::uint64_t writes = 0;  ///< Store actions, W(N, M)
  std::uint64_t reads = 0;   ///< Restore actions, R(N, M)
  std::size_t peak_slots = 0;
  bool operator==(const ScheduleStats&) const = default;
};

/// Memoized minimal recomputation counts p(n, m) for all n <= max_steps and
/// m <= max_slots, together with the argmin split used to expand schedules.
///
/// p(n, m) = 0 when m >= n, n(n-1)/2 when m == 1, and otherwise
/// min over 1 <= s <= n-1 of s + p(s, m) + p(n-s, m-1). Ties go to the
/// smallest s. Immutable once built; safe to share between threads.
class RecomputeTable {
 public:
  RecomputeTable(std::size_t max_steps, std::size_t max_slots);

  std::size_t max_steps() const noexcept { return max_steps_; }
  std::size_t max_slots() const noexcept { return max_slots_; }
  bool covers(std::size_t n, std::size_t m) const noexcept;

  std::uint64_t recompute(std::size_t n, std::size_t m) const;
  /// Length of the head segment chosen for (n, m); 0 for base cases.
  std::size_t split(std::size_t n, std::size_t m) const;
  /// Store/Restore counts of the schedule `generate_schedule` emits.
  std::uint64_t writes(std::size_t n, std::size_t m) const;
  std::uint64_t reads(std::size_t n, std::size_t m) const;

 private:
  struct Entry {
    std::uint32_t recompute;
    std::uint32_t split;
  };
  const Entry& entry(std::size_t n, std::size_t m) const;
  void count_segment(std::size_t n, std::size_t m, std::uint64_t& writes,
                     std::uint64_t& reads) const;

  std::size_t max_steps_;
  std::size_t max_slots_;  // rows stored for 2..max_slots_ (clamped below max_steps_)
  std::vector<std::size_t> row_offset_;
  std::vector<Entry> entries_;
};

/// Process-wide table covering at least (n, m). Tables are published
/// atomically and only ever replaced by larger ones.
std::shared_ptr<const RecomputeTable> shared_table(std::size_t n, std::size_t m);

/// p(n, m). Throws InvalidArgument when n == 0 or m == 0.
std::uint64_t recompute_steps(std::size_t n, std::size_t m);

std::vector<Action> generate_schedule(std::size_t n, std::size_t m);
std::vector<Action> generate_schedule(const RecomputeTable& table, std::size_t n, std::size_t m);

/// Replays `actions` symbolically and returns exact counts. Throws
/// ScheduleError naming the first offending action.
ScheduleStats schedule_stats(std::span<const Action> actions, std::size_t n, std::size_t m);

// Line-oriented text form, one action per line, e.g. `STORE slot=2 state=17`.
std::string to_string(const Action& action);
Action parse_action(std::string_view line);
void write_schedule(std::ostream& os, std::span<const Action> actions);
/// Blank lines and lines starting with '#' are skipped.
std::vector<Action> read_schedule(std::istream& is);

}  // namespace adjckpt::schedule
