#include "adjckpt/schedule.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "adjckpt/error.hpp"

namespace adjckpt::schedule {
namespace {

// Keeps p(n, 1) = n(n-1)/2 inside a 32-bit table entry.
constexpr std::size_t kMaxTableSteps = 65536;

std::uint64_t single_slot_cost(std::size_t n) {
  return static_cast<std::uint64_t>(n) * (n - 1) / 2;
}

void require_positive(std::size_t n, std::size_t m) {
  if (n == 0) throw InvalidArgument("step count must be >= 1");
  if (m == 0) throw InvalidArgument("slot count must be >= 1");
}

}  // namespace

RecomputeTable::RecomputeTable(std::size_t max_steps, std::size_t max_slots)
    : max_steps_(max_steps), max_slots_(0) {
  require_positive(max_steps, max_slots);
  if (max_steps > kMaxTableSteps) {
    throw InvalidArgument("step count " + std::to_string(max_steps) + " exceeds table limit " +
                          std::to_string(kMaxTableSteps));
  }
  max_slots_ = std::max<std::size_t>(1, std::min(max_slots, max_steps - 1));
  const std::size_t n_max = max_steps_;

  row_offset_.assign(max_slots_ + 2, 0);
  for (std::size_t m = 2; m <= max_slots_; ++m) {
    row_offset_[m + 1] = row_offset_[m] + (n_max - m);
  }
  entries_.resize(max_slots_ >= 2 ? row_offset_[max_slots_ + 1] : 0);

  // prev holds p(., m-1), cur p(., m); both dense over 0..n_max.
  std::vector<std::uint64_t> prev(n_max + 1, 0);
  std::vector<std::uint64_t> cur(n_max + 1, 0);
  for (std::size_t n = 1; n <= n_max; ++n) prev[n] = single_slot_cost(n);

  for (std::size_t m = 2; m <= max_slots_; ++m) {
    std::fill(cur.begin(), cur.end(), 0);
    Entry* row = entries_.data() + row_offset_[m];
    for (std::size_t n = m + 1; n <= n_max; ++n) {
      std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
      std::size_t best_split = 0;
      for (std::size_t s = 1; s < n; ++s) {
        // s + p(s, m) strictly increases with s and the tail term is >= 0.
        const std::uint64_t head = s + cur[s];
        if (head >= best) break;
        const std::uint64_t value = head + prev[n - s];
        if (value < best) {
          best = value;
          best_split = s;
        }
      }
      cur[n] = best;
      row[n - m - 1] = Entry{static_cast<std::uint32_t>(best),
                             static_cast<std::uint32_t>(best_split)};
    }
    std::swap(prev, cur);
  }
}

bool RecomputeTable::covers(std::size_t n, std::size_t m) const noexcept {
  if (n == 0 || m == 0 || n > max_steps_) return false;
  return m >= n || m == 1 || m <= max_slots_;
}

const RecomputeTable::Entry& RecomputeTable::entry(std::size_t n, std::size_t m) const {
  return entries_[row_offset_[m] + (n - m - 1)];
}

std::uint64_t RecomputeTable::recompute(std::size_t n, std::size_t m) const {
  require_positive(n, m);
  if (m >= n) return 0;
  if (m == 1) return single_slot_cost(n);
  if (!covers(n, m)) throw InvalidArgument("(n, m) outside recompute table range");
  return entry(n, m).recompute;
}

std::size_t RecomputeTable::split(std::size_t n, std::size_t m) const {
  require_positive(n, m);
  if (m >= n || m == 1) return 0;
  if (!covers(n, m)) throw InvalidArgument("(n, m) outside recompute table range");
  return entry(n, m).split;
}

void RecomputeTable::count_segment(std::size_t n, std::size_t m, std::uint64_t& writes,
                                   std::uint64_t& reads) const {
  // Mirrors the expansion in generate_schedule; the segment's own initial
  // state is stored by the caller.
  while (true) {
    if (n <= m) {
      writes += n - 1;
      reads += n - 1;
      return;
    }
    if (m == 1) {
      reads += n - 1;
      return;
    }
    const std::size_t s = entry(n, m).split;
    writes += 1;
    reads += 1;
    count_segment(n - s, m - 1, writes, reads);
    n = s;
  }
}

std::uint64_t RecomputeTable::writes(std::size_t n, std::size_t m) const {
  require_positive(n, m);
  if (!covers(n, m)) throw InvalidArgument("(n, m) outside recompute table range");
  std::uint64_t w = 1, r = 0;
  count_segment(n, m, w, r);
  return w;
}

std::uint64_t RecomputeTable::reads(std::size_t n, std::size_t m) const {
  require_positive(n, m);
  if (!covers(n, m)) throw InvalidArgument("(n, m) outside recompute table range");
  std::uint64_t w = 1, r = 0;
  count_segment(n, m, w, r);
  return r;
}

std::shared_ptr<const RecomputeTable> shared_table(std::size_t n, std::size_t m) {
  require_positive(n, m);
  static std::mutex mutex;
  static std::shared_ptr<const RecomputeTable> cached;

  // m >= n is answered without any table rows.
  const std::size_t need_m = m >= n ? 1 : m;
  {
    std::lock_guard lock(mutex);
    if (cached && cached->max_steps() >= n && cached->max_slots() >= need_m) return cached;
  }
  std::size_t build_n = n;
  std::size_t build_m = need_m;
  {
    std::lock_guard lock(mutex);
    if (cached) {
      build_n = std::max(build_n, cached->max_steps());
      build_m = std::max(build_m, cached->max_slots());
    }
  }
  auto fresh = std::make_shared<const RecomputeTable>(build_n, build_m);
  std::lock_guard lock(mutex);
  if (!cached || (fresh->max_steps() >= cached->max_steps() &&
                  fresh->max_slots() >= cached->max_slots())) {
    cached = fresh;
  }
  return fresh;
}

std::uint64_t recompute_steps(std::size_t n, std::size_t m) {
  require_positive(n, m);
  if (m >= n) return 0;
  if (m == 1) return single_slot_cost(n);
  return shared_table(n, m)->recompute(n, m);
}

namespace {

class Expander {
 public:
  Expander(const RecomputeTable& table, std::size_t slots, std::vector<Action>& out)
      : table_(table), out_(out) {
    for (std::size_t s = 0; s < slots; ++s) free_.insert(s);
  }

  std::size_t acquire() {
    const std::size_t slot = *free_.begin();
    free_.erase(free_.begin());
    return slot;
  }
  void release(std::size_t slot) { free_.insert(slot); }

  /// Reverses steps a..b-1 with `m` slots, one of which (`slot_a`) already
  /// holds state a. The working state is a on entry.
  void reverse(std::size_t a, std::size_t b, std::size_t m, std::size_t slot_a) {
    while (true) {
      const std::size_t len = b - a;
      if (len <= m) {
        reverse_stored(a, b, slot_a);
        return;
      }
      if (m == 1) {
        reverse_single_slot(a, b, slot_a);
        return;
      }
      const std::size_t mid = a + table_.split(len, m);
      out_.push_back(Advance{a, mid});
      const std::size_t slot = acquire();
      out_.push_back(Store{slot, mid});
      reverse(mid, b, m - 1, slot);
      out_.push_back(Discard{slot});
      release(slot);
      out_.push_back(Restore{slot_a, a});
      b = mid;
    }
  }

 private:
  void reverse_stored(std::size_t a, std::size_t b, std::size_t slot_a) {
    std::vector<std::size_t> held(b - a);
    held[0] = slot_a;
    for (std::size_t k = a + 1; k < b; ++k) {
      out_.push_back(Advance{k - 1, k});
      held[k - a] = acquire();
      out_.push_back(Store{held[k - a], k});
    }
    out_.push_back(PrimalCapture{b - 1});
    out_.push_back(AdjointStep{b - 1});
    for (std::size_t k = b - 1; k-- > a;) {
      const std::size_t slot = held[k + 1 - a];
      out_.push_back(Restore{slot, k + 1});
      out_.push_back(AdjointStep{k});
      out_.push_back(Discard{slot});
      release(slot);
    }
  }

  void reverse_single_slot(std::size_t a, std::size_t b, std::size_t slot_a) {
    if (b - 1 > a) out_.push_back(Advance{a, b - 1});
    out_.push_back(PrimalCapture{b - 1});
    out_.push_back(AdjointStep{b - 1});
    for (std::size_t k = b - 1; k-- > a;) {
      out_.push_back(Restore{slot_a, a});
      if (k > a) out_.push_back(Advance{a, k});
      out_.push_back(PrimalCapture{k});
      out_.push_back(AdjointStep{k});
    }
  }

  const RecomputeTable& table_;
  std::vector<Action>& out_;
  std::set<std::size_t> free_;
};

}  // namespace

std::vector<Action> generate_schedule(const RecomputeTable& table, std::size_t n, std::size_t m) {
  require_positive(n, m);
  if (!table.covers(n, m)) {
    throw InvalidArgument("(n, m) outside recompute table range");
  }
  std::vector<Action> out;
  Expander expander(table, std::min(m, n), out);
  const std::size_t slot0 = expander.acquire();
  out.push_back(Store{slot0, 0});
  expander.reverse(0, n, std::min(m, n), slot0);
  out.push_back(Discard{slot0});
  return out;
}

std::vector<Action> generate_schedule(std::size_t n, std::size_t m) {
  require_positive(n, m);
  return generate_schedule(*shared_table(n, std::min(m, n)), n, m);
}

ScheduleStats schedule_stats(std::span<const Action> actions, std::size_t n, std::size_t m) {
  require_positive(n, m);
  ScheduleStats stats;
  std::vector<std::optional<std::size_t>> slots(m);
  std::size_t occupied = 0;
  std::size_t working = 0;
  std::size_t remaining = n;  // adjoint steps still to run; next is remaining - 1
  std::optional<std::size_t> pending_capture;

  auto check_slot = [&](std::size_t index, std::size_t slot) {
    if (slot >= m) {
      throw ScheduleError(index, "slot " + std::to_string(slot) + " out of range (M=" +
                                     std::to_string(m) + ")");
    }
  };

  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action& action = actions[i];
    if (pending_capture && !std::holds_alternative<AdjointStep>(action)) {
      throw ScheduleError(i, "capture of step " + std::to_string(*pending_capture) +
                                 " not followed by its adjoint step");
    }
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Advance>) {
            if (a.from != working) {
              throw ScheduleError(i, "advance from state " + std::to_string(a.from) +
                                         " but working state is " + std::to_string(working));
            }
            if (a.to <= a.from || a.to > n) throw ScheduleError(i, "advance range invalid");
            stats.primal_steps += a.to - a.from;
            working = a.to;
          } else if constexpr (std::is_same_v<T, Store>) {
            check_slot(i, a.slot);
            if (slots[a.slot]) {
              throw ScheduleError(i, "store into occupied slot " + std::to_string(a.slot));
            }
            if (a.state != working) {
              throw ScheduleError(i, "store of state " + std::to_string(a.state) +
                                         " but working state is " + std::to_string(working));
            }
            slots[a.slot] = a.state;
            ++occupied;
            ++stats.writes;
            stats.peak_slots = std::max(stats.peak_slots, occupied);
          } else if constexpr (std::is_same_v<T, Restore>) {
            check_slot(i, a.slot);
            if (!slots[a.slot]) {
              throw ScheduleError(i, "restore from empty slot " + std::to_string(a.slot));
            }
            if (*slots[a.slot] != a.state) {
              throw ScheduleError(i, "slot " + std::to_string(a.slot) + " holds state " +
                                         std::to_string(*slots[a.slot]) + ", not " +
                                         std::to_string(a.state));
            }
            working = a.state;
            ++stats.reads;
          } else if constexpr (std::is_same_v<T, PrimalCapture>) {
            if (a.step != working || a.step >= n) {
              throw ScheduleError(i, "capture of step " + std::to_string(a.step) +
                                         " but working state is " + std::to_string(working));
            }
            ++stats.primal_steps;
            working = a.step + 1;
            pending_capture = a.step;
          } else if constexpr (std::is_same_v<T, AdjointStep>) {
            if (remaining == 0) throw ScheduleError(i, "adjoint step after reversal completed");
            if (a.step != remaining - 1) {
              throw ScheduleError(i, "adjoint step " + std::to_string(a.step) + " out of order, expected " +
                                         std::to_string(remaining - 1));
            }
            if (pending_capture && *pending_capture != a.step) {
              throw ScheduleError(i, "adjoint step does not match preceding capture");
            }
            if (working != a.step + 1) {
              throw ScheduleError(i, "adjoint step " + std::to_string(a.step) + " needs state " +
                                         std::to_string(a.step + 1) + ", working state is " +
                                         std::to_string(working));
            }
            pending_capture.reset();
            --remaining;
            ++stats.adjoint_steps;
          } else if constexpr (std::is_same_v<T, Discard>) {
            check_slot(i, a.slot);
            if (!slots[a.slot]) throw ScheduleError(i, "discard of empty slot " + std::to_string(a.slot));
            slots[a.slot].reset();
            --occupied;
          }
        },
        action);
  }
  if (pending_capture) throw ScheduleError(actions.size(), "stream ends after a capture");
  if (remaining != 0) {
    throw ScheduleError(actions.size(), "stream ends with " + std::to_string(remaining) +
                                            " adjoint steps outstanding");
  }
  stats.recompute_steps = stats.primal_steps - n;
  return stats;
}

std::string to_string(const Action& action) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Advance>) {
          return "ADVANCE from=" + std::to_string(a.from) + " to=" + std::to_string(a.to);
        } else if constexpr (std::is_same_v<T, Store>) {
          return "STORE slot=" + std::to_string(a.slot) + " state=" + std::to_string(a.state);
        } else if constexpr (std::is_same_v<T, Restore>) {
          return "RESTORE slot=" + std::to_string(a.slot) + " state=" + std::to_string(a.state);
        } else if constexpr (std::is_same_v<T, PrimalCapture>) {
          return "CAPTURE step=" + std::to_string(a.step);
        } else if constexpr (std::is_same_v<T, AdjointStep>) {
          return "ADJOINT step=" + std::to_string(a.step);
        } else {
          return "DISCARD slot=" + std::to_string(a.slot);
        }
      },
      action);
}

namespace {

std::size_t field_value(const std::vector<std::string>& tokens, std::size_t pos,
                        std::string_view key) {
  if (pos >= tokens.size()) {
    throw InvalidArgument("missing field '" + std::string(key) + "'");
  }
  const std::string& token = tokens[pos];
  const auto eq = token.find('=');
  if (eq == std::string::npos || std::string_view(token).substr(0, eq) != key) {
    throw InvalidArgument("expected '" + std::string(key) + "=<n>', got '" + token + "'");
  }
  std::size_t value = 0;
  const char* first = token.data() + eq + 1;
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw InvalidArgument("bad number in '" + token + "'");
  }
  return value;
}

}  // namespace

Action parse_action(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  if (tokens.empty()) throw InvalidArgument("empty action");

  const std::string& verb = tokens[0];
  std::size_t expected = 0;
  Action action;
  if (verb == "ADVANCE") {
    action = Advance{field_value(tokens, 1, "from"), field_value(tokens, 2, "to")};
    expected = 3;
  } else if (verb == "STORE") {
    action = Store{field_value(tokens, 1, "slot"), field_value(tokens, 2, "state")};
    expected = 3;
  } else if (verb == "RESTORE") {
    action = Restore{field_value(tokens, 1, "slot"), field_value(tokens, 2, "state")};
    expected = 3;
  } else if (verb == "CAPTURE") {
    action = PrimalCapture{field_value(tokens, 1, "step")};
    expected = 2;
  } else if (verb == "ADJOINT") {
    action = AdjointStep{field_value(tokens, 1, "step")};
    expected = 2;
  } else if (verb == "DISCARD") {
    action = Discard{field_value(tokens, 1, "slot")};
    expected = 2;
  } else {
    throw InvalidArgument("unknown action '" + verb + "'");
  }
  if (tokens.size() != expected) throw InvalidArgument("trailing tokens after '" + verb + "'");
  return action;
}

void write_schedule(std::ostream& os, std::span<const Action> actions) {
  for (const auto& a : actions) os << to_string(a) << '\n';
}

std::vector<Action> read_schedule(std::istream& is) {
  std::vector<Action> actions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      actions.push_back(parse_action(line));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return actions;
}

}  // namespace adjckpt::schedule
