#include "adjckpt/executor.hpp"

#include <chrono>
#include <string>
#include <type_traits>
#include <variant>

#include "adjckpt/error.hpp"

namespace adjckpt {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class Runner {
 public:
  Runner(const Stepper& stepper, CheckpointStore& store, const Codec& codec)
      : stepper_(stepper), store_(store), codec_(codec), working_(stepper.initial_state()),
        adjoint_(stepper.initial_adjoint_state()) {}

  void run(std::span<const schedule::Action> actions) {
    const auto start = Clock::now();
    for (index_ = 0; index_ < actions.size(); ++index_) {
      if (captured_ && !std::holds_alternative<schedule::AdjointStep>(actions[index_])) {
        fail("captured step not followed by its adjoint step");
      }
      std::visit([this](const auto& a) { apply(a); }, actions[index_]);
    }
    if (next_adjoint_ != -1) {
      throw ScheduleError(actions.size(), "stream ended before adjoint step " + std::to_string(next_adjoint_));
    }
    stats_.total_seconds = seconds_since(start);
  }

  AdjointResult result() && { return {std::move(adjoint_), stats_}; }

 private:
  void fail(const std::string& what) const { throw ScheduleError(index_, what); }

  void expect_working(std::size_t state) const {
    if (working_step_ != state) {
      fail("working state is " + std::to_string(working_step_) + ", action needs " + std::to_string(state));
    }
  }

  void step_forward() {
    const auto start = Clock::now();
    stepper_.forward(working_, working_step_);
    stats_.forward_seconds += seconds_since(start);
    ++stats_.primal_steps;
    ++working_step_;
  }

  void apply(const schedule::Advance& a) {
    expect_working(a.from);
    if (a.to < a.from || a.to > stepper_.nsteps()) fail("bad advance range");
    while (working_step_ < a.to) step_forward();
  }

  void apply(const schedule::Store& s) {
    expect_working(s.state);
    const auto start = Clock::now();
    try {
      store_.put(s.slot, s.state, working_, codec_);
    } catch (const CapacityError& e) {
      throw CapacityError(e.required(), e.available(),
                          "action " + std::to_string(index_) + ", store slot " + std::to_string(s.slot) +
                              " state " + std::to_string(s.state));
    }
    stats_.put_seconds += seconds_since(start);
    ++stats_.puts;
    stats_.stored_bytes_total += store_.stored_bytes(s.slot);
    stats_.peak_store_bytes = std::max(stats_.peak_store_bytes, store_.bytes_used());
  }

  void apply(const schedule::Restore& r) {
    const auto start = Clock::now();
    CheckpointStore::Checkpoint cp;
    try {
      cp = store_.get(r.slot);
    } catch (const DecodeError& e) {
      throw DecodeError(e.offset(), "slot " + std::to_string(r.slot) + ": " + e.what());
    } catch (const MissingCheckpoint&) {
      fail("restore from empty slot " + std::to_string(r.slot));
    }
    stats_.get_seconds += seconds_since(start);
    ++stats_.gets;
    if (cp.step != r.state) {
      fail("slot " + std::to_string(r.slot) + " holds state " + std::to_string(cp.step) + ", not " +
           std::to_string(r.state));
    }
    working_ = std::move(cp.state);
    working_step_ = r.state;
  }

  void apply(const schedule::PrimalCapture& c) {
    expect_working(c.step);
    if (c.step >= stepper_.nsteps()) fail("capture past the last step");
    step_forward();
    captured_ = true;
  }

  void apply(const schedule::AdjointStep& a) {
    if (static_cast<std::int64_t>(a.step) != next_adjoint_) {
      fail("adjoint step " + std::to_string(a.step) + " out of order, expected " + std::to_string(next_adjoint_));
    }
    expect_working(a.step + 1);
    const auto start = Clock::now();
    stepper_.adjoint(adjoint_, working_, a.step);
    stats_.adjoint_seconds += seconds_since(start);
    ++stats_.adjoint_steps;
    --next_adjoint_;
    captured_ = false;
  }

  void apply(const schedule::Discard& d) {
    if (!store_.occupied(d.slot)) fail("discard of empty slot " + std::to_string(d.slot));
    store_.free(d.slot);
  }

  const Stepper& stepper_;
  CheckpointStore& store_;
  const Codec& codec_;
  Field working_;
  std::size_t working_step_ = 0;
  Field adjoint_;
  std::int64_t next_adjoint_ = static_cast<std::int64_t>(stepper_.nsteps()) - 1;
  bool captured_ = false;
  std::size_t index_ = 0;
  ExecutionStats stats_;
};

}  // namespace

double ExecutionStats::mean_forward_step() const {
  return primal_steps == 0 ? 0.0 : forward_seconds / static_cast<double>(primal_steps);
}

double ExecutionStats::mean_adjoint_step() const {
  return adjoint_steps == 0 ? 0.0 : adjoint_seconds / static_cast<double>(adjoint_steps);
}

AdjointResult execute(std::span<const schedule::Action> actions, const Stepper& stepper, CheckpointStore& store,
                      const Codec& codec) {
  Runner runner(stepper, store, codec);
  runner.run(actions);
  return std::move(runner).result();
}

AdjointResult execute_full_storage(const Stepper& stepper) {
  const std::size_t n = stepper.nsteps();
  AdjointResult out{stepper.initial_adjoint_state(), {}};
  const auto start = Clock::now();
  std::vector<Field> states;
  states.reserve(n);
  Field state = stepper.initial_state();
  for (std::size_t k = 0; k < n; ++k) {
    const auto t = Clock::now();
    stepper.forward(state, k);
    out.stats.forward_seconds += seconds_since(t);
    states.push_back(state);
  }
  out.stats.primal_steps = n;
  for (std::size_t k = n; k-- > 0;) {
    const auto t = Clock::now();
    stepper.adjoint(out.adjoint_state, states[k], k);
    out.stats.adjoint_seconds += seconds_since(t);
  }
  out.stats.adjoint_steps = n;
  out.stats.total_seconds = seconds_since(start);
  return out;
}

}  // namespace adjckpt
