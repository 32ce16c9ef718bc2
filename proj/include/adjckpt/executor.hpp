#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "adjckpt/codec.hpp"
#include "adjckpt/schedule.hpp"
#include "adjckpt/stepper.hpp"
#include "adjckpt/store.hpp"

namespace adjckpt {

struct ExecutionStats {
  std::uint64_t primal_steps = 0;  ///< Advance steps plus captures
  std::uint64_t adjoint_steps = 0;
  std::uint64_t puts = 0;
  std::uint64_t gets = 0;
  double forward_seconds = 0.0;
  double adjoint_seconds = 0.0;
  double put_seconds = 0.0;  ///< encode plus copy into the store
  double get_seconds = 0.0;  ///< copy out plus decode
  double total_seconds = 0.0;
  std::size_t peak_store_bytes = 0;
  std::size_t stored_bytes_total = 0;  ///< sum of frame sizes over all puts

  double mean_forward_step() const;
  double mean_adjoint_step() const;
};

struct AdjointResult {
  Field adjoint_state;  ///< adjoint of state 0
  ExecutionStats stats;
};

/// Runs `actions` against `stepper`, keeping checkpoints in `store` encoded
/// with `codec`. Throws ScheduleError at the first action whose
/// precondition fails. A CapacityError from the store is re-raised with the
/// action index; a DecodeError names the slot.
AdjointResult execute(std::span<const schedule::Action> actions, const Stepper& stepper, CheckpointStore& store,
                      const Codec& codec);

/// Reference run keeping every state in memory, no codec, no store.
AdjointResult execute_full_storage(const Stepper& stepper);

}  // namespace adjckpt
