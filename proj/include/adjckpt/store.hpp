#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "adjckpt/codec.hpp"
#include "adjckpt/field.hpp"

namespace adjckpt {

/// Byte-budgeted checkpoint slots. The store never evicts: a put that does
/// not fit raises CapacityError and leaves the store unchanged. Slot
/// lifetimes belong to the schedule.
///
/// One writer at a time; concurrent get() on distinct slots is fine.
class CheckpointStore {
 public:
  struct Checkpoint {
    std::size_t step = 0;
    Field state;
  };

  /// `slot_overhead_bytes` is charged once per occupied slot. With
  /// `spill_directory`, frames are written to `slot-<n>.ackp` files there
  /// instead of held in memory; the budget still applies.
  explicit CheckpointStore(std::size_t budget_bytes, std::size_t slot_overhead_bytes = 0,
                           std::optional<std::filesystem::path> spill_directory = std::nullopt);

  /// Encodes `state` with `codec` into `slot`, replacing any previous
  /// occupant. The replaced bytes count as free for the budget check.
  CodecStats put(std::size_t slot, std::size_t step, const Field& state, const Codec& codec);
  /// Throws MissingCheckpoint for an empty slot.
  Checkpoint get(std::size_t slot) const;
  /// Releasing an empty slot is a no-op.
  void free(std::size_t slot);
  void clear();

  bool occupied(std::size_t slot) const { return slots_.count(slot) != 0; }
  std::size_t occupied_slots() const noexcept { return slots_.size(); }
  std::size_t budget_bytes() const noexcept { return budget_; }
  std::size_t bytes_used() const noexcept { return used_; }
  std::size_t available_bytes() const noexcept { return budget_ - used_; }
  std::size_t slot_overhead_bytes() const noexcept { return overhead_; }
  /// Stored frame size of an occupied slot, header included.
  std::size_t stored_bytes(std::size_t slot) const;

 private:
  struct Entry {
    std::size_t step = 0;
    std::size_t length = 0;
    std::vector<std::byte> frame;  // empty in spill mode
  };

  std::filesystem::path spill_path(std::size_t slot) const;

  std::size_t budget_;
  std::size_t overhead_;
  std::optional<std::filesystem::path> spill_;
  std::map<std::size_t, Entry> slots_;
  std::size_t used_ = 0;
};

}  // namespace adjckpt
