#include "adjckpt/store.hpp"

#include <fstream>
#include <string>

#include "adjckpt/error.hpp"

namespace adjckpt {

CheckpointStore::CheckpointStore(std::size_t budget_bytes, std::size_t slot_overhead_bytes,
                                 std::optional<std::filesystem::path> spill_directory)
    : budget_(budget_bytes), overhead_(slot_overhead_bytes), spill_(std::move(spill_directory)) {
  if (spill_) {
    std::error_code ec;
    std::filesystem::create_directories(*spill_, ec);
    if (ec) throw IoError("cannot create spill directory " + spill_->string() + ": " + ec.message());
  }
}

std::filesystem::path CheckpointStore::spill_path(std::size_t slot) const {
  return *spill_ / ("slot-" + std::to_string(slot) + ".ackp");
}

CodecStats CheckpointStore::put(std::size_t slot, std::size_t step, const Field& state, const Codec& codec) {
  Encoded encoded = codec.encode(state);
  const std::size_t required = encoded.bytes.size() + overhead_;
  std::size_t available = budget_ - used_;
  if (const auto it = slots_.find(slot); it != slots_.end()) available += it->second.length + overhead_;
  if (required > available) {
    throw CapacityError(required, available, "slot " + std::to_string(slot) + " (step " + std::to_string(step) + ")");
  }

  free(slot);
  Entry entry{step, encoded.bytes.size(), {}};
  if (spill_) {
    std::ofstream out(spill_path(slot), std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(encoded.bytes.data()), static_cast<std::streamsize>(encoded.bytes.size()));
    if (!out) throw IoError("cannot write " + spill_path(slot).string());
  } else {
    entry.frame = std::move(encoded.bytes);
  }
  slots_.emplace(slot, std::move(entry));
  used_ += required;
  return encoded.stats;
}

CheckpointStore::Checkpoint CheckpointStore::get(std::size_t slot) const {
  const auto it = slots_.find(slot);
  if (it == slots_.end()) throw MissingCheckpoint("slot " + std::to_string(slot) + " is empty");
  const Entry& entry = it->second;
  if (!spill_) return {entry.step, decode_frame(entry.frame)};

  std::vector<std::byte> frame(entry.length);
  std::ifstream in(spill_path(slot), std::ios::binary);
  in.read(reinterpret_cast<char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
  if (!in) throw IoError("cannot read " + spill_path(slot).string());
  return {entry.step, decode_frame(frame)};
}

void CheckpointStore::free(std::size_t slot) {
  const auto it = slots_.find(slot);
  if (it == slots_.end()) return;
  used_ -= it->second.length + overhead_;
  slots_.erase(it);
  if (spill_) {
    std::error_code ec;
    std::filesystem::remove(spill_path(slot), ec);
  }
}

void CheckpointStore::clear() {
  while (!slots_.empty()) free(slots_.begin()->first);
}

std::size_t CheckpointStore::stored_bytes(std::size_t slot) const {
  const auto it = slots_.find(slot);
  if (it == slots_.end()) throw MissingCheckpoint("slot " + std::to_string(slot) + " is empty");
  return it->second.length;
}

}  // namespace adjckpt
