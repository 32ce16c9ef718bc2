#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adjckpt {

/// Base of every error raised by the library. `category()` is the short,
/// machine-parsable tag the CLI prints as `error: <category>: <detail>`.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view category() const noexcept = 0;
};

class InvalidArgument final : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "invalid-argument"; }
};

class InfeasibleConfiguration final : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "infeasible-configuration"; }
};

/// Configuration rejected at construction time (e.g. a CFL violation).
class ConfigError final : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "config"; }
};

/// An action stream that violates the schedule invariants.
class ScheduleError final : public Error {
 public:
  ScheduleError(std::size_t index, const std::string& what)
      : Error("action " + std::to_string(index) + ": " + what), index_(index) {}
  std::string_view category() const noexcept override { return "schedule"; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class EncodeError final : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "encode"; }
};

/// Malformed or truncated encoded checkpoint. `offset()` is the byte offset
/// at which decoding gave up.
class DecodeError final : public Error {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : Error("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::string_view category() const noexcept override { return "decode"; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class CapacityError final : public Error {
 public:
  CapacityError(std::size_t required, std::size_t available, const std::string& context = {})
      : Error((context.empty() ? std::string{} : context + ": ") + "requires " +
              std::to_string(required) + " bytes, " + std::to_string(available) +
              " available"),
        required_(required),
        available_(available) {}
  std::string_view category() const noexcept override { return "capacity"; }
  std::size_t required() const noexcept { return required_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t required_;
  std::size_t available_;
};

class MissingCheckpoint final : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "missing-checkpoint"; }
};

class IoError final : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "io"; }
};

}  // namespace adjckpt
