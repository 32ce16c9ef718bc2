#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adjckpt/field.hpp"

namespace adjckpt {

/// Forward/adjoint operator pair driven by the executor. State k is the
/// input of primal step k; state 0 is initial_state().
///
/// The adjoint of step i receives the primal state i + 1 (the output of
/// step i), which a schedule keeps live right after PrimalCapture(i) or
/// restores from a checkpoint. Both calls must be deterministic.
class Stepper {
 public:
  virtual ~Stepper() = default;

  virtual std::size_t nsteps() const = 0;
  virtual std::vector<std::size_t> state_shape() const = 0;
  virtual Field initial_state() const = 0;
  virtual Field initial_adjoint_state() const = 0;

  /// state i -> state i + 1, in place.
  virtual void forward(Field& state, std::size_t step) const = 0;
  /// adjoint state i + 1 -> adjoint state i, in place.
  virtual void adjoint(Field& adjoint_state, const Field& primal_next, std::size_t step) const = 0;
};

/// A stepper whose primal step i, seen as a map of (state i, parameters),
/// can be linearized. Both calls take the primal state i + 1 as the
/// linearization point.
class LinearizedStepper : public Stepper {
 public:
  virtual std::size_t parameter_count() const = 0;

  /// Jacobian times (d_state, d_param); returns a state-shaped field.
  virtual Field tangent(const Field& primal_next, const Field& d_state, std::span<const double> d_param,
                        std::size_t step) const = 0;
  /// Transposed Jacobian times a state-shaped cotangent. Writes the state
  /// part to `state_out` and the parameter part to `param_out`.
  virtual void transpose(const Field& primal_next, const Field& cotangent, Field& state_out,
                         std::vector<double>& param_out, std::size_t step) const = 0;
};

/// Largest |<J x, y> - <x, J^T y>| / (||J x|| ||y||) over `trials` random
/// (x, y, primal point, step) draws.
double dot_test(const LinearizedStepper& stepper, std::size_t trials, std::uint64_t seed = 1);

}  // namespace adjckpt
