#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "adjckpt/stepper.hpp"

namespace adjckpt {

/// Constant-density acoustic wave equation m u_tt - lap u = q on the
/// interior points of a 1-D or 2-D grid with zero Dirichlet boundaries.
struct WaveParams {
  std::vector<std::size_t> shape;      ///< {n} or {nx, nz}, interior points
  double spacing = 1.0;                ///< h, meters
  double dt = 1e-3;                    ///< seconds
  std::size_t nt = 0;                  ///< time steps
  std::vector<double> slowness2;       ///< m, s^2/m^2, one per point
  std::size_t source = 0;              ///< flat index
  std::vector<double> wavelet;         ///< q at steps 0..nt-1
  std::vector<std::size_t> receivers;  ///< flat indices
  /// Observed traces, receivers.size() per step for u_1..u_nt, step-major.
  /// Empty means zero data.
  std::vector<double> observed;
};

/// Ricker wavelet of peak frequency `f` delayed by `t0`, sampled at k dt.
std::vector<double> ricker(double f, double t0, double dt, std::size_t nt);

/// Leapfrog discretization. Primal state k is (u_{k-1}, u_k), shape
/// {2, shape...}; the adjoint state is (lambda_a, lambda_b, gradient),
/// shape {3, shape...}. The misfit is 1/2 sum_k ||R u_k - d_k||^2 over
/// k = 1..nt, and the gradient is with respect to m.
class WaveStepper final : public LinearizedStepper {
 public:
  /// Throws ConfigError for an unstable dt (dt > h sqrt(min m) / sqrt(d)),
  /// non-positive m, or inconsistent sizes.
  explicit WaveStepper(WaveParams params);

  const WaveParams& params() const noexcept { return params_; }
  std::size_t points() const noexcept { return points_; }

  std::size_t nsteps() const override { return params_.nt; }
  std::vector<std::size_t> state_shape() const override;
  Field initial_state() const override;
  Field initial_adjoint_state() const override;
  void forward(Field& state, std::size_t step) const override;
  void adjoint(Field& adjoint_state, const Field& primal_next, std::size_t step) const override;

  std::size_t parameter_count() const override { return points_; }
  Field tangent(const Field& primal_next, const Field& d_state, std::span<const double> d_param,
                std::size_t step) const override;
  void transpose(const Field& primal_next, const Field& cotangent, Field& state_out,
                 std::vector<double>& param_out, std::size_t step) const override;

  /// Receiver samples of u_k = second half of state k.
  void sample(const Field& state, std::span<double> out) const;
  /// Forward run from the initial state; returns traces for u_1..u_nt.
  std::vector<double> simulate() const;
  /// 1/2 ||simulate() - observed||^2.
  double objective() const;
  /// Gradient part of an adjoint state.
  static std::vector<double> gradient(const Field& adjoint_state);

 private:
  void laplacian(std::span<const double> u, std::span<double> out) const;

  WaveParams params_;
  std::size_t points_ = 0;
  std::vector<double> weight_;  // dt^2 / m
};

/// 1/2 ||d_sim - d_obs||^2.
double misfit(std::span<const double> d_sim, std::span<const double> d_obs);

/// Worker threads for stencil kernels: ADJCKPT_THREADS if set, else all.
int kernel_threads();

}  // namespace adjckpt
