#include "adjckpt/wave.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <string_view>

#include "adjckpt/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace adjckpt {
namespace {

constexpr std::size_t kParallelThreshold = 16384;

std::vector<double>& scratch(int which, std::size_t n) {
  thread_local std::vector<double> buffers[3];
  buffers[which].resize(n);
  return buffers[which];
}

}  // namespace

int kernel_threads() {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("ADJCKPT_THREADS")) {
    int cap = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec == std::errc{} && ptr == text.data() + text.size() && cap > 0) threads = std::min(threads, cap);
  }
  return std::max(threads, 1);
}

std::vector<double> ricker(double f, double t0, double dt, std::size_t nt) {
  std::vector<double> w(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const double a = std::numbers::pi * f * (static_cast<double>(k) * dt - t0);
    w[k] = (1.0 - 2.0 * a * a) * std::exp(-a * a);
  }
  return w;
}

double misfit(std::span<const double> d_sim, std::span<const double> d_obs) {
  if (d_sim.size() != d_obs.size()) throw InvalidArgument("trace lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < d_sim.size(); ++i) {
    const double r = d_sim[i] - d_obs[i];
    sum += r * r;
  }
  return 0.5 * sum;
}

WaveStepper::WaveStepper(WaveParams params) : params_(std::move(params)) {
  const auto& p = params_;
  if (p.shape.empty() || p.shape.size() > 2) throw ConfigError("wave grid must be 1-D or 2-D");
  points_ = element_count(p.shape);
  if (points_ == 0) throw ConfigError("wave grid is empty");
  if (p.nt == 0) throw ConfigError("nt must be positive");
  if (!(p.spacing > 0.0) || !(p.dt > 0.0)) throw ConfigError("spacing and dt must be positive");
  if (p.slowness2.size() != points_) throw ConfigError("squared slowness has the wrong size");
  double m_min = p.slowness2[0];
  for (double m : p.slowness2) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("squared slowness must be positive everywhere");
    m_min = std::min(m_min, m);
  }
  const double limit = p.spacing * std::sqrt(m_min) / std::sqrt(static_cast<double>(p.shape.size()));
  if (p.dt > limit) {
    throw ConfigError("CFL violated: dt " + std::to_string(p.dt) + " exceeds " + std::to_string(limit));
  }
  if (p.source >= points_) throw ConfigError("source outside the grid");
  if (p.wavelet.size() != p.nt) throw ConfigError("wavelet needs one sample per step");
  for (std::size_t r : p.receivers) {
    if (r >= points_) throw ConfigError("receiver outside the grid");
  }
  if (!p.observed.empty() && p.observed.size() != p.nt * p.receivers.size()) {
    throw ConfigError("observed data needs receivers x nt samples");
  }
  weight_.resize(points_);
  for (std::size_t i = 0; i < points_; ++i) weight_[i] = p.dt * p.dt / p.slowness2[i];
}

std::vector<std::size_t> WaveStepper::state_shape() const {
  std::vector<std::size_t> shape{2};
  shape.insert(shape.end(), params_.shape.begin(), params_.shape.end());
  return shape;
}

Field WaveStepper::initial_state() const { return Field(state_shape()); }

Field WaveStepper::initial_adjoint_state() const {
  std::vector<std::size_t> shape{3};
  shape.insert(shape.end(), params_.shape.begin(), params_.shape.end());
  return Field(std::move(shape));
}

void WaveStepper::laplacian(std::span<const double> u, std::span<double> out) const {
  const double inv_h2 = 1.0 / (params_.spacing * params_.spacing);
  const auto n = static_cast<std::ptrdiff_t>(points_);
  if (params_.shape.size() == 1) {
#pragma omp parallel for num_threads(kernel_threads()) if (points_ >= kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i + 1 < n ? u[i + 1] : 0.0;
      out[i] = (left - 2.0 * u[i] + right) * inv_h2;
    }
    return;
  }
  const auto nx = static_cast<std::ptrdiff_t>(params_.shape[0]);
  const auto nz = static_cast<std::ptrdiff_t>(params_.shape[1]);
#pragma omp parallel for num_threads(kernel_threads()) if (points_ >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < nx; ++i) {
    for (std::ptrdiff_t j = 0; j < nz; ++j) {
      const std::ptrdiff_t k = i * nz + j;
      const double up = i > 0 ? u[k - nz] : 0.0;
      const double down = i + 1 < nx ? u[k + nz] : 0.0;
      const double left = j > 0 ? u[k - 1] : 0.0;
      const double right = j + 1 < nz ? u[k + 1] : 0.0;
      out[k] = (up + down + left + right - 4.0 * u[k]) * inv_h2;
    }
  }
}

void WaveStepper::forward(Field& state, std::size_t step) const {
  if (step >= params_.nt) throw InvalidArgument("step " + std::to_string(step) + " out of range");
  const std::size_t n = points_;
  double* a = state.values.data();
  double* b = a + n;
  auto& lap = scratch(0, n);
  laplacian({b, n}, lap);
  lap[params_.source] += params_.wavelet[step];
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(kernel_threads()) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const double next = 2.0 * b[i] - a[i] + weight_[i] * lap[i];
    a[i] = b[i];
    b[i] = next;
  }
}

void WaveStepper::adjoint(Field& adjoint_state, const Field& primal_next, std::size_t step) const {
  if (step >= params_.nt) throw InvalidArgument("step " + std::to_string(step) + " out of range");
  const std::size_t n = points_;
  double* la = adjoint_state.values.data();
  double* lb = la + n;
  double* g = lb + n;
  const double* u_i = primal_next.values.data();
  const double* u_next = u_i + n;

  // Residual of u_{step+1} enters as an adjoint source.
  const std::size_t nrec = params_.receivers.size();
  for (std::size_t r = 0; r < nrec; ++r) {
    const std::size_t at = params_.receivers[r];
    const double obs = params_.observed.empty() ? 0.0 : params_.observed[step * nrec + r];
    lb[at] += u_next[at] - obs;
  }

  auto& lap_u = scratch(0, n);
  auto& z = scratch(1, n);
  auto& lap_z = scratch(2, n);
  laplacian({u_i, n}, lap_u);
  lap_u[params_.source] += params_.wavelet[step];
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(kernel_threads()) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < count; ++i) z[i] = weight_[i] * lb[i];
  laplacian(z, lap_z);
#pragma omp parallel for num_threads(kernel_threads()) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    g[i] -= weight_[i] / params_.slowness2[i] * lap_u[i] * lb[i];
    const double next_b = la[i] + 2.0 * lb[i] + lap_z[i];
    la[i] = -lb[i];
    lb[i] = next_b;
  }
}

Field WaveStepper::tangent(const Field& primal_next, const Field& d_state, std::span<const double> d_param,
                           std::size_t step) const {
  const std::size_t n = points_;
  const double* u_i = primal_next.values.data();
  const double* da = d_state.values.data();
  const double* db = da + n;
  std::vector<double> lap_u(n), lap_db(n);
  laplacian({u_i, n}, lap_u);
  lap_u[params_.source] += params_.wavelet[step];
  laplacian({db, n}, lap_db);
  Field out(state_shape());
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = db[i];
    out.values[n + i] = -da[i] + 2.0 * db[i] + weight_[i] * lap_db[i] -
                        weight_[i] / params_.slowness2[i] * lap_u[i] * d_param[i];
  }
  return out;
}

void WaveStepper::transpose(const Field& primal_next, const Field& cotangent, Field& state_out,
                            std::vector<double>& param_out, std::size_t step) const {
  const std::size_t n = points_;
  const double* u_i = primal_next.values.data();
  const double* ya = cotangent.values.data();
  const double* yb = ya + n;
  std::vector<double> lap_u(n), z(n), lap_z(n);
  laplacian({u_i, n}, lap_u);
  lap_u[params_.source] += params_.wavelet[step];
  for (std::size_t i = 0; i < n; ++i) z[i] = weight_[i] * yb[i];
  laplacian(z, lap_z);
  state_out = Field(state_shape());
  param_out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    state_out.values[i] = -yb[i];
    state_out.values[n + i] = ya[i] + 2.0 * yb[i] + lap_z[i];
    param_out[i] = -weight_[i] / params_.slowness2[i] * lap_u[i] * yb[i];
  }
}

void WaveStepper::sample(const Field& state, std::span<double> out) const {
  const double* u = state.values.data() + points_;
  for (std::size_t r = 0; r < params_.receivers.size(); ++r) out[r] = u[params_.receivers[r]];
}

std::vector<double> WaveStepper::simulate() const {
  const std::size_t nrec = params_.receivers.size();
  std::vector<double> traces(params_.nt * nrec);
  Field state = initial_state();
  for (std::size_t k = 0; k < params_.nt; ++k) {
    forward(state, k);
    sample(state, std::span<double>(traces).subspan(k * nrec, nrec));
  }
  return traces;
}

double WaveStepper::objective() const {
  const std::vector<double> traces = simulate();
  if (params_.observed.empty()) return misfit(traces, std::vector<double>(traces.size(), 0.0));
  return misfit(traces, params_.observed);
}

std::vector<double> WaveStepper::gradient(const Field& adjoint_state) {
  const std::size_t n = adjoint_state.size() / 3;
  return {adjoint_state.values.begin() + 2 * static_cast<std::ptrdiff_t>(n), adjoint_state.values.end()};
}

}  // namespace adjckpt
