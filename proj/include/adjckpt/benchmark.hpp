#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "adjckpt/codec.hpp"
#include "adjckpt/config.hpp"
#include "adjckpt/executor.hpp"
#include "adjckpt/perfmodel.hpp"

namespace adjckpt {

/// Plain (null codec) and combined (configured codec) checkpointed runs of
/// the toy problem under one byte budget, with the model prediction built
/// from measured inputs.
struct BenchmarkReport {
  std::size_t nt = 0;
  std::size_t points = 0;
  double state_bytes = 0.0;  ///< S: both time levels
  std::size_t budget = 0;

  CodecStats codec;           ///< profiled on the final wavefield
  double bandwidth = 0.0;     ///< B: S over the mean null-codec encode/decode time
  double forward_step = 0.0;  ///< measured mean seconds
  double adjoint_step = 0.0;
  perfmodel::PerfParams params;  ///< step_cost = measured forward step
  perfmodel::Prediction prediction;
  /// Same model with step_cost = mean of forward and adjoint step costs.
  perfmodel::Prediction prediction_mean_cost;

  std::size_t m_plain_used = 0;
  std::size_t m_compressed_used = 0;
  ExecutionStats plain;
  ExecutionStats combined;
  double measured_plain_s = 0.0;     ///< median total wall time
  double measured_combined_s = 0.0;
  double measured_speedup = 0.0;
  double relative_gap = 0.0;         ///< |measured / predicted - 1|
  double gradient_relative_error = 0.0;  ///< combined vs full storage, 2-norm
  std::vector<std::string> notes;    ///< model/reality divergences
};

BenchmarkReport run_benchmark(const RunConfig& config);

/// Sweep CSV schema followed by measured columns.
std::string benchmark_csv_header();
std::string benchmark_csv_row(const BenchmarkReport& report);

}  // namespace adjckpt
