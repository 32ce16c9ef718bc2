#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "adjckpt/benchmark.hpp"
#include "adjckpt/codec.hpp"
#include "adjckpt/config.hpp"
#include "adjckpt/error.hpp"
#include "adjckpt/perfmodel.hpp"
#include "adjckpt/schedule.hpp"
#include "adjckpt/wave.hpp"

namespace fs = std::filesystem;
using namespace adjckpt;

namespace {

// Model inputs as given on the command line; byte quantities accept suffixes.
struct ModelFlags {
  std::optional<std::size_t> nsteps;
  std::optional<std::string> state_bytes;
  std::optional<std::string> bandwidth;
  std::optional<std::string> memory;
  std::optional<double> step_cost;
  std::optional<double> ratio;
  std::optional<double> t_c;
  std::optional<double> t_d;

  void attach(CLI::App* app) {
    app->add_option("--nsteps", nsteps, "N, time steps");
    app->add_option("--state-bytes", state_bytes, "S, bytes per state (e.g. 900MB)");
    app->add_option("--bandwidth", bandwidth, "B, bytes per second (e.g. 10GB or 10GB/s)");
    app->add_option("--memory", memory, "checkpoint memory (e.g. 8GB)");
    app->add_option("--step-cost", step_cost, "C, seconds per step");
    app->add_option("--ratio", ratio, "F, compression ratio");
    app->add_option("--tc", t_c, "seconds to compress one state");
    app->add_option("--td", t_d, "seconds to decompress one state");
  }

  // `skip` names the flag a sweep replaces; it may be absent.
  perfmodel::PerfParams build(std::string_view skip = {}) const {
    auto missing = [&](std::string_view flag) {
      return InvalidArgument("missing --" + std::string(flag));
    };
    perfmodel::PerfParams p;
    auto need = [&](const auto& opt, std::string_view flag) {
      if (!opt && flag != skip) throw missing(flag);
      return opt.has_value();
    };
    if (need(nsteps, "nsteps")) p.nsteps = *nsteps;
    if (need(state_bytes, "state-bytes")) p.state_bytes = static_cast<double>(parse_byte_size(*state_bytes));
    if (need(bandwidth, "bandwidth")) {
      std::string text = *bandwidth;
      if (text.size() > 2 && text.ends_with("/s")) text.resize(text.size() - 2);
      p.bandwidth = static_cast<double>(parse_byte_size(text));
    }
    if (need(memory, "memory")) p.memory = static_cast<double>(parse_byte_size(*memory));
    if (need(step_cost, "step-cost")) p.step_cost = *step_cost;
    if (need(ratio, "ratio")) p.ratio = *ratio;
    if (need(t_c, "tc")) p.t_c = *t_c;
    if (need(t_d, "td")) p.t_d = *t_d;
    return p;
  }
};

std::string_view axis_flag(perfmodel::SweepAxis axis) {
  switch (axis) {
    case perfmodel::SweepAxis::memory: return "memory";
    case perfmodel::SweepAxis::compute_cost: return "step-cost";
    case perfmodel::SweepAxis::nsteps: return "nsteps";
  }
  return {};
}

// Output goes to `path` when given, else stdout.
class Output {
 public:
  explicit Output(const std::string& path, std::ios::openmode mode = std::ios::out) {
    if (path.empty()) return;
    file_.open(path, mode);
    if (!file_) throw IoError("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<std::size_t> parse_shape(const std::string& text) {
  std::vector<std::size_t> shape;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t x = text.find('x', start);
    const std::string part = text.substr(start, x == std::string::npos ? std::string::npos : x - start);
    std::size_t used = 0;
    unsigned long long extent = 0;
    try {
      extent = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || extent == 0) throw InvalidArgument("bad shape '" + text + "'");
    shape.push_back(extent);
    if (x == std::string::npos) break;
    start = x + 1;
  }
  return shape;
}

std::string recommendation(const perfmodel::RegimeReport& regime, const perfmodel::Prediction& pred) {
  using perfmodel::Regime;
  switch (regime.regime) {
    case Regime::no_action_needed:
      return "no checkpointing or compression needed";
    case Regime::compression_fits:
      if (pred.speedup > 1.0) return "compress every state; no recomputation needed";
      return "checkpoint uncompressed states; compression costs more than the recomputation it saves";
    case Regime::checkpoint_required:
      if (pred.speedup > 1.0) return "checkpoint compressed states";
      return "checkpoint uncompressed states; compression costs more than the recomputation it saves";
  }
  return {};
}

int advise(const ModelFlags& flags, const std::string& out_path) {
  const auto p = flags.build();
  p.validate();
  const auto regime = perfmodel::classify_regime(p);
  const auto pred = perfmodel::predict(p);
  auto& os = std::cout;
  fmt::print(os, "regime: {} ({})\n", static_cast<int>(regime.regime), perfmodel::regime_name(regime.regime));
  fmt::print(os, "threshold_compressed_fit_bytes: {:.6g}\n", regime.threshold_compressed_fit);
  fmt::print(os, "threshold_uncompressed_fit_bytes: {:.6g}\n", regime.threshold_uncompressed_fit);
  fmt::print(os, "m_plain: {}\nm_compressed: {}\n", pred.m_plain, pred.m_compressed);
  fmt::print(os, "p_plain: {}\np_compressed: {}\n", pred.p_plain, pred.p_compressed);
  fmt::print(os, "t_naive_s: {:.6g}\nt_revolve_s: {:.6g}\nt_combined_s: {:.6g}\n", pred.t_naive, pred.t_revolve,
             pred.t_combined);
  fmt::print(os, "speedup: {:.6g}\n", pred.speedup);
  fmt::print(os, "recommendation: {}\n", recommendation(regime, pred));

  const std::string csv = fmt::format("{}\n{}\n", perfmodel::kCsvHeader, perfmodel::csv_row(p.memory, pred));
  fmt::print(os, "\n{}", csv);
  if (!out_path.empty()) {
    Output out(out_path);
    out.stream() << csv;
  }
  return 0;
}

int sweep(const ModelFlags& flags, const std::string& axis_text, const std::string& range_text,
          const std::string& scale, const std::string& out_path) {
  const auto axis = perfmodel::parse_axis(axis_text);
  auto range = perfmodel::parse_range(range_text);
  range.log_scale = scale == "log";
  auto base = flags.build(axis_flag(axis));
  // Placeholder for the swept quantity so validation sees a full set.
  switch (axis) {
    case perfmodel::SweepAxis::memory: base.memory = range.lo; break;
    case perfmodel::SweepAxis::compute_cost: base.step_cost = range.lo; break;
    case perfmodel::SweepAxis::nsteps: base.nsteps = static_cast<std::size_t>(std::llround(range.lo)); break;
  }
  base.validate();
  const auto rows = perfmodel::sweep(base, axis, range);
  Output out(out_path);
  perfmodel::write_csv(out.stream(), rows);
  return 0;
}

int verify_schedule(std::size_t n, std::size_t m, const std::string& schedule_path, const std::string& out_path,
                    bool quiet) {
  if (n == 0 || m == 0) throw InvalidArgument("--nsteps and --slots must be positive");
  std::vector<schedule::Action> actions;
  if (schedule_path.empty()) {
    actions = schedule::generate_schedule(n, m);
  } else {
    std::ifstream in(schedule_path);
    if (!in) throw IoError("cannot open '" + schedule_path + "'");
    actions = schedule::read_schedule(in);
  }
  const auto stats = schedule::schedule_stats(actions, n, m);
  const auto optimal = schedule::recompute_steps(n, m);

  if (!quiet) {
    Output out(out_path);
    schedule::write_schedule(out.stream(), actions);
  }
  fmt::print("# nsteps={} slots={} actions={}\n", n, m, actions.size());
  fmt::print("# primal_steps={} recompute_steps={} dp_recompute_steps={}\n", stats.primal_steps,
             stats.recompute_steps, optimal);
  fmt::print("# adjoint_steps={} writes={} reads={} peak_slots={}\n", stats.adjoint_steps, stats.writes, stats.reads,
             stats.peak_slots);
  if (stats.recompute_steps != optimal) {
    throw ScheduleError(actions.size(), fmt::format("schedule recomputes {} steps, the optimum is {}",
                                                    stats.recompute_steps, optimal));
  }
  fmt::print("# optimal=yes\n");
  return 0;
}

Field load_raw_field(const std::string& path, const std::vector<std::size_t>& shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  Field field(shape);
  const auto bytes = static_cast<std::streamsize>(field.bytes());
  in.read(reinterpret_cast<char*>(field.values.data()), bytes);
  if (in.gcount() != bytes) {
    throw IoError(fmt::format("'{}' holds fewer than the {} bytes its shape needs", path, bytes));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError(fmt::format("'{}' holds more than the {} bytes its shape needs", path, bytes));
  }
  return field;
}

int profile_codec(const std::string& codec_name, const CodecOptions& options, const std::string& input,
                  const std::string& shape_text, const std::string& grid_text, std::size_t nt,
                  std::size_t repetitions, const std::string& out_path) {
  const auto codec = make_codec(codec_name, options);
  Field field;
  if (!input.empty()) {
    if (shape_text.empty()) throw InvalidArgument("--input needs --shape");
    field = load_raw_field(input, parse_shape(shape_text));
  } else {
    // Final wavefield of the toy problem.
    RunConfig config;
    config.grid = parse_shape(grid_text);
    config.nt = nt;
    const WaveStepper stepper(make_toy_problem(config));
    field = stepper.initial_state();
    for (std::size_t k = 0; k < nt; ++k) stepper.forward(field, k);
  }
  const CodecStats s = profile(*codec, field, repetitions);
  Output out(out_path);
  out.stream() << "codec,tolerance,input_bytes,output_bytes,ratio,max_abs_error,t_c_s,t_d_s\n"
               << fmt::format("{},{:.17g},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", codec->name(),
                              codec_name == "quantize" ? options.tolerance : 0.0, s.input_bytes, s.output_bytes,
                              s.ratio, s.max_abs_error, s.t_c, s.t_d);
  return 0;
}

int run(const std::string& config_path, const std::optional<std::string>& codec,
        const std::optional<double>& tolerance, const std::optional<std::string>& budget,
        const std::optional<std::string>& grid, const std::optional<std::size_t>& nt, const std::string& out_path) {
  RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  if (codec) config.codec = *codec;
  if (tolerance) config.tolerance = *tolerance;
  if (budget) config.budget = parse_byte_size(*budget);
  if (grid) config.grid = parse_shape(*grid);
  if (nt) config.nt = *nt;
  const BenchmarkReport r = run_benchmark(config);

  std::string grid_label;
  for (std::size_t e : config.grid) grid_label += (grid_label.empty() ? "" : "x") + std::to_string(e);
  fmt::print("grid {} nt {} state {} bytes budget {} bytes\n", grid_label, r.nt, r.state_bytes, r.budget);
  fmt::print("codec {} ratio {:.4g} t_c {:.3g} s t_d {:.3g} s max error {:.3g}\n", config.codec, r.codec.ratio,
             r.codec.t_c, r.codec.t_d, r.codec.max_abs_error);
  fmt::print("step cost forward {:.3g} s adjoint {:.3g} s, bandwidth {:.3g} B/s\n", r.forward_step, r.adjoint_step,
             r.bandwidth);
  fmt::print("slots plain {} (model {}) compressed {} (model {})\n", r.m_plain_used, r.prediction.m_plain,
             r.m_compressed_used, r.prediction.m_compressed);
  fmt::print("plain    measured {:.4g} s predicted {:.4g} s\n", r.measured_plain_s, r.prediction.t_revolve);
  fmt::print("combined measured {:.4g} s predicted {:.4g} s\n", r.measured_combined_s, r.prediction.t_combined);
  fmt::print("speedup  measured {:.4g} predicted {:.4g} (gap {:.1f}%), mean-step-cost model {:.4g}\n",
             r.measured_speedup, r.prediction.speedup, 100.0 * r.relative_gap, r.prediction_mean_cost.speedup);
  fmt::print("gradient relative error vs full storage {:.3g}\n", r.gradient_relative_error);
  for (const auto& note : r.notes) fmt::print("note: {}\n", note);

  if (out_path.empty()) {
    fmt::print("\n{}\n{}\n", benchmark_csv_header(), benchmark_csv_row(r));
  } else {
    const bool fresh = !fs::exists(out_path) || fs::file_size(out_path) == 0;
    Output out(out_path, std::ios::app);
    if (fresh) out.stream() << benchmark_csv_header() << '\n';
    out.stream() << benchmark_csv_row(r) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checkpointing and compression advisor for adjoint computations"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ModelFlags model;
  std::string out_path;

  auto* advise_cmd = app.add_subcommand("advise", "classify the regime and predict the speedup");
  model.attach(advise_cmd);
  advise_cmd->add_option("--out", out_path, "write the CSV row here");

  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate the model along one axis and write CSV");
  model.attach(sweep_cmd);
  std::string axis = "memory", range, scale = "lin";
  sweep_cmd->add_option("--axis", axis, "memory, compute-cost or nsteps")->capture_default_str();
  sweep_cmd->add_option("--range", range, "lo:hi:samples")->required();
  sweep_cmd->add_option("--scale", scale, "lin or log")->check(CLI::IsMember({"lin", "log"}))->capture_default_str();
  sweep_cmd->add_option("--out", out_path, "CSV path (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify-schedule", "print a schedule and check it against the optimum");
  std::size_t v_nsteps = 0, v_slots = 0;
  std::string schedule_path;
  bool quiet = false;
  verify_cmd->add_option("--nsteps", v_nsteps, "N")->required();
  verify_cmd->add_option("--slots", v_slots, "M")->required();
  verify_cmd->add_option("--schedule", schedule_path, "check this schedule instead of generating one");
  verify_cmd->add_flag("--quiet", quiet, "print only the statistics");
  verify_cmd->add_option("--out", out_path, "write the actions here");

  auto* profile_cmd = app.add_subcommand("profile-codec", "measure a codec on one field; one CSV row");
  std::string codec_name = "quantize", input, shape, grid = "200x200";
  CodecOptions options;
  std::size_t p_nt = 300, repetitions = 5;
  profile_cmd->add_option("--codec", codec_name, "null, cast, quantize, fixed-rate or lossless")->capture_default_str();
  profile_cmd->add_option("--tolerance", options.tolerance, "quantize absolute tolerance")->capture_default_str();
  profile_cmd->add_option("--rate", options.rate, "fixed-rate bits per value")->capture_default_str();
  profile_cmd->add_option("--input", input, "raw little-endian float64 file");
  profile_cmd->add_option("--shape", shape, "shape of --input, e.g. 2x200x200");
  profile_cmd->add_option("--grid", grid, "toy wavefield grid when no --input")->capture_default_str();
  profile_cmd->add_option("--nt", p_nt, "toy wavefield steps when no --input")->capture_default_str();
  profile_cmd->add_option("--repetitions", repetitions, "timed round trips")->capture_default_str();
  profile_cmd->add_option("--out", out_path, "CSV path (default stdout)");

  auto* run_cmd = app.add_subcommand("run", "toy benchmark: measured vs predicted speedup");
  std::string config_path;
  std::optional<std::string> r_codec, r_budget, r_grid;
  std::optional<double> r_tolerance;
  std::optional<std::size_t> r_nt;
  run_cmd->add_option("--config", config_path, "key = value benchmark file");
  run_cmd->add_option("--codec", r_codec, "override the codec");
  run_cmd->add_option("--tolerance", r_tolerance, "override the quantize tolerance");
  run_cmd->add_option("--budget", r_budget, "override the checkpoint budget (bytes)");
  run_cmd->add_option("--grid", r_grid, "override the grid, e.g. 200x200");
  run_cmd->add_option("--nt", r_nt, "override the number of steps");
  run_cmd->add_option("--out", out_path, "append the CSV row here");

  // Reject a misspelt subcommand by name, before any option parsing.
  if (argc > 1 && argv[1][0] != '-') {
    const std::string first = argv[1];
    const auto subs = app.get_subcommands([&](CLI::App* sub) { return sub->get_name() == first; });
    if (subs.empty()) {
      fmt::print(stderr, "error: usage: unknown subcommand '{}'\n", first);
      return 2;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    std::replace(what.begin(), what.end(), '\n', ' ');
    fmt::print(stderr, "error: usage: {}\n", what);
    return 2;
  }

  try {
    if (*advise_cmd) return advise(model, out_path);
    if (*sweep_cmd) return sweep(model, axis, range, scale, out_path);
    if (*verify_cmd) return verify_schedule(v_nsteps, v_slots, schedule_path, out_path, quiet);
    if (*profile_cmd) {
      return profile_codec(codec_name, options, input, shape, grid, p_nt, repetitions, out_path);
    }
    if (*run_cmd) return run(config_path, r_codec, r_tolerance, r_budget, r_grid, r_nt, out_path);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}: {}\n", e.category(), e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: internal: {}\n", e.what());
    return 1;
  }
  return 1;
}
