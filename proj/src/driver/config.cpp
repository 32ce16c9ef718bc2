#include "adjckpt/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>

#include "adjckpt/error.hpp"

namespace adjckpt {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

template <class T>
bool parse_number(std::string_view text, T& out) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace

std::size_t parse_byte_size(std::string_view text) {
  text = trim(text);
  std::size_t split = 0;
  while (split < text.size() && (std::isdigit(static_cast<unsigned char>(text[split])) || text[split] == '.' ||
                                 text[split] == 'e' || text[split] == 'E' || text[split] == '+')) {
    // An 'e' followed by a non-digit starts a suffix, not an exponent.
    if ((text[split] == 'e' || text[split] == 'E') &&
        (split + 1 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[split + 1])))) {
      break;
    }
    ++split;
  }
  double value = 0.0;
  if (split == 0 || !parse_number(text.substr(0, split), value) || !(value >= 0.0) || !std::isfinite(value)) {
    throw InvalidArgument("bad byte size '" + std::string(text) + "'");
  }
  const std::string suffix = lower(trim(text.substr(split)));
  double scale = 1.0;
  if (suffix.empty() || suffix == "b") {
    scale = 1.0;
  } else if (suffix == "k" || suffix == "kb") {
    scale = 1e3;
  } else if (suffix == "m" || suffix == "mb") {
    scale = 1e6;
  } else if (suffix == "g" || suffix == "gb") {
    scale = 1e9;
  } else if (suffix == "t" || suffix == "tb") {
    scale = 1e12;
  } else if (suffix == "kib") {
    scale = 1024.0;
  } else if (suffix == "mib") {
    scale = 1024.0 * 1024.0;
  } else if (suffix == "gib") {
    scale = 1024.0 * 1024.0 * 1024.0;
  } else if (suffix == "tib") {
    scale = 1024.0 * 1024.0 * 1024.0 * 1024.0;
  } else {
    throw InvalidArgument("unknown byte suffix '" + suffix + "'");
  }
  const double bytes = std::round(value * scale);
  if (bytes > 1.8e19) throw InvalidArgument("byte size '" + std::string(text) + "' is too large");
  return static_cast<std::size_t>(bytes);
}

RunConfig parse_run_config(std::istream& in, std::string_view origin) {
  RunConfig c;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    auto error = [&](const std::string& what) {
      return ConfigError(std::string(origin) + ":" + std::to_string(number) + ": " + what);
    };
    if (eq == std::string_view::npos) throw error("expected key = value");
    const std::string key = lower(trim(view.substr(0, eq)));
    const std::string_view value = trim(view.substr(eq + 1));
    if (value.empty()) throw error("missing value for '" + key + "'");

    auto real = [&](double& out, bool allow_zero) {
      if (!parse_number(value, out) || !std::isfinite(out) || out < 0.0 || (!allow_zero && out == 0.0)) {
        throw error("bad value '" + std::string(value) + "' for " + key);
      }
    };
    auto count = [&](std::size_t& out) {
      if (!parse_number(value, out) || out == 0) throw error("bad value '" + std::string(value) + "' for " + key);
    };

    if (key == "grid") {
      c.grid.clear();
      std::string_view rest = value;
      while (true) {
        const auto x = rest.find_first_of("xX");
        std::size_t extent = 0;
        if (!parse_number(trim(rest.substr(0, x)), extent) || extent == 0) throw error("bad grid '" + std::string(value) + "'");
        c.grid.push_back(extent);
        if (x == std::string_view::npos) break;
        rest = rest.substr(x + 1);
      }
      if (c.grid.size() > 2) throw error("grid must be 1-D or 2-D");
    } else if (key == "spacing") {
      real(c.spacing, false);
    } else if (key == "dt") {
      real(c.dt, true);
    } else if (key == "nt") {
      count(c.nt);
    } else if (key == "velocity") {
      real(c.velocity, false);
    } else if (key == "anomaly") {
      real(c.anomaly, true);
    } else if (key == "frequency") {
      real(c.frequency, true);
    } else if (key == "codec") {
      c.codec = std::string(value);
    } else if (key == "tolerance") {
      real(c.tolerance, false);
    } else if (key == "rate") {
      real(c.rate, false);
    } else if (key == "budget") {
      try {
        c.budget = parse_byte_size(value);
      } catch (const InvalidArgument& e) {
        throw error(e.what());
      }
    } else if (key == "budget_states") {
      real(c.budget_states, false);
    } else if (key == "repeats") {
      count(c.repeats);
    } else if (key == "profile_repetitions") {
      count(c.profile_repetitions);
    } else {
      throw error("unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_run_config(in, path.string());
}

WaveParams make_toy_problem(const RunConfig& config) {
  WaveParams p;
  p.shape = config.grid;
  p.spacing = config.spacing;
  p.nt = config.nt;
  const double d = static_cast<double>(p.shape.size());
  const double limit = config.spacing / (config.velocity * (1.0 + config.anomaly)) / std::sqrt(d);
  p.dt = config.dt > 0.0 ? config.dt : 0.5 * limit;

  const std::size_t points = element_count(p.shape);
  p.slowness2.assign(points, 1.0 / (config.velocity * config.velocity));

  // Source and receivers two points below the top edge (z is the last axis).
  const std::size_t nz = p.shape.back();
  const std::size_t nx = p.shape.size() == 2 ? p.shape[0] : 1;
  const std::size_t depth = std::min<std::size_t>(2, nz - 1);
  auto flat = [&](std::size_t ix, std::size_t iz) { return ix * nz + iz; };
  if (p.shape.size() == 2) {
    p.source = flat(nx / 2, depth);
    for (std::size_t ix = 0; ix < nx; ix += std::max<std::size_t>(1, nx / 32)) p.receivers.push_back(flat(ix, depth));
  } else {
    p.source = nz / 4;
    for (std::size_t iz = 0; iz < nz; iz += std::max<std::size_t>(1, nz / 16)) p.receivers.push_back(iz);
  }

  const double frequency =
      config.frequency > 0.0 ? config.frequency : config.velocity / (10.0 * config.spacing);
  p.wavelet = ricker(frequency, 1.0 / frequency, p.dt, p.nt);

  // The "true" model: a smooth velocity bump in the middle of the grid.
  WaveParams truth = p;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iz = 0; iz < nz; ++iz) {
      const double rx = p.shape.size() == 2 ? (static_cast<double>(ix) - nx / 2.0) / (nx / 6.0 + 1.0) : 0.0;
      const double rz = (static_cast<double>(iz) - nz / 2.0) / (nz / 6.0 + 1.0);
      const double v = config.velocity * (1.0 + config.anomaly * std::exp(-(rx * rx + rz * rz)));
      truth.slowness2[flat(ix, iz)] = 1.0 / (v * v);
    }
  }

  // Scale the source so the background wavefield peaks near 1.
  {
    WaveStepper probe(p);
    Field state = probe.initial_state();
    double peak = 0.0;
    for (std::size_t k = 0; k < p.nt; ++k) {
      probe.forward(state, k);
      for (std::size_t i = points; i < 2 * points; ++i) peak = std::max(peak, std::abs(state.values[i]));
    }
    if (peak > 0.0) {
      for (double& q : p.wavelet) q /= peak;
    }
  }
  truth.wavelet = p.wavelet;
  p.observed = WaveStepper(truth).simulate();
  return p;
}

}  // namespace adjckpt
