//
// Copyright 2026 The dpanm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Pairs-file ingestion, min-max normalization, train/test splitting and
// synthetic additive-noise generators.
//
// Pairs files are plain text with two whitespace-separated numeric columns
// per row; blank lines and lines starting with '#' are skipped. A sidecar
// "<stem>.truth" holding "->" or "<-" gives the ground-truth direction.

#ifndef DPANM_DATA_IO_HPP_
#define DPANM_DATA_IO_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dpanm/errors.hpp"
#include "dpanm/random.hpp"

namespace dpanm {

enum class Direction { kXCausesY, kYCausesX, kUnknown };

inline constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kXCausesY:
      return "->";
    case Direction::kYCausesX:
      return "<-";
    case Direction::kUnknown:
      return "?";
  }
  return "?";
}

struct SamplePairs {
  std::vector<double> x;
  std::vector<double> y;
  std::string id;
  Direction ground_truth = Direction::kUnknown;
  // Free-form annotations: normalization ranges, identifiability flags.
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return x.size(); }

  void validate() const {
    detail::require_same_length(x, y, "SamplePairs");
    detail::require_finite(x, "SamplePairs");
    detail::require_finite(y, "SamplePairs");
  }
};

struct SplitData {
  SamplePairs train;
  SamplePairs test;
  std::uint64_t seed = 0;
  // Source row of each train / test sample.
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> test_index;

  std::size_t n() const { return train.size(); }
  std::size_t m() const { return test.size(); }
};

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::optional<double> parse_number(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

// Parses pairs-file text. `source` names the input in error messages.
inline SamplePairs parse_pairs(std::istream& in, const std::string& source) {
  SamplePairs out;
  out.id = source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream tokens{std::string(body)};
    std::vector<std::string> fields;
    for (std::string t; tokens >> t;) fields.push_back(std::move(t));
    if (fields.size() != 2) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected 2 "
                       "columns, found " + std::to_string(fields.size()));
    }
    double v[2];
    for (int c = 0; c < 2; ++c) {
      const auto parsed = detail::parse_number(fields[c]);
      if (!parsed) {
        throw ParseError(source + ":" + std::to_string(line_no) +
                         ": not a finite number: '" + fields[c] + "'");
      }
      v[c] = *parsed;
    }
    out.x.push_back(v[0]);
    out.y.push_back(v[1]);
  }
  if (out.x.empty()) throw ParseError(source + ": no data rows");
  return out;
}

// Reads "->" / "<-" from a truth sidecar; anything else is a parse error.
inline Direction load_truth_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const std::string_view t = detail::trim(text);
  if (t == "->") return Direction::kXCausesY;
  if (t == "<-") return Direction::kYCausesX;
  throw ParseError(path.string() + ": expected '->' or '<-'");
}

inline SamplePairs load_pairs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open");
  SamplePairs out = parse_pairs(in, path.string());
  out.id = path.stem().string();
  auto truth = path;
  truth.replace_extension(".truth");
  if (std::filesystem::exists(truth)) out.ground_truth = load_truth_sidecar(truth);
  return out;
}

// All "*.txt" pairs files in `dir` (excluding "*_des.txt" descriptions),
// sorted by file name.
inline std::vector<SamplePairs> load_pairs_dir(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ParseError(dir.string() + ": not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto& p = entry.path();
    const std::string name = p.filename().string();
    if (!entry.is_regular_file() || p.extension() != ".txt") continue;
    if (name.size() >= 8 && name.ends_with("_des.txt")) continue;
    files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  std::vector<SamplePairs> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_pairs_file(f));
  return out;
}

inline void write_pairs(std::ostream& out, const SamplePairs& samples) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << detail::format_number(samples.x[i]) << ' '
        << detail::format_number(samples.y[i]) << '\n';
  }
}

inline void write_pairs_file(const std::filesystem::path& path,
                             const SamplePairs& samples) {
  std::ofstream out(path);
  if (!out) throw ParseError(path.string() + ": cannot write");
  write_pairs(out, samples);
  if (!out) throw ParseError(path.string() + ": write failed");
}

namespace detail {

// Affine map of v onto [-1, 1] with min -> -1 and max -> +1 exactly.
inline std::vector<double> min_max_unit(std::span<const double> v,
                                        const char* coordinate,
                                        std::map<std::string, std::string>& md) {
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    throw DegenerateDataError(std::string("normalize: coordinate ") +
                              coordinate + " is constant");
  }
  std::vector<double> out(v.size());
  const double half = (hi - lo) / 2.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == lo) {
      out[i] = -1.0;
    } else if (v[i] == hi) {
      out[i] = 1.0;
    } else {
      out[i] = std::clamp((v[i] - lo) / half - 1.0, -1.0, 1.0);
    }
  }
  md[std::string(coordinate) + "_min"] = format_number(lo);
  md[std::string(coordinate) + "_max"] = format_number(hi);
  return out;
}

}  // namespace detail

// Min-max normalization of each coordinate to [-1, 1]. The ranges are data
// dependent and are not themselves privatized.
inline SamplePairs normalize(const SamplePairs& samples) {
  samples.validate();
  if (samples.size() == 0) throw DomainError("normalize: empty sample");
  SamplePairs out;
  out.id = samples.id;
  out.ground_truth = samples.ground_truth;
  out.metadata = samples.metadata;
  out.x = detail::min_max_unit(samples.x, "x", out.metadata);
  out.y = detail::min_max_unit(samples.y, "y", out.metadata);
  return out;
}

// Uniformly random partition into round(N * test_fraction) test samples and
// the rest for training.
inline SplitData split(const SamplePairs& samples, double test_fraction,
                       std::uint64_t seed) {
  samples.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DomainError("split: test fraction must lie in (0, 1)");
  }
  const std::size_t total = samples.size();
  const auto m = static_cast<std::size_t>(
      std::llround(static_cast<double>(total) * test_fraction));
  if (m < 4 || m >= total) {
    throw DomainError("split: " + std::to_string(total) +
                      " samples are too few for n >= 1 and m >= 4");
  }
  std::vector<std::size_t> perm(total);
  std::iota(perm.begin(), perm.end(), 0);
  NoiseStream rng(seed);
  for (std::size_t i = total - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }

  SplitData out;
  out.seed = seed;
  out.test_index.assign(perm.begin(), perm.begin() + m);
  out.train_index.assign(perm.begin() + m, perm.end());
  auto take = [&](const std::vector<std::size_t>& idx, const char* suffix) {
    SamplePairs part;
    part.id = samples.id + suffix;
    part.ground_truth = samples.ground_truth;
    part.metadata = samples.metadata;
    for (std::size_t i : idx) {
      part.x.push_back(samples.x[i]);
      part.y.push_back(samples.y[i]);
    }
    return part;
  };
  out.test = take(out.test_index, "/test");
  out.train = take(out.train_index, "/train");
  return out;
}

enum class SynthShape { kCubic, kSigmoid, kLinearGaussian };

inline constexpr std::string_view to_string(SynthShape s) {
  switch (s) {
    case SynthShape::kCubic:
      return "cubic";
    case SynthShape::kSigmoid:
      return "sigmoid";
    case SynthShape::kLinearGaussian:
      return "linear-gaussian";
  }
  return "?";
}

inline SynthShape parse_synth_shape(std::string_view name) {
  if (name == "cubic") return SynthShape::kCubic;
  if (name == "sigmoid") return SynthShape::kSigmoid;
  if (name == "linear-gaussian") return SynthShape::kLinearGaussian;
  throw DomainError("unknown synthetic shape '" + std::string(name) + "'");
}

// Y = f(X) + N with X independent of N, then normalized jointly to [-1, 1].
//   cubic:           X ~ U[-1, 1], f(x) = x^3,            N ~ noise * U[-1, 1]
//   sigmoid:         X ~ U[-1, 1], f(x) = tanh(3x),       N ~ noise * U[-1, 1]
//   linear-gaussian: X ~ N(0, 1),  f(x) = x,              N ~ noise * N(0, 1)
// The linear-Gaussian model is not identifiable; uniform X would make it
// identifiable, so that shape draws X from a normal instead.
inline SamplePairs synth_anm(SynthShape shape, std::size_t n_total,
                             double noise_level, std::uint64_t seed) {
  if (n_total < 8) throw DomainError("synth_anm: n_total must be >= 8");
  if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
    throw DomainError("synth_anm: noise level must be finite and >= 0");
  }
  NoiseStream rng(derive_seed(seed, "synth", to_string(shape)));
  SamplePairs raw;
  raw.x.resize(n_total);
  raw.y.resize(n_total);
  for (std::size_t i = 0; i < n_total; ++i) {
    double x = 0.0, y = 0.0;
    switch (shape) {
      case SynthShape::kCubic:
        x = rng.uniform(-1.0, 1.0);
        y = x * x * x + noise_level * rng.uniform(-1.0, 1.0);
        break;
      case SynthShape::kSigmoid:
        x = rng.uniform(-1.0, 1.0);
        y = std::tanh(3.0 * x) + noise_level * rng.uniform(-1.0, 1.0);
        break;
      case SynthShape::kLinearGaussian:
        x = rng.normal();
        y = x + noise_level * rng.normal();
        break;
    }
    raw.x[i] = x;
    raw.y[i] = y;
  }
  SamplePairs out = normalize(raw);
  out.id = std::string(to_string(shape)) + "-" + std::to_string(seed);
  out.ground_truth = Direction::kXCausesY;
  out.metadata["identifiable"] =
      shape == SynthShape::kLinearGaussian ? "false" : "true";
  return out;
}

}  // namespace dpanm

#endif  // DPANM_DATA_IO_HPP_
