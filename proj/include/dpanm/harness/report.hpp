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

// Result rows and their CSV / JSON serialization.

#ifndef DPANM_HARNESS_REPORT_HPP_
#define DPANM_HARNESS_REPORT_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dpanm/errors.hpp"
#include "json.hpp"

namespace dpanm::harness {

inline constexpr std::string_view kCsvHeader =
    "dataset,score,epsilon,lambda,seed,decision,correct,abstained,margin,"
    "sigma,predicted_utility";

enum class OutputFormat { kCsv, kJson };

inline OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw DomainError("unknown output format '" + std::string(name) + "'");
}

// One trial, or with aggregate = true, the per-cell summary that follows a
// cell's trials: decision "mean", seed = number of trials, correct = correct
// rate (abstentions and errors count as incorrect), abstained = abstain rate, and
// margin / sigma / predicted_utility averaged over the trials that have them.
struct ResultRow {
  std::string dataset;
  std::string score;
  std::optional<double> epsilon;  // absent in non-private runs
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string decision;
  std::optional<double> correct;
  double abstained = 0.0;
  double margin = std::nan("");
  std::optional<double> sigma;
  std::optional<double> predicted_utility;
  bool aggregate = false;
  // Not serialized; lets aggregates tell "no truth" from "all abstained".
  bool truth_known = false;
};

// 12 significant digits; NaN and infinities spelled nan / inf / -inf.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

inline std::string csv_field(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

inline std::string csv_flag(double v, bool aggregate) {
  if (aggregate) return format_number(v);
  return v != 0.0 ? "true" : "false";
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// A double rounded to 12 significant digits, or null when not finite.
inline nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v).c_str(), nullptr);
}

inline nlohmann::json json_number(const std::optional<double>& v) {
  return v ? json_number(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json json_flag(double v, bool aggregate) {
  if (aggregate) return json_number(v);
  return v != 0.0;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << detail::csv_quote(r.dataset) << ',' << r.score << ','
        << detail::csv_field(r.epsilon) << ',' << format_number(r.lambda) << ','
        << r.seed << ',' << r.decision << ','
        << (r.correct ? detail::csv_flag(*r.correct, r.aggregate) : "") << ','
        << detail::csv_flag(r.abstained, r.aggregate) << ','
        << format_number(r.margin) << ',' << detail::csv_field(r.sigma) << ','
        << detail::csv_field(r.predicted_utility) << '\n';
  }
}

inline nlohmann::json to_json(const ResultRow& r) {
  nlohmann::json j = nlohmann::json::object();
  j["dataset"] = r.dataset;
  j["score"] = r.score;
  j["epsilon"] = detail::json_number(r.epsilon);
  j["lambda"] = detail::json_number(r.lambda);
  j["seed"] = r.seed;
  j["decision"] = r.decision;
  j["correct"] = r.correct ? detail::json_flag(*r.correct, r.aggregate)
                           : nlohmann::json(nullptr);
  j["abstained"] = detail::json_flag(r.abstained, r.aggregate);
  j["margin"] = detail::json_number(r.margin);
  j["sigma"] = detail::json_number(r.sigma);
  j["predicted_utility"] = detail::json_number(r.predicted_utility);
  return j;
}

inline void write_json(std::ostream& out, const std::vector<ResultRow>& rows) {
  nlohmann::ordered_json array = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    const nlohmann::json j = to_json(r);
    nlohmann::ordered_json o;
    for (const char* key : {"dataset", "score", "epsilon", "lambda", "seed",
                            "decision", "correct", "abstained", "margin",
                            "sigma", "predicted_utility"}) {
      o[key] = j.at(key);
    }
    array.push_back(std::move(o));
  }
  out << array.dump(2) << '\n';
}

inline std::string render_report(const std::vector<ResultRow>& rows,
                                 OutputFormat format) {
  std::ostringstream out;
  if (format == OutputFormat::kCsv) {
    write_csv(out, rows);
  } else {
    write_json(out, rows);
  }
  return out.str();
}

// Writes the rows to `path`, or to stdout when `path` is empty or "-".
inline void emit_report(const std::vector<ResultRow>& rows,
                        OutputFormat format, const std::string& path,
                        std::ostream& stdout_sink) {
  if (rows.empty()) throw DomainError("emit_report: no rows");
  const std::string text = render_report(rows, format);
  if (path.empty() || path == "-") {
    stdout_sink << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace dpanm::harness

#endif  // DPANM_HARNESS_REPORT_HPP_
