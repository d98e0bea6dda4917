#pragma once

// Signal CSV format: header `time_s,re,im,intensity`, one row per sample.
// Numbers are written with 17 significant digits and a '.' decimal point,
// independent of the process locale.

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fastlight/error.hpp"
#include "fastlight/signal.hpp"

namespace fastlight {

inline constexpr std::string_view kSignalCsvHeader = "time_s,re,im,intensity";

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

inline void write_signal_csv(std::ostream& os, const SampledSignal& signal) {
  os << kSignalCsvHeader << '\n';
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const Complex s = signal[i];
    os << format_double(signal.time(i)) << ',' << format_double(s.real()) << ',' << format_double(s.imag()) << ','
       << format_double(std::norm(s)) << '\n';
  }
}

inline void write_signal_csv(const std::string& path, const SampledSignal& signal) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::InvalidData, "cannot open " + path + " for writing");
  write_signal_csv(os, signal);
  if (!os) throw Error(ErrorKind::InvalidData, "failed writing " + path);
}

/// Parses a signal; the grid must be uniform. The carrier is not part of the
/// format and is supplied by the caller.
inline SampledSignal read_signal_csv(std::istream& is, double carrier_omega = 0.0, const std::string& name = "<csv>") {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::InvalidData, name + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSignalCsvHeader) {
    throw Error(ErrorKind::InvalidData, name + ": expected header '" + std::string(kSignalCsvHeader) + "'");
  }
  std::vector<double> times;
  std::vector<Complex> samples;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::array<double, 4> fields{};
    std::size_t field = 0;
    std::string_view rest(line);
    bool ok = true;
    while (ok) {
      const auto comma = rest.find(',');
      const std::string_view token = rest.substr(0, comma);
      if (field >= fields.size() || !parse_double(token, fields[field])) ok = false;
      ++field;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!ok || field != fields.size()) {
      throw Error(ErrorKind::InvalidData, name + ":" + std::to_string(line_no) + ": expected 4 numeric fields");
    }
    times.push_back(fields[0]);
    samples.emplace_back(fields[1], fields[2]);
  }
  if (times.size() < kMinSamples) {
    throw Error(ErrorKind::InvalidData, name + ": too few samples");
  }
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidData, name + ": time column must increase");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expected = times.front() + static_cast<double>(i) * dt;
    if (std::abs(times[i] - expected) > 1e-6 * dt) {
      throw Error(ErrorKind::InvalidData, name + ": non-uniform time grid at row " + std::to_string(i + 2));
    }
  }
  return SampledSignal(times.front(), dt, std::move(samples), carrier_omega);
}

inline SampledSignal read_signal_csv(const std::string& path, double carrier_omega = 0.0) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::InvalidData, "cannot open " + path);
  return read_signal_csv(is, carrier_omega, path);
}

}  // namespace fastlight
