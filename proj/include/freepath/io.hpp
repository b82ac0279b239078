#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "freepath/errors.hpp"
#include "freepath/stats.hpp"

namespace freepath {

// Locale-independent decimal rendering, 15 significant digits.
inline std::string format_sig(double x) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 15);
  return std::string(buf, res.ptr);
}

inline constexpr std::string_view kSurvivalCsvHeader = "T,survival,count_ge";

inline std::string survival_csv(const SurvivalCurve& c) {
  std::string s{kSurvivalCsvHeader};
  s += '\n';
  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    s += format_sig(c.thresholds[i]);
    s += ',';
    s += format_sig(c.survival[i]);
    s += ',';
    s += std::to_string(c.count_ge[i]);
    s += '\n';
  }
  return s;
}

// Write via a sibling .tmp then rename, so a failure never leaves a partial
// file under the target name.
inline void atomic_write(const std::filesystem::path& path,
                         std::string_view contents) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw resource_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(),
              static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw resource_error("failed while writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw resource_error("cannot move " + tmp.string() +
                         " into place: " + ec.message());
  }
}

inline void write_survival_csv(const std::filesystem::path& path,
                               const SurvivalCurve& c) {
  atomic_write(path, survival_csv(c));
}

namespace detail {

inline double parse_double_field(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw resource_error("unparsable number '" + std::string(s) + "' in " +
                         where);
  return v;
}

inline std::uint64_t parse_count_field(std::string_view s,
                                       const std::string& where) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw resource_error("unparsable count '" + std::string(s) + "' in " +
                         where);
  return v;
}

}  // namespace detail

// Counts are authoritative on read; survival is recomputed as count_ge / n
// and checked against the printed column.
inline SurvivalCurve read_survival_csv(const std::filesystem::path& path,
                                       std::uint64_t n, double epsilon,
                                       double censor_limit,
                                       std::string field_tag = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw resource_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSurvivalCsvHeader)
    throw resource_error("missing survival CSV header in " + path.string());

  SurvivalCurve c;
  c.n = n;
  c.epsilon = epsilon;
  c.censor_limit = censor_limit;
  c.field_tag = std::move(field_tag);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw resource_error("malformed row in " + path.string());
    const std::string_view sv{line};
    const double T = detail::parse_double_field(sv.substr(0, c1), path.string());
    const double printed =
        detail::parse_double_field(sv.substr(c1 + 1, c2 - c1 - 1), path.string());
    const std::uint64_t count =
        detail::parse_count_field(sv.substr(c2 + 1), path.string());
    const double survival =
        static_cast<double>(count) / static_cast<double>(n);
    if (std::fabs(printed - survival) > 1e-12 * std::max(1.0, survival))
      throw resource_error("survival column disagrees with count_ge/n in " +
                           path.string());
    c.thresholds.push_back(T);
    c.count_ge.push_back(count);
    c.survival.push_back(survival);
  }
  return c;
}

inline nlohmann::ordered_json fit_json(const TailFit& f) {
  nlohmann::ordered_json j;
  j["model"] =
      f.model == TailModel::power_law ? "power_law" : "exponential";
  j["param"] = f.param;
  j["prefactor"] = f.prefactor;
  j["range"] = nlohmann::ordered_json::array({f.fit_lo, f.fit_hi});
  j["rms_residual"] = f.rms_residual;
  j["points_used"] = f.points_used;
  j["dropped_zeros"] = f.dropped_zeros;
  return j;
}

}  // namespace freepath
