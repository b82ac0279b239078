#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "freepath/errors.hpp"

namespace freepath {

// Cut-and-project strip: accept lattice points whose coordinate along the
// normal falls in [window_lo, window_hi), then read positions along the
// orthogonal line direction.  normal = (-1, s) selects the line of slope s.
struct StripSpec {
  std::array<double, 2> normal;
  double window_lo = 0.0;
  double window_hi = 1.0;
  bool half_open = true;

  double norm() const { return std::hypot(normal[0], normal[1]); }

  // Internal coordinate: p . normal / |normal|.
  double offset(std::array<std::int64_t, 2> p) const {
    return (static_cast<double>(p[0]) * normal[0] +
            static_cast<double>(p[1]) * normal[1]) /
           norm();
  }

  // Physical coordinate along the line: p . (normal rotated -90) / |normal|.
  double position(std::array<std::int64_t, 2> p) const {
    return (static_cast<double>(p[0]) * normal[1] -
            static_cast<double>(p[1]) * normal[0]) /
           norm();
  }

  void validate() const {
    if (!(std::isfinite(normal[0]) && std::isfinite(normal[1])) ||
        (normal[0] == 0.0 && normal[1] == 0.0))
      throw std::domain_error("strip normal must be finite and nonzero");
    if (!(std::isfinite(window_lo) && std::isfinite(window_hi) &&
          window_lo < window_hi))
      throw std::domain_error("strip window needs window_lo < window_hi");
  }
};

// Offsets within 2^-40 window widths of an edge count as sitting on it.
// Lattice points do land exactly on the edges of the windows used here,
// e.g. (-1, 1) has t = (1+s)/nu for every slope, and whether a computed
// offset falls a rounding error above or below must not decide membership.
inline bool strip_accept(std::array<std::int64_t, 2> p, const StripSpec& spec) {
  spec.validate();
  const double t = spec.offset(p);
  const double tol = (spec.window_hi - spec.window_lo) * 0x1p-40;
  if (t < spec.window_lo - tol) return false;
  return spec.half_open ? t < spec.window_hi - tol : t <= spec.window_hi + tol;
}

// Strip of width (1+s)/nu anchored at 0.  Each integer m = p0+p1 admits
// exactly one lattice point, at u = (m + (s-1)*floor(s*m/(s+1)))/nu, so the
// gaps take the two values 1/nu and s/nu.  At the golden slope s-1 = 1/s and
// s/(s+1) = 1/s, which collapses u to the chain formula
// m/nu + floor(m/s)/(s*nu) with zero shift.
inline StripSpec chain_window(double slope) {
  if (!(std::isfinite(slope) && slope > 1.0))
    throw std::domain_error("chain window slope must be finite and > 1");
  const double nu = std::sqrt(1.0 + slope * slope);
  return {{-1.0, slope}, 0.0, (1.0 + slope) / nu, true};
}

// Projection of the unit cell centered at the origin; same width, shifted.
inline StripSpec centered_window(double slope) {
  if (!(std::isfinite(slope) && slope > 1.0))
    throw std::domain_error("centered window slope must be finite and > 1");
  const double nu = std::sqrt(1.0 + slope * slope);
  const double half = 0.5 * (1.0 + slope) / nu;
  return {{-1.0, slope}, -half, half, true};
}

// Sweep lattice columns p0 = first_col..last_col, solve the window for the
// admissible second coordinates, and return sorted positions on the line.
// Candidate rows come from the real window bounds widened by one; membership
// is settled by strip_accept so boundary rounding cannot drop or double.
inline std::vector<double> cut_project_line(const StripSpec& spec,
                                            std::int64_t first_col,
                                            std::int64_t last_col) {
  spec.validate();
  if (spec.normal[1] == 0.0)
    throw std::domain_error("column sweep needs a nonzero second normal component");
  std::vector<double> out;
  if (first_col > last_col) return out;
  constexpr std::int64_t kColCap = std::int64_t{1} << 40;
  if (first_col < -kColCap || last_col > kColCap)
    throw std::out_of_range("column index beyond precision range 2^40");
  if (last_col - first_col + 1 > 10'000'000)
    throw resource_error("column sweep wider than 10^7");

  const double nrm = spec.norm();
  const double rows_per_col =
      (spec.window_hi - spec.window_lo) * nrm / std::fabs(spec.normal[1]);
  if ((static_cast<double>(last_col - first_col) + 1.0) * (rows_per_col + 3.0) >
      1e8)
    throw resource_error("column sweep would emit > 10^8 candidates");

  for (std::int64_t n = first_col; n <= last_col; ++n) {
    const double shifted_lo =
        spec.window_lo * nrm - static_cast<double>(n) * spec.normal[0];
    const double shifted_hi =
        spec.window_hi * nrm - static_cast<double>(n) * spec.normal[0];
    const double b1 = shifted_lo / spec.normal[1];
    const double b2 = shifted_hi / spec.normal[1];
    const std::int64_t k_lo =
        static_cast<std::int64_t>(std::floor(std::min(b1, b2))) - 1;
    const std::int64_t k_hi =
        static_cast<std::int64_t>(std::ceil(std::max(b1, b2))) + 1;
    for (std::int64_t k = k_lo; k <= k_hi; ++k) {
      const std::array<std::int64_t, 2> p{n, k};
      if (strip_accept(p, spec)) out.push_back(spec.position(p));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace freepath
