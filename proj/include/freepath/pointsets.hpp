#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "freepath/constants.hpp"
#include "freepath/errors.hpp"
#include "freepath/rng.hpp"

namespace freepath {

// Index cap keeping m/nu accurate to ~1e-6 absolute near the top.
inline constexpr std::int64_t kMaxChainIndex = std::int64_t{1} << 40;

// Quasiperiodic chain x_m = m/nu_s + floor(m/s)/(s*nu_s), nu_s = sqrt(1+s^2).
// Gaps take exactly two values, 1/nu_s and (1+1/s)/nu_s; the mean gap tends
// to nu_s/s^2, so the density is s^2/nu_s.
class ChainGeometry {
 public:
  explicit ChainGeometry(double slope) : s_(slope) {
    if (!(std::isfinite(slope) && slope > 1.0))
      throw std::domain_error("chain slope must be finite and > 1");
    nu_ = std::sqrt(1.0 + slope * slope);
    inv_nu_ = 1.0 / nu_;
    step_ = 1.0 / (slope * nu_);
    inv_s_hi_ = 1.0 / slope;
    // Second word of a double-double reciprocal; hi + lo = 1/s to ~2^-104.
    inv_s_lo_ = -std::fma(inv_s_hi_, slope, -1.0) * inv_s_hi_;
  }

  double slope() const { return s_; }
  double nu() const { return nu_; }
  double density() const { return s_ * s_ / nu_; }
  double mean_gap() const { return nu_ / (s_ * s_); }
  double short_gap() const { return inv_nu_; }
  double long_gap() const { return inv_nu_ + step_; }

  // floor(m/s) exactly for |m| <= 2^40.  A plain double product can land on
  // the wrong side of an integer once m*ulp(1/s) exceeds the distance from
  // m/s to that integer; the compensated product keeps ~2^-52 slack against
  // the ~2^-42 worst-case closeness of m/tau at the index cap.  When m/s is
  // an exact integer the compensated fraction can come out at ~-2^-105, so
  // values above -2^-50 count as zero; fractions that near an integer from
  // below cannot occur for quadratic or low-denominator slopes.
  std::int64_t floor_ratio(std::int64_t m) const {
    const double md = static_cast<double>(m);
    const double p_hi = md * inv_s_hi_;
    const double p_err = std::fma(md, inv_s_hi_, -p_hi);
    const double base = std::floor(p_hi);
    const double frac = (p_hi - base) + (p_err + md * inv_s_lo_);
    std::int64_t q = static_cast<std::int64_t>(base);
    if (frac >= 1.0)
      ++q;
    else if (frac < -0x1p-50)
      --q;
    return q;
  }

  double point(std::int64_t m) const {
    if (m > kMaxChainIndex || m < -kMaxChainIndex)
      throw std::out_of_range("chain index " + std::to_string(m) +
                              " beyond precision range 2^40");
    return static_cast<double>(m) * inv_nu_ +
           static_cast<double>(floor_ratio(m)) * step_;
  }

 private:
  double s_, nu_, inv_nu_, step_;
  double inv_s_hi_, inv_s_lo_;
};

struct PeriodicLattice {
  double spacing;

  double point(std::int64_t k) const {
    return static_cast<double>(k) * spacing;
  }
};

// Single fixed Poisson realization, materialized cell by cell.  Each cell's
// count and positions are pure functions of (seed, cell index), so queries
// are order-independent and memory stays O(1) however far trajectories run.
class PoissonCells {
 public:
  PoissonCells(double intensity, std::uint64_t seed, double cell_size)
      : intensity_(intensity),
        cell_(cell_size),
        exp_neg_lambda_(std::exp(-intensity * cell_size)),
        seed_(seed) {}

  double intensity() const { return intensity_; }
  double cell_size() const { return cell_; }
  std::uint64_t seed() const { return seed_; }

  // Points of cell c, i.e. of [c*w, (c+1)*w), sorted ascending.  `out` is
  // cleared and refilled so callers can reuse its capacity.
  void realize(std::int64_t c, std::vector<double>& out) const {
    out.clear();
    CounterStream rng{seed_, static_cast<std::uint64_t>(c), 0};
    const std::uint64_t n = poisson_count(exp_neg_lambda_, rng);
    const double lo = static_cast<double>(c) * cell_;
    for (std::uint64_t i = 0; i < n; ++i)
      out.push_back(lo + cell_ * rng.next_u01());
    std::sort(out.begin(), out.end());
  }

  // Cell index with (double)c*w <= y < (double)(c+1)*w under the same
  // floating-point boundaries realize() uses.
  std::int64_t cell_of(double y) const {
    const double t = std::floor(y / cell_);
    if (!(std::fabs(t) < 0x1p62))
      throw std::out_of_range("position beyond poisson cell index range");
    std::int64_t c = static_cast<std::int64_t>(t);
    while (static_cast<double>(c) * cell_ > y) --c;
    while (static_cast<double>(c + 1) * cell_ <= y) ++c;
    return c;
  }

 private:
  double intensity_, cell_, exp_neg_lambda_;
  std::uint64_t seed_;
};

// Immutable scatterer description.  All queries are deterministic functions
// of (field, query point); fields may be shared freely across threads.
class ScattererField {
 public:
  enum class Kind { fibonacci, chain, periodic, poisson };

  static ScattererField fibonacci() {
    return {Kind::fibonacci, ChainGeometry(golden_constants().tau)};
  }

  static ScattererField chain(double slope) {
    return {Kind::chain, ChainGeometry(slope)};
  }

  static ScattererField periodic(double spacing) {
    if (!(std::isfinite(spacing) && spacing > 0.0))
      throw std::domain_error("periodic spacing must be finite and > 0");
    return {Kind::periodic, PeriodicLattice{spacing}};
  }

  // cell_size 0 selects the default 1/intensity.
  static ScattererField poisson(double intensity, std::uint64_t seed,
                                double cell_size = 0.0) {
    if (!(std::isfinite(intensity) && intensity > 0.0))
      throw std::domain_error("poisson intensity must be finite and > 0");
    if (cell_size == 0.0) cell_size = 1.0 / intensity;
    if (!(std::isfinite(cell_size) && cell_size > 0.0))
      throw std::domain_error("poisson cell_size must be finite and > 0");
    if (intensity * cell_size > 700.0)
      throw std::domain_error(
          "poisson cell holds too many points on average; shrink cell_size");
    return {Kind::poisson, PoissonCells(intensity, seed, cell_size)};
  }

  Kind kind() const { return kind_; }

  std::string_view tag() const {
    switch (kind_) {
      case Kind::fibonacci: return "fibonacci";
      case Kind::chain: return "chain";
      case Kind::periodic: return "periodic";
      case Kind::poisson: return "poisson";
    }
    return "";
  }

  double density() const {
    switch (kind_) {
      case Kind::fibonacci:
      case Kind::chain: return chain_geometry().density();
      case Kind::periodic: return 1.0 / spacing();
      case Kind::poisson: return poisson_cells().intensity();
    }
    return 0.0;
  }

  // 0 for poisson: arbitrarily close pairs occur in any realization.
  double shortest_gap() const {
    switch (kind_) {
      case Kind::fibonacci:
      case Kind::chain: return chain_geometry().short_gap();
      case Kind::periodic: return spacing();
      case Kind::poisson: return 0.0;
    }
    return 0.0;
  }

  const ChainGeometry& chain_geometry() const {
    return std::get<ChainGeometry>(rep_);
  }
  double spacing() const { return std::get<PeriodicLattice>(rep_).spacing; }
  const PoissonCells& poisson_cells() const {
    return std::get<PoissonCells>(rep_);
  }

 private:
  using Rep = std::variant<ChainGeometry, PeriodicLattice, PoissonCells>;
  ScattererField(Kind k, Rep rep) : kind_(k), rep_(std::move(rep)) {}

  Kind kind_;
  Rep rep_;
};

inline double fib_point(std::int64_t m) {
  static const ChainGeometry g(golden_constants().tau);
  return g.point(m);
}

inline double chain_point(std::int64_t m, double slope) {
  return ChainGeometry(slope).point(m);
}

// Counter of queries issued with eps at or above the field's shortest gap,
// where obstacle intervals overlap and the non-overlap analysis breaks down.
struct QueryDiagnostics {
  std::uint64_t overlap_warnings = 0;
};

namespace detail {

inline void require_finite_position(double y) {
  if (!std::isfinite(y))
    throw std::domain_error("query position must be finite");
}

inline double nearest_chain(const ChainGeometry& g, double y) {
  const double t = y * g.density();
  if (!(std::fabs(t) < static_cast<double>(kMaxChainIndex - 8)))
    throw std::out_of_range("position beyond chain index range");
  const std::int64_t m0 = std::llround(t);
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t m = m0 - 3; m <= m0 + 3; ++m)
    best = std::min(best, std::fabs(y - g.point(m)));
  return best;
}

inline double nearest_periodic(const PeriodicLattice& f, double y) {
  const double t = y / f.spacing;
  if (!(std::fabs(t) < 0x1p62))
    throw std::out_of_range("position beyond periodic index range");
  const std::int64_t k0 = std::llround(t);
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t k = k0 - 1; k <= k0 + 1; ++k)
    best = std::min(best, std::fabs(y - f.point(k)));
  return best;
}

inline double nearest_poisson(const PoissonCells& f, double y) {
  const std::int64_t c0 = f.cell_of(y);
  std::vector<double> pts;
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t r = 0;; ++r) {
    if (r > 1000000)
      throw resource_error("poisson nearest-point scan exceeded 10^6 cells");
    for (const std::int64_t c : {c0 - r, c0 + r}) {
      f.realize(c, pts);
      for (const double p : pts) best = std::min(best, std::fabs(y - p));
      if (r == 0) break;
    }
    // Unscanned points lie left of cell c0-r or right of cell c0+r.
    const double left = y - static_cast<double>(c0 - r) * f.cell_size();
    const double right = static_cast<double>(c0 + r + 1) * f.cell_size() - y;
    if (best <= left && best <= right) return best;
  }
}

}  // namespace detail

inline double nearest_distance(const ScattererField& f, double y) {
  detail::require_finite_position(y);
  switch (f.kind()) {
    case ScattererField::Kind::fibonacci:
    case ScattererField::Kind::chain:
      return detail::nearest_chain(f.chain_geometry(), y);
    case ScattererField::Kind::periodic:
      return detail::nearest_periodic({f.spacing()}, y);
    case ScattererField::Kind::poisson:
      return detail::nearest_poisson(f.poisson_cells(), y);
  }
  return 0.0;
}

// True iff y lies within eps/2 of a field point, boundary inclusive.
inline bool field_hit(const ScattererField& f, double y, double eps,
                      QueryDiagnostics* diag = nullptr) {
  if (!(std::isfinite(eps) && eps > 0.0))
    throw std::domain_error("field_hit eps must be finite and > 0");
  if (diag) {
    const double g = f.shortest_gap();
    if (g <= 0.0 || eps >= g) ++diag->overlap_warnings;
  }
  return nearest_distance(f, y) <= 0.5 * eps;
}

// All field points in [a, b), sorted strictly ascending.
inline std::vector<double> enumerate_points(const ScattererField& f, double a,
                                            double b) {
  detail::require_finite_position(a);
  detail::require_finite_position(b);
  if (!(a < b))
    throw std::domain_error("enumerate_points needs an interval with a < b");
  if ((b - a) * f.density() > 1e8)
    throw resource_error("enumerate_points interval implies > 10^8 points");

  std::vector<double> out;
  switch (f.kind()) {
    case ScattererField::Kind::fibonacci:
    case ScattererField::Kind::chain: {
      const ChainGeometry& g = f.chain_geometry();
      const double t = a * g.density();
      if (!(std::fabs(t) < static_cast<double>(kMaxChainIndex - 8)) ||
          !(std::fabs(b * g.density()) < static_cast<double>(kMaxChainIndex - 8)))
        throw std::out_of_range("interval beyond chain index range");
      std::int64_t m = std::llround(t);
      while (g.point(m) >= a) --m;
      while (g.point(m) < a) ++m;
      for (double x = g.point(m); x < b; x = g.point(++m)) out.push_back(x);
      break;
    }
    case ScattererField::Kind::periodic: {
      const PeriodicLattice lat{f.spacing()};
      const double t = a / lat.spacing;
      if (!(std::fabs(t) < 0x1p62))
        throw std::out_of_range("interval beyond periodic index range");
      std::int64_t k = std::llround(t);
      while (lat.point(k) >= a) --k;
      while (lat.point(k) < a) ++k;
      for (double x = lat.point(k); x < b; x = lat.point(++k))
        out.push_back(x);
      break;
    }
    case ScattererField::Kind::poisson: {
      const PoissonCells& cells = f.poisson_cells();
      std::vector<double> pts;
      const std::int64_t c_lo = cells.cell_of(a);
      const std::int64_t c_hi = cells.cell_of(b);
      for (std::int64_t c = c_lo; c <= c_hi; ++c) {
        cells.realize(c, pts);
        for (const double p : pts)
          if (p >= a && p < b) out.push_back(p);
      }
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
    }
  }
  return out;
}

}  // namespace freepath
