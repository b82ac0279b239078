#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "freepath/errors.hpp"
#include "freepath/simulate.hpp"

namespace freepath {

// Empirical upper-tail distribution of scaled free path lengths T = eps * k.
// count_ge keeps the exact integer numerators; survival = count_ge / n.
struct SurvivalCurve {
  std::vector<double> thresholds;
  std::vector<std::uint64_t> count_ge;
  std::vector<double> survival;
  std::uint64_t n = 0;
  double epsilon = 0.0;
  double censor_limit = 0.0;
  std::string field_tag;
};

enum class TailModel { power_law, exponential };

struct TailFit {
  TailModel model = TailModel::power_law;
  double param = 0.0;  // log-log slope (power) or decay rate (exponential)
  double prefactor = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double rms_residual = 0.0;  // in the fit's transformed coordinates
  std::size_t points_used = 0;
  std::size_t dropped_zeros = 0;
};

// Log-uniform grid, endpoints inclusive.
inline std::vector<double> default_thresholds(double t_min, double t_max,
                                              std::size_t count) {
  if (!(std::isfinite(t_min) && std::isfinite(t_max) && 0.0 < t_min &&
        t_min < t_max))
    throw std::domain_error("threshold grid needs 0 < T_min < T_max");
  if (count < 2) throw std::domain_error("threshold grid needs count >= 2");
  std::vector<double> out(count);
  const double la = std::log(t_min);
  const double lb = std::log(t_max);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(la + (lb - la) * static_cast<double>(i) /
                               static_cast<double>(count - 1));
  out.front() = t_min;
  out.back() = t_max;
  for (std::size_t i = 1; i < count; ++i)
    if (!(out[i - 1] < out[i]))
      throw std::domain_error("threshold grid collapsed; widen the range");
  return out;
}

namespace detail {

// Smallest k with (double)k * eps >= T, resolved in the same arithmetic the
// curve uses so threshold comparisons are exact and monotone in T.
inline std::uint64_t smallest_step_at_least(double T, double eps) {
  double q = std::ceil(T / eps);
  if (!(q >= 1.0)) q = 1.0;
  std::uint64_t k = static_cast<std::uint64_t>(q);
  while (k > 1 && static_cast<double>(k - 1) * eps >= T) --k;
  while (static_cast<double>(k) * eps < T) ++k;
  return k;
}

}  // namespace detail

// survival(T) = (#{hits with eps*k >= T} + #censored) / n, evaluated as exact
// integer counts with a single final division.
inline SurvivalCurve survival_from_steps(const StepHistogram& hist,
                                         double epsilon,
                                         std::vector<double> thresholds,
                                         std::string field_tag = {}) {
  if (!(std::isfinite(epsilon) && epsilon > 0.0))
    throw std::domain_error("epsilon must be finite and > 0");
  if (hist.total == 0)
    throw std::domain_error("survival needs at least one outcome");
  if (hist.hits.size() != hist.cap + 1)
    throw std::domain_error("histogram cap does not match its bins");
  if (thresholds.empty())
    throw std::domain_error("survival needs at least one threshold");

  const double censor =
      epsilon * static_cast<double>(hist.cap);
  double prev = 0.0;
  for (const double T : thresholds) {
    if (!(T > prev))
      throw std::domain_error("thresholds must be positive and strictly increasing");
    if (!(T <= censor))
      throw std::out_of_range("threshold T=" + std::to_string(T) +
                              " beyond censor limit " + std::to_string(censor));
    prev = T;
  }

  // ge[k] = outcomes with steps >= k; censored outcomes sit at the cap.
  std::vector<std::uint64_t> ge(hist.cap + 2, 0);
  ge[hist.cap + 1] = hist.censored;
  for (std::uint64_t k = hist.cap; k >= 1; --k) ge[k] = ge[k + 1] + hist.hits[k];

  SurvivalCurve c;
  c.thresholds = std::move(thresholds);
  c.n = hist.total;
  c.epsilon = epsilon;
  c.censor_limit = censor;
  c.field_tag = std::move(field_tag);
  c.count_ge.reserve(c.thresholds.size());
  c.survival.reserve(c.thresholds.size());
  for (const double T : c.thresholds) {
    const std::uint64_t k = detail::smallest_step_at_least(T, epsilon);
    const std::uint64_t count = ge[k];
    c.count_ge.push_back(count);
    c.survival.push_back(static_cast<double>(count) /
                         static_cast<double>(c.n));
  }
  return c;
}

namespace detail {

struct OlsFit {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
  std::size_t used = 0, dropped = 0;
};

// Unweighted least squares of log(survival) on x(T); zero-survival points
// are dropped (log undefined) and reported, never clamped.
inline OlsFit ols_log_tail(const SurvivalCurve& c, double lo, double hi,
                           bool log_x) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw std::domain_error("fit range needs T_lo < T_hi");
  if (!(hi <= c.censor_limit))
    throw std::domain_error("fit range extends beyond the censor limit");

  OlsFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    const double T = c.thresholds[i];
    if (T < lo || T > hi) continue;
    if (!(c.survival[i] > 0.0)) {
      ++fit.dropped;
      continue;
    }
    xs.push_back(log_x ? std::log(T) : T);
    ys.push_back(std::log(c.survival[i]));
  }
  if (xs.size() < 5)
    throw insufficient_data_error(
        "fit window holds " + std::to_string(xs.size()) +
        " usable points (" + std::to_string(fit.dropped) +
        " zero-survival dropped); need at least 5");

  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / static_cast<double>(n));
  fit.used = n;
  return fit;
}

}  // namespace detail

// survival ~ prefactor * T^param over [t_lo, t_hi], fitted in log-log space.
inline TailFit fit_power_tail(const SurvivalCurve& c, double t_lo,
                              double t_hi) {
  const auto r = detail::ols_log_tail(c, t_lo, t_hi, true);
  return {TailModel::power_law, r.slope,    std::exp(r.intercept), t_lo,
          t_hi,                 r.rms,      r.used,                r.dropped};
}

// survival ~ prefactor * exp(-param * T) over [t_lo, t_hi].
inline TailFit fit_exponential_tail(const SurvivalCurve& c, double t_lo,
                                    double t_hi) {
  const auto r = detail::ols_log_tail(c, t_lo, t_hi, false);
  return {TailModel::exponential, -r.slope,  std::exp(r.intercept), t_lo,
          t_hi,                   r.rms,     r.used,                r.dropped};
}

// max |survival_1 - survival_2| over the shared grid at T >= t_min.
inline double curve_sup_distance(const SurvivalCurve& a,
                                 const SurvivalCurve& b, double t_min) {
  std::vector<std::size_t> ia, ib;
  for (std::size_t i = 0; i < a.thresholds.size(); ++i)
    if (a.thresholds[i] >= t_min) ia.push_back(i);
  for (std::size_t i = 0; i < b.thresholds.size(); ++i)
    if (b.thresholds[i] >= t_min) ib.push_back(i);
  if (ia.size() != ib.size() || ia.empty())
    throw std::domain_error("curves do not share a threshold grid at T >= T_min");
  double sup = 0.0;
  for (std::size_t j = 0; j < ia.size(); ++j) {
    const double ta = a.thresholds[ia[j]];
    const double tb = b.thresholds[ib[j]];
    if (std::fabs(ta - tb) > 1e-9 * std::max(1.0, std::fabs(ta)))
      throw std::domain_error("curves do not share a threshold grid at T >= T_min");
    sup = std::max(sup, std::fabs(a.survival[ia[j]] - b.survival[ib[j]]));
  }
  return sup;
}

}  // namespace freepath
