#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "freepath/constants.hpp"
#include "freepath/errors.hpp"
#include "freepath/pointsets.hpp"
#include "freepath/rng.hpp"

namespace freepath {

struct SimConfig {
  double epsilon = 0.0;
  std::uint64_t n_trajectories = 0;
  double q0_span = 0.0;
  double v_max = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t max_steps = 0;

  // Cap at T_max = 50 scaled time units.
  static std::uint64_t default_max_steps(double epsilon) {
    if (!(std::isfinite(epsilon) && epsilon > 0.0))
      throw std::domain_error("epsilon must be finite and > 0");
    const double cap = std::ceil(50.0 / epsilon);
    if (!(cap < 0x1p62))
      throw std::domain_error("epsilon too small for the default step cap");
    return static_cast<std::uint64_t>(cap);
  }

  static SimConfig defaults(double epsilon, std::uint64_t n,
                            std::uint64_t seed) {
    const GoldenConstants k = golden_constants();
    SimConfig c;
    c.epsilon = epsilon;
    c.n_trajectories = n;
    c.q0_span = 1e4 * k.spacing;
    c.v_max = k.spacing;
    c.seed = seed;
    c.max_steps = default_max_steps(epsilon);
    return c;
  }

  double censor_limit() const {
    return epsilon * static_cast<double>(max_steps);
  }

  void validate() const {
    if (!(std::isfinite(epsilon) && epsilon > 0.0))
      throw std::domain_error("epsilon must be finite and > 0");
    if (n_trajectories < 1)
      throw std::domain_error("n_trajectories must be >= 1");
    if (!(std::isfinite(q0_span) && q0_span > 0.0))
      throw std::domain_error("q0_span must be finite and > 0");
    if (!(std::isfinite(v_max) && v_max > 0.0))
      throw std::domain_error("v_max must be finite and > 0");
    if (max_steps < 1) throw std::domain_error("max_steps must be >= 1");
  }
};

struct TrajectoryOutcome {
  std::uint64_t steps = 0;  // hitting step k, or the cap when censored
  bool censored = false;

  static TrajectoryOutcome hit(std::uint64_t k) { return {k, false}; }
  static TrajectoryOutcome censored_at(std::uint64_t cap) {
    return {cap, true};
  }
  bool operator==(const TrajectoryOutcome&) const = default;
};

// Exact counts per hitting step; hits[k] for k in [1, cap], index 0 unused.
struct StepHistogram {
  std::vector<std::uint64_t> hits;
  std::uint64_t censored = 0;
  std::uint64_t cap = 0;
  std::uint64_t total = 0;

  StepHistogram() = default;
  explicit StepHistogram(std::uint64_t cap_) : hits(cap_ + 1, 0), cap(cap_) {}

  void add(TrajectoryOutcome o) {
    if (o.censored)
      ++censored;
    else
      ++hits[o.steps];
    ++total;
  }

  void merge(const StepHistogram& other) {
    for (std::size_t k = 0; k < hits.size(); ++k) hits[k] += other.hits[k];
    censored += other.censored;
    total += other.total;
  }

  double censored_fraction() const {
    return total ? static_cast<double>(censored) / static_cast<double>(total)
                 : 0.0;
  }

  bool operator==(const StepHistogram&) const = default;
};

// (q0, v) for trajectory i: q0 uniform on [0, q0_span), v uniform on
// (0, v_max].  Pure in (seed, i); no generator state crosses trajectories.
inline std::pair<double, double> sample_trajectory_params(const SimConfig& cfg,
                                                          std::uint64_t i) {
  if (i >= cfg.n_trajectories)
    throw std::out_of_range("trajectory index beyond n_trajectories");
  const double q0 = cfg.q0_span * u01(hash3(cfg.seed, i, 0));
  const double v = cfg.v_max * (1.0 - u01(hash3(cfg.seed, i, 1)));
  return {q0, v};
}

namespace detail {

// Walkers keep the consecutive field points bracketing the trajectory,
// x_lo <= y < x_hi, so the per-step hit test needs no fresh point search.

struct ChainWalker {
  const ChainGeometry* g;
  std::int64_t m = 0;
  double x_lo = 0.0, x_hi = 0.0;

  explicit ChainWalker(const ChainGeometry& geom) : g(&geom) {}

  void seek(double y) {
    const double t = y * g->density();
    if (!(std::fabs(t) < static_cast<double>(kMaxChainIndex - 8)))
      throw std::out_of_range("trajectory beyond chain index range");
    m = std::llround(t);
    while (g->point(m) > y) --m;
    while (g->point(m + 1) <= y) ++m;
    x_lo = g->point(m);
    x_hi = g->point(m + 1);
  }

  void advance(double y) {
    while (x_hi <= y) {
      x_lo = x_hi;
      ++m;
      x_hi = g->point(m + 1);
    }
  }
};

struct PeriodicWalker {
  double sp;
  std::int64_t k = 0;
  double x_lo = 0.0, x_hi = 0.0;

  explicit PeriodicWalker(double spacing) : sp(spacing) {}

  void seek(double y) {
    const double t = y / sp;
    if (!(std::fabs(t) < 0x1p62))
      throw std::out_of_range("trajectory beyond periodic index range");
    k = std::llround(t);
    while (static_cast<double>(k) * sp > y) --k;
    while (static_cast<double>(k + 1) * sp <= y) ++k;
    x_lo = static_cast<double>(k) * sp;
    x_hi = static_cast<double>(k + 1) * sp;
  }

  void advance(double y) {
    while (x_hi <= y) {
      x_lo = x_hi;
      ++k;
      x_hi = static_cast<double>(k + 1) * sp;
    }
  }
};

struct PoissonWalker {
  const PoissonCells* f;
  std::int64_t cell = 0;
  std::vector<double> pts;      // points of `cell`
  std::size_t next_idx = 0;     // position of the point after x_hi in pts
  std::vector<double> scratch;  // left-neighbor scan buffer
  double x_lo = 0.0, x_hi = 0.0;

  explicit PoissonWalker(const PoissonCells& cells) : f(&cells) {}

  void seek(double y) {
    cell = f->cell_of(y);
    f->realize(cell, pts);
    const auto it = std::upper_bound(pts.begin(), pts.end(), y);
    if (it != pts.begin()) {
      x_lo = *(it - 1);
    } else {
      std::int64_t c = cell;
      do f->realize(--c, scratch);
      while (scratch.empty());
      x_lo = scratch.back();
    }
    next_idx = static_cast<std::size_t>(it - pts.begin());
    bump();
  }

  void advance(double y) {
    while (x_hi <= y) {
      x_lo = x_hi;
      bump();
    }
  }

  void bump() {
    while (next_idx >= pts.size()) {
      ++cell;
      f->realize(cell, pts);
      next_idx = 0;
    }
    x_hi = pts[next_idx++];
  }
};

// Jump dynamics: only landing points matter, so k is the first j in [1, cap]
// whose landing lies within eps/2 of a field point.
template <class Walker>
TrajectoryOutcome walk_free_path(Walker& w, double q0, double v, double eps,
                                 std::uint64_t cap) {
  const double half = 0.5 * eps;
  w.seek(q0);
  for (std::uint64_t j = 1; j <= cap; ++j) {
    const double y = q0 + static_cast<double>(j) * v;
    w.advance(y);
    if (y - w.x_lo <= half || w.x_hi - y <= half)
      return TrajectoryOutcome::hit(j);
  }
  return TrajectoryOutcome::censored_at(cap);
}

template <class Walker>
void run_span(const SimConfig& cfg, Walker& w, std::uint64_t i0,
              std::uint64_t i1, StepHistogram& h) {
  for (std::uint64_t i = i0; i < i1; ++i) {
    const auto [q0, v] = sample_trajectory_params(cfg, i);
    h.add(walk_free_path(w, q0, v, cfg.epsilon, cfg.max_steps));
  }
}

inline void run_span_dispatch(const SimConfig& cfg, const ScattererField& field,
                              std::uint64_t i0, std::uint64_t i1,
                              StepHistogram& h) {
  switch (field.kind()) {
    case ScattererField::Kind::fibonacci:
    case ScattererField::Kind::chain: {
      ChainWalker w(field.chain_geometry());
      run_span(cfg, w, i0, i1, h);
      break;
    }
    case ScattererField::Kind::periodic: {
      PeriodicWalker w(field.spacing());
      run_span(cfg, w, i0, i1, h);
      break;
    }
    case ScattererField::Kind::poisson: {
      PoissonWalker w(field.poisson_cells());
      run_span(cfg, w, i0, i1, h);
      break;
    }
  }
}

}  // namespace detail

inline TrajectoryOutcome free_path_steps(double q0, double v,
                                         const ScattererField& field,
                                         double eps, std::uint64_t cap) {
  detail::require_finite_position(q0);
  if (!(std::isfinite(v) && v > 0.0))
    throw std::domain_error("jump length v must be finite and > 0");
  if (!(std::isfinite(eps) && eps > 0.0))
    throw std::domain_error("eps must be finite and > 0");
  if (cap < 1) throw std::domain_error("step cap must be >= 1");
  switch (field.kind()) {
    case ScattererField::Kind::fibonacci:
    case ScattererField::Kind::chain: {
      detail::ChainWalker w(field.chain_geometry());
      return detail::walk_free_path(w, q0, v, eps, cap);
    }
    case ScattererField::Kind::periodic: {
      detail::PeriodicWalker w(field.spacing());
      return detail::walk_free_path(w, q0, v, eps, cap);
    }
    case ScattererField::Kind::poisson: {
      detail::PoissonWalker w(field.poisson_cells());
      return detail::walk_free_path(w, q0, v, eps, cap);
    }
  }
  return TrajectoryOutcome::censored_at(cap);
}

struct ChannelOutcome {
  TrajectoryOutcome outcome;
  double time = 0.0;  // sqrt(eps) * k / cos(theta); NaN when censored

  bool operator==(const ChannelOutcome&) const = default;
};

// 2-D channel reduction: a particle in the unit channel crossing one lattice
// line per step hits a disk of radius sqrt(eps)/2 exactly when its horizontal
// coordinate lands within sqrt(eps)/2 of an integer.
inline ChannelOutcome channel_free_path_2d(double q0, double theta, double eps,
                                           std::uint64_t cap) {
  if (!(q0 >= 0.0 && q0 < 1.0))
    throw std::domain_error("channel q0 must lie in [0, 1)");
  if (!(theta >= 0.0 && theta <= std::atan(1.0)))
    throw std::domain_error("channel theta must lie in [0, pi/4]");
  if (!(std::isfinite(eps) && eps > 0.0))
    throw std::domain_error("eps must be finite and > 0");
  if (cap < 1) throw std::domain_error("step cap must be >= 1");

  const double root = std::sqrt(eps);
  if (theta == 0.0) {
    // Vertical motion: the horizontal offset never changes.
    const double d = std::fabs(q0 - std::round(q0));
    if (d <= 0.5 * root) return {TrajectoryOutcome::hit(1), root};
    return {TrajectoryOutcome::censored_at(cap),
            std::numeric_limits<double>::quiet_NaN()};
  }
  detail::PeriodicWalker w(1.0);
  const TrajectoryOutcome out =
      detail::walk_free_path(w, q0, std::tan(theta), root, cap);
  if (out.censored)
    return {out, std::numeric_limits<double>::quiet_NaN()};
  return {out,
          root * static_cast<double>(out.steps) / std::cos(theta)};
}

// Runs all trajectories of the config against one shared field realization.
// The histogram is a pure function of (config, field): trajectories draw only
// from (seed, index) and the merge is an elementwise sum, so any thread count
// and any schedule produce identical output.
inline StepHistogram run_batch(const SimConfig& cfg,
                               const ScattererField& field,
                               unsigned threads = 0) {
  cfg.validate();
  if (cfg.max_steps > 100'000'000)
    throw resource_error("max_steps above 10^8 needs too much histogram memory");
  if (threads == 0) {
    threads = std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
  }

  const std::uint64_t n = cfg.n_trajectories;
  if (threads == 1) {
    StepHistogram h(cfg.max_steps);
    detail::run_span_dispatch(cfg, field, 0, n, h);
    return h;
  }

  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<StepHistogram> parts;
  parts.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) parts.emplace_back(cfg.max_steps);

  std::atomic<std::uint64_t> next_block{0};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          const std::uint64_t b = next_block.fetch_add(1);
          if (b >= blocks) break;
          const std::uint64_t i0 = b * kBlock;
          const std::uint64_t i1 = std::min(n, i0 + kBlock);
          detail::run_span_dispatch(cfg, field, i0, i1, parts[t]);
        }
      } catch (...) {
        const std::scoped_lock lock(error_mu);
        if (!first_error) first_error = std::current_exception();
        next_block.store(blocks);  // stop the other workers
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  StepHistogram result(cfg.max_steps);
  for (const auto& part : parts) result.merge(part);
  return result;
}

}  // namespace freepath
