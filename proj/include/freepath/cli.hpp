#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <new>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "freepath/constants.hpp"
#include "freepath/errors.hpp"
#include "freepath/io.hpp"
#include "freepath/pointsets.hpp"
#include "freepath/simulate.hpp"
#include "freepath/stats.hpp"

namespace freepath {

// Obstacle realization and trajectory sampling stay independent streams:
// the poisson field seed defaults to the run seed xor a fixed word.
inline constexpr std::uint64_t kPoissonSeedSalt = 0xd1b54a32d192ed03ULL;

struct FieldOptions {
  std::string kind = "fibonacci";
  double slope = 0.0;      // chain; 0 selects the golden ratio
  double spacing = 0.0;    // periodic; 0 selects nu/tau^2
  double intensity = 0.0;  // poisson; 0 selects tau^2/nu
  double cell_size = 0.0;  // poisson; 0 selects 1/intensity
  std::optional<std::uint64_t> field_seed;  // poisson; default seed^salt
};

inline ScattererField make_field(const FieldOptions& o,
                                 std::uint64_t run_seed) {
  const GoldenConstants k = golden_constants();
  if (o.kind == "fibonacci") return ScattererField::fibonacci();
  if (o.kind == "chain")
    return ScattererField::chain(o.slope == 0.0 ? k.tau : o.slope);
  if (o.kind == "periodic")
    return ScattererField::periodic(o.spacing == 0.0 ? k.spacing : o.spacing);
  if (o.kind == "poisson") {
    const std::uint64_t fs =
        o.field_seed ? *o.field_seed : (run_seed ^ kPoissonSeedSalt);
    return ScattererField::poisson(
        o.intensity == 0.0 ? k.alpha : o.intensity, fs, o.cell_size);
  }
  throw std::domain_error("unknown field kind '" + o.kind + "'");
}

// Exit codes: 0 success, 2 configuration error, 3 resource or I/O error.
template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const resource_error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

struct PointsOptions {
  FieldOptions field;
  double from = 0.0;
  double to = 0.0;
  std::uint64_t seed = 1;
  std::string out;  // empty writes to the stream passed in
};

inline int run_points(const PointsOptions& o, std::ostream& out_stream,
                      std::ostream& err) {
  return guarded(err, [&] {
    const ScattererField f = make_field(o.field, o.seed);
    const std::vector<double> pts = enumerate_points(f, o.from, o.to);
    std::string text;
    for (const double p : pts) {
      text += format_sig(p);
      text += '\n';
    }
    if (o.out.empty())
      out_stream << text;
    else
      atomic_write(o.out, text);
    return 0;
  });
}

namespace detail {

inline SimConfig resolve_config(double epsilon, std::uint64_t n,
                                std::uint64_t seed, std::uint64_t max_steps,
                                double q0_span, double v_max) {
  SimConfig cfg = SimConfig::defaults(epsilon, n, seed);
  if (max_steps != 0) cfg.max_steps = max_steps;
  if (q0_span != 0.0) cfg.q0_span = q0_span;
  if (v_max != 0.0) cfg.v_max = v_max;
  cfg.validate();
  return cfg;
}

inline std::vector<double> default_grid(const SimConfig& cfg,
                                        std::size_t bins) {
  return default_thresholds(0.05, 0.8 * cfg.censor_limit(), bins);
}

// Default fit window [0.5, min(hi_cap, 0.5*censor_limit)].
inline std::pair<double, double> fit_window(const SimConfig& cfg, double lo,
                                            double hi, double hi_cap) {
  if (lo == 0.0) lo = 0.5;
  if (hi == 0.0) hi = std::min(hi_cap, 0.5 * cfg.censor_limit());
  return {lo, hi};
}

inline nlohmann::ordered_json fit_or_reason(const SurvivalCurve& curve,
                                            TailModel model, double lo,
                                            double hi) {
  try {
    const TailFit fit = model == TailModel::power_law
                            ? fit_power_tail(curve, lo, hi)
                            : fit_exponential_tail(curve, lo, hi);
    return fit_json(fit);
  } catch (const insufficient_data_error& e) {
    nlohmann::ordered_json j;
    j["skipped"] = e.what();
    return j;
  }
}

}  // namespace detail

struct SimulateOptions {
  FieldOptions field;
  double epsilon = 0.0;
  std::uint64_t n = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t max_steps = 0;  // 0 selects ceil(50/epsilon)
  double q0_span = 0.0;         // 0 selects 10^4 * nu/tau^2
  double v_max = 0.0;           // 0 selects nu/tau^2
  unsigned threads = 0;         // 0 selects hardware concurrency
  std::size_t grid_bins = 64;
  double fit_lo = 0.0;  // 0 selects the default window
  double fit_hi = 0.0;
  std::string out;  // CSV path; empty selects <tag>_eps<epsilon>.csv
};

inline int run_simulate(const SimulateOptions& o, std::ostream& err) {
  return guarded(err, [&] {
    const SimConfig cfg = detail::resolve_config(
        o.epsilon, o.n, o.seed, o.max_steps, o.q0_span, o.v_max);
    const ScattererField field = make_field(o.field, o.seed);
    const std::string tag{field.tag()};

    const StepHistogram hist = run_batch(cfg, field, o.threads);
    const SurvivalCurve curve = survival_from_steps(
        hist, cfg.epsilon, detail::default_grid(cfg, o.grid_bins), tag);

    const std::filesystem::path csv_path(
        o.out.empty() ? tag + "_eps" + format_sig(cfg.epsilon) + ".csv"
                      : o.out);
    write_survival_csv(csv_path, curve);

    const TailModel model = field.kind() == ScattererField::Kind::poisson
                                ? TailModel::exponential
                                : TailModel::power_law;
    const auto [lo, hi] = detail::fit_window(
        cfg, o.fit_lo, o.fit_hi,
        model == TailModel::power_law ? 5.0 : 3.0);

    nlohmann::ordered_json j;
    j["field"] = tag;
    j["epsilon"] = cfg.epsilon;
    j["n"] = cfg.n_trajectories;
    j["seed"] = cfg.seed;
    j["censored"] = hist.censored;
    j["censor_limit"] = cfg.censor_limit();
    j["max_steps"] = cfg.max_steps;
    j["q0_span"] = cfg.q0_span;
    j["v_max"] = cfg.v_max;
    j["csv"] = csv_path.filename().string();
    j["fit"] = detail::fit_or_reason(curve, model, lo, hi);

    std::filesystem::path json_path = csv_path;
    json_path.replace_extension(".json");
    atomic_write(json_path, j.dump(2) + "\n");
    return 0;
  });
}

struct CompareOptions {
  std::vector<double> epsilons;      // empty selects {1e-3}
  std::vector<std::string> fields;   // empty selects all three standard fields
  std::uint64_t n = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t max_steps = 0;
  unsigned threads = 0;
  std::size_t grid_bins = 64;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  std::string out_dir = ".";
};

// Matched-density comparison: fibonacci vs periodic spacing nu/tau^2 vs
// poisson intensity tau^2/nu, one CSV per (field, epsilon) on a shared grid,
// fits and cross-epsilon sup-distances collected in manifest.json.
inline int run_compare(const CompareOptions& o, std::ostream& err) {
  return guarded(err, [&] {
    const auto t_start = std::chrono::steady_clock::now();
    const std::vector<double> epsilons =
        o.epsilons.empty() ? std::vector<double>{1e-3} : o.epsilons;
    const std::vector<std::string> kinds =
        o.fields.empty()
            ? std::vector<std::string>{"fibonacci", "periodic", "poisson"}
            : o.fields;

    for (const double eps : epsilons)
      detail::resolve_config(eps, o.n, o.seed, o.max_steps, 0.0, 0.0);
    for (const std::string& kind : kinds) {
      FieldOptions fo;
      fo.kind = kind;
      make_field(fo, o.seed);
    }

    const std::filesystem::path dir(o.out_dir);
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    nlohmann::ordered_json fits;
    nlohmann::ordered_json sups;
    nlohmann::ordered_json config;
    config["epsilons"] = epsilons;
    config["n"] = o.n;
    config["seed"] = o.seed;
    config["grid_bins"] = o.grid_bins;

    for (const std::string& kind : kinds) {
      FieldOptions fo;
      fo.kind = kind;
      const ScattererField field = make_field(fo, o.seed);
      const std::string tag{field.tag()};
      std::vector<SurvivalCurve> curves;

      for (const double eps : epsilons) {
        const SimConfig cfg = detail::resolve_config(eps, o.n, o.seed,
                                                     o.max_steps, 0.0, 0.0);
        const StepHistogram hist = run_batch(cfg, field, o.threads);
        curves.push_back(survival_from_steps(
            hist, cfg.epsilon, detail::default_grid(cfg, o.grid_bins), tag));
        const SurvivalCurve& curve = curves.back();

        const std::string name = tag + "_eps" + format_sig(eps) + ".csv";
        write_survival_csv(dir / name, curve);
        files.push_back({{"field", tag},
                         {"epsilon", eps},
                         {"n", cfg.n_trajectories},
                         {"censor_limit", cfg.censor_limit()},
                         {"path", name}});

        const auto [plo, phi] = detail::fit_window(cfg, o.fit_lo, o.fit_hi, 5.0);
        const auto [elo, ehi] = detail::fit_window(cfg, o.fit_lo, o.fit_hi, 3.0);
        nlohmann::ordered_json entry;
        entry["power_law"] =
            detail::fit_or_reason(curve, TailModel::power_law, plo, phi);
        entry["exponential"] =
            detail::fit_or_reason(curve, TailModel::exponential, elo, ehi);
        fits[tag][format_sig(eps)] = std::move(entry);
      }

      for (std::size_t i = 0; i + 1 < curves.size(); ++i) {
        nlohmann::ordered_json d;
        d["epsilon_pair"] = {epsilons[i], epsilons[i + 1]};
        d["t_min"] = 0.5;
        try {
          d["value"] = curve_sup_distance(curves[i], curves[i + 1], 0.5);
        } catch (const std::domain_error& e) {
          d["value"] = nullptr;
          d["skipped"] = e.what();
        }
        sups[tag].push_back(std::move(d));
      }
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    nlohmann::ordered_json manifest;
    manifest["config"] = std::move(config);
    manifest["fields"] = kinds;
    manifest["output_dir"] = dir.string();
    manifest["emitted_files"] = std::move(files);
    manifest["fits"] = std::move(fits);
    manifest["sup_distance"] = std::move(sups);
    manifest["wall_time"] = wall;
    atomic_write(dir / "manifest.json", manifest.dump(2) + "\n");
    return 0;
  });
}

}  // namespace freepath
