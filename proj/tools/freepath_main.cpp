// Command-line driver for the free-path toolkit: point dumps, single-field
// survival runs, and the matched-density three-field comparison.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freepath/cli.hpp"

namespace {

void add_field_flags(CLI::App* cmd, freepath::FieldOptions* field,
                     std::uint64_t* field_seed_storage) {
  cmd->add_option("--field", field->kind, "fibonacci | chain | periodic | poisson")
      ->check(CLI::IsMember({"fibonacci", "chain", "periodic", "poisson"}));
  cmd->add_option("--slope", field->slope, "chain slope (> 1); 0 = golden ratio");
  cmd->add_option("--spacing", field->spacing,
                  "periodic spacing; 0 = nu/tau^2");
  cmd->add_option("--intensity", field->intensity,
                  "poisson intensity; 0 = tau^2/nu");
  cmd->add_option("--cell-size", field->cell_size,
                  "poisson cell width; 0 = 1/intensity");
  cmd->add_option("--field-seed", *field_seed_storage,
                  "poisson realization seed; default = seed xor fixed salt");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "free-path statistics of a particle jumping along quasiperiodic, "
      "periodic, or Poisson scatterer fields"};
  app.require_subcommand(1);

  freepath::PointsOptions points;
  std::uint64_t points_field_seed = 0;
  CLI::App* cmd_points =
      app.add_subcommand("points", "dump field points in [from, to)");
  add_field_flags(cmd_points, &points.field, &points_field_seed);
  cmd_points->add_option("--from", points.from, "interval start")->required();
  cmd_points->add_option("--to", points.to, "interval end (exclusive)")
      ->required();
  cmd_points->add_option("--seed", points.seed, "run seed (poisson fields)");
  cmd_points->add_option("--out", points.out, "output file; default stdout");

  freepath::SimulateOptions sim;
  std::uint64_t sim_field_seed = 0;
  CLI::App* cmd_simulate = app.add_subcommand(
      "simulate", "run one field and write survival CSV + JSON summary");
  add_field_flags(cmd_simulate, &sim.field, &sim_field_seed);
  cmd_simulate->add_option("--epsilon", sim.epsilon, "obstacle width parameter")
      ->required();
  cmd_simulate->add_option("--n", sim.n, "trajectory count");
  cmd_simulate->add_option("--seed", sim.seed, "run seed");
  cmd_simulate->add_option("--max-steps", sim.max_steps,
                           "censoring cap; 0 = ceil(50/epsilon)");
  cmd_simulate->add_option("--q0-span", sim.q0_span,
                           "initial position interval length; 0 = default");
  cmd_simulate->add_option("--v-max", sim.v_max,
                           "jump length upper bound; 0 = default");
  cmd_simulate->add_option("--threads", sim.threads,
                           "worker threads; 0 = hardware");
  cmd_simulate->add_option("--grid-bins", sim.grid_bins,
                           "survival grid size");
  cmd_simulate->add_option("--fit-lo", sim.fit_lo, "fit window start; 0 = default");
  cmd_simulate->add_option("--fit-hi", sim.fit_hi, "fit window end; 0 = default");
  cmd_simulate->add_option("--out", sim.out,
                           "CSV path; default <field>_eps<epsilon>.csv");

  freepath::CompareOptions cmp;
  CLI::App* cmd_compare = app.add_subcommand(
      "compare", "run fibonacci/periodic/poisson at matched density");
  cmd_compare
      ->add_option("--epsilons", cmp.epsilons,
                   "comma-separated epsilon list; default 1e-3")
      ->delimiter(',');
  cmd_compare
      ->add_option("--field", cmp.fields,
                   "restrict to these fields (repeatable)")
      ->check(CLI::IsMember({"fibonacci", "chain", "periodic", "poisson"}));
  cmd_compare->add_option("--n", cmp.n, "trajectory count per run");
  cmd_compare->add_option("--seed", cmp.seed, "run seed");
  cmd_compare->add_option("--max-steps", cmp.max_steps,
                          "censoring cap; 0 = ceil(50/epsilon)");
  cmd_compare->add_option("--threads", cmp.threads,
                          "worker threads; 0 = hardware");
  cmd_compare->add_option("--grid-bins", cmp.grid_bins, "survival grid size");
  cmd_compare->add_option("--fit-lo", cmp.fit_lo, "fit window start; 0 = default");
  cmd_compare->add_option("--fit-hi", cmp.fit_hi, "fit window end; 0 = default");
  cmd_compare->add_option("--out-dir", cmp.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (cmd_points->parsed()) {
    if (cmd_points->count("--field-seed") > 0)
      points.field.field_seed = points_field_seed;
    return freepath::run_points(points, std::cout, std::cerr);
  }
  if (cmd_simulate->parsed()) {
    if (cmd_simulate->count("--field-seed") > 0)
      sim.field.field_seed = sim_field_seed;
    return freepath::run_simulate(sim, std::cerr);
  }
  if (cmd_compare->parsed()) {
    return freepath::run_compare(cmp, std::cerr);
  }
  return 2;
}
