// dcsim: two-crystal down-conversion interference simulator.
//
// Subcommands: coeffs, expa, expb, scan, timeline, oracle-check, mc.
// Exit codes: 0 success, 1 config/usage error, 2 invariant or tolerance
// violation.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dcsim/experiment.hpp"
#include "dcsim/fock_core.hpp"
#include "dcsim/io.hpp"
#include "dcsim/timeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitToleranceBreach = 2;

struct CommonOpts {
  std::string config_path;
  std::optional<double> sigma;
  std::optional<double> phi;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<std::string> out;
  bool degrees = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "path to JSON config file")
      ->required();
  cmd->add_option("--sigma", opts.sigma,
                  "override pair flight phase (radians, or degrees with --deg)");
  cmd->add_option("--phi", opts.phi,
                  "override relative pump phase (radians, or degrees with --deg)");
  cmd->add_option("--seed", opts.seed, "override RNG master seed");
  cmd->add_option("--duration", opts.duration,
                  "override simulated duration in seconds");
  cmd->add_option("--out", opts.out, "override output path ('-' for stdout)");
  cmd->add_flag("--deg", opts.degrees,
                "interpret --sigma/--phi overrides as degrees");
}

double angle_override(double value, bool degrees) {
  return degrees ? value * std::numbers::pi / 180.0 : value;
}

dcsim::RunConfig load_and_override(const CommonOpts& opts) {
  dcsim::RunConfig cfg = dcsim::load_config(opts.config_path);
  if (opts.sigma && cfg.experiment) {
    cfg.experiment->sigma = angle_override(*opts.sigma, opts.degrees);
    cfg.experiment->sigma_parts.reset();
  }
  if (opts.phi && cfg.experiment)
    cfg.experiment->phi = angle_override(*opts.phi, opts.degrees);
  if (opts.seed && cfg.timeline) cfg.timeline->seed = *opts.seed;
  if (opts.duration && cfg.timeline) cfg.timeline->duration = *opts.duration;
  if (opts.out) cfg.output.path = (*opts.out == "-") ? "" : *opts.out;
  return cfg;
}

void write_output(const dcsim::RunConfig& cfg, const std::string& text) {
  if (cfg.output.path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(cfg.output.path, std::ios::binary);
  if (!out) throw dcsim::IoError("cannot write " + cfg.output.path);
  out << text;
}

dcsim::DcCoefficients coeffs_from(const dcsim::RunConfig& cfg) {
  return dcsim::dc_coefficients(dcsim::build_coupling_table(
      cfg.crystal.etas, cfg.crystal.selected_index));
}

const dcsim::ExperimentSection& require_experiment(
    const dcsim::RunConfig& cfg) {
  if (!cfg.experiment)
    throw dcsim::ConfigError("experiment", "section required by this subcommand");
  return *cfg.experiment;
}

const dcsim::TimelineSection& require_timeline(const dcsim::RunConfig& cfg) {
  if (!cfg.timeline)
    throw dcsim::ConfigError("timeline", "section required by this subcommand");
  return *cfg.timeline;
}

int cmd_coeffs(const CommonOpts& opts) {
  const dcsim::RunConfig cfg = load_and_override(opts);
  write_output(cfg, dcsim::to_json(coeffs_from(cfg)).dump(2));
  return kExitOk;
}

int cmd_expa(const CommonOpts& opts) {
  const dcsim::RunConfig cfg = load_and_override(opts);
  const auto& exp = require_experiment(cfg);
  const auto rates = dcsim::experiment_a_rates(coeffs_from(cfg), exp.n0);
  write_output(cfg, dcsim::to_json(rates).dump(2));
  return kExitOk;
}

int cmd_expb(const CommonOpts& opts) {
  const dcsim::RunConfig cfg = load_and_override(opts);
  const auto& exp = require_experiment(cfg);
  dcsim::ExperimentConfig ecfg{coeffs_from(cfg), exp.n0, exp.sigma, exp.phi,
                               exp.sigma_parts};
  const dcsim::ExperimentBResult r = dcsim::run_experiment_b(ecfg);
  write_output(cfg, dcsim::to_json(r).dump(2));
  if (r.balance_residual > 1e-12 * exp.n0) {
    std::cerr << "balance residual " << r.balance_residual
              << " exceeds 1e-12 * n0\n";
    return kExitToleranceBreach;
  }
  return kExitOk;
}

int cmd_scan(const CommonOpts& opts) {
  const dcsim::RunConfig cfg = load_and_override(opts);
  const auto& exp = require_experiment(cfg);
  if (!cfg.scan)
    throw dcsim::ConfigError("scan", "section required by this subcommand");
  std::vector<double> grid;
  grid.reserve(cfg.scan->steps);
  const double span = cfg.scan->delta_max - cfg.scan->delta_min;
  for (std::size_t i = 0; i < cfg.scan->steps; ++i)
    grid.push_back(cfg.scan->delta_min +
                   span * static_cast<double>(i) /
                       static_cast<double>(std::max<std::size_t>(
                           cfg.scan->steps - 1, 1)));
  const auto points = dcsim::phase_scan(coeffs_from(cfg), exp.n0, grid);
  if (cfg.output.format == dcsim::OutputFormat::Csv)
    write_output(cfg, dcsim::scan_to_csv(points));
  else
    write_output(cfg, dcsim::scan_to_json(points).dump(2));
  return kExitOk;
}

int cmd_timeline(const CommonOpts& opts) {
  const dcsim::RunConfig cfg = load_and_override(opts);
  const auto& exp = require_experiment(cfg);
  const auto& tl = require_timeline(cfg);
  const dcsim::DcCoefficients coeffs = coeffs_from(cfg);
  dcsim::TimescaleParams params;
  params.q_e = 4.0 * exp.n0 * std::norm(coeffs.alpha_selected());
  params.tau_pcoh = tl.tau_pcoh;
  params.n_refr = tl.n_refr;
  params.d_max = tl.d_max;
  const dcsim::Timescales ts = dcsim::derive_timescales(params);
  const dcsim::TimelineRun run =
      dcsim::simulate_timeline(params, tl.duration, tl.seed);
  if (cfg.output.format == dcsim::OutputFormat::Csv) {
    write_output(cfg, dcsim::events_to_csv(run.events));
    dcsim::json stats{{"timescales", dcsim::to_json(ts)},
                      {"stats", dcsim::to_json(run.stats)}};
    std::cerr << stats.dump(2) << '\n';
  } else {
    dcsim::json events = dcsim::json::array();
    for (const dcsim::TimelineEvent& e : run.events)
      events.push_back(dcsim::json{{"t_start", e.t_start},
                                   {"duration", e.duration},
                                   {"origin", dcsim::to_string(e.origin)}});
    dcsim::json out{{"timescales", dcsim::to_json(ts)},
                    {"stats", dcsim::to_json(run.stats)},
                    {"events", events}};
    write_output(cfg, out.dump(2));
  }
  return kExitOk;
}

int cmd_oracle_check(const CommonOpts& opts, std::size_t random_tables,
                     std::size_t max_modes) {
  const dcsim::RunConfig cfg = load_and_override(opts);

  double worst = 0.0;
  auto check = [&worst](const dcsim::CouplingTable& table) {
    const dcsim::SectorUnitary closed =
        dcsim::closed_form_unitary(dcsim::dc_coefficients(table));
    const dcsim::SectorUnitary oracle = dcsim::brute_force_unitary(table);
    const double dev = (closed - oracle).cwiseAbs().maxCoeff();
    if (dev > worst) worst = dev;
  };

  check(dcsim::build_coupling_table(cfg.crystal.etas,
                                    cfg.crystal.selected_index));

  std::mt19937_64 rng(cfg.timeline ? cfg.timeline->seed : 12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < random_tables; ++i) {
    const std::size_t m = 1 + rng() % max_modes;
    std::vector<dcsim::Complex> etas(m);
    double sum_sq = 0.0;
    for (auto& e : etas) {
      e = dcsim::Complex(unit(rng) - 0.5, unit(rng) - 0.5);
      sum_sq += std::norm(e);
    }
    const double xi_target = 0.05 + 1.45 * unit(rng);
    const double scale = xi_target / std::sqrt(sum_sq);
    for (auto& e : etas) e *= scale;
    check(dcsim::build_coupling_table(std::move(etas), rng() % m));
  }

  std::cout << "max |closed_form - exponential| = " << worst << '\n';
  if (worst > 1e-10) {
    std::cerr << "oracle deviation exceeds 1e-10\n";
    return kExitToleranceBreach;
  }
  return kExitOk;
}

int cmd_mc(const CommonOpts& opts) {
  const dcsim::RunConfig cfg = load_and_override(opts);
  const auto& exp = require_experiment(cfg);
  const auto& tl = require_timeline(cfg);
  const dcsim::McResult r = dcsim::coincidence_monte_carlo(
      coeffs_from(cfg), exp.n0, exp.sigma, exp.phi, tl.duration, tl.seed);
  write_output(cfg, dcsim::to_json(r).dump(2));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-crystal down-conversion interference simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::size_t random_tables = 0;
  std::size_t max_modes = 20;

  CLI::App* coeffs = app.add_subcommand(
      "coeffs", "emit the crystal coefficients beta, alpha, gamma");
  add_common(coeffs, opts);

  CLI::App* expa = app.add_subcommand(
      "expa", "Experiment A coincidence rates");
  add_common(expa, opts);

  CLI::App* expb = app.add_subcommand(
      "expb", "Experiment B channel probabilities, rates, balance residual");
  add_common(expb, opts);

  CLI::App* scan = app.add_subcommand(
      "scan", "interference fringe over Delta = sigma - phi");
  add_common(scan, opts);

  CLI::App* timeline = app.add_subcommand(
      "timeline", "stochastic pair-occupancy timeline and overlap statistics");
  add_common(timeline, opts);

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "compare closed-form unitary against the matrix "
                      "exponential; exit 2 on deviation > 1e-10");
  add_common(oracle, opts);
  oracle->add_option("--random-tables", random_tables,
                     "additional random coupling tables to check");
  oracle->add_option("--max-modes", max_modes,
                     "mode-count upper bound for random tables");

  CLI::App* mc = app.add_subcommand(
      "mc", "Monte Carlo coincidence counting against the analytic rates");
  add_common(mc, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints usage or the error message
    return code == 0 ? 0 : 64;    // EX_USAGE for bad flags/subcommands
  }

  try {
    if (coeffs->parsed()) return cmd_coeffs(opts);
    if (expa->parsed()) return cmd_expa(opts);
    if (expb->parsed()) return cmd_expb(opts);
    if (scan->parsed()) return cmd_scan(opts);
    if (timeline->parsed()) return cmd_timeline(opts);
    if (oracle->parsed()) return cmd_oracle_check(opts, random_tables, max_modes);
    if (mc->parsed()) return cmd_mc(opts);
  } catch (const dcsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const dcsim::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const dcsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitConfigError;
}
