#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "ringsfwm/errors.hpp"
#include "ringsfwm/parallel.hpp"
#include "scenario.hpp"

namespace {

using namespace ringsfwm;
using namespace ringsfwm::cli;

enum Exit { ok = 0, failure = 1, config_failure = 2, numeric_failure = 3 };

struct CommonFlags {
  std::string out = ".";
  std::optional<std::size_t> grid_n;
  std::optional<std::string> pipeline;
  std::optional<double> tol;
  bool diagnostics = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
  cmd->add_option("--grid-n", f.grid_n, "Spectral grid points per axis")->check(CLI::Range(8, 1 << 16));
  cmd->add_option("--pipeline", f.pipeline, "perturbative | propagator | both")
      ->check(CLI::IsMember({"perturbative", "propagator", "both"}));
  cmd->add_option("--tol", f.tol, "Relative tolerance of the numeric vs closed-form singles ratio")
      ->check(CLI::PositiveNumber);
}

int cmd_run(const std::string& config, const CommonFlags& f) {
  Scenario s = load_scenario(config);
  if (f.grid_n) s.grid.n_points = *f.grid_n;
  if (f.pipeline) s.pipeline = parse_pipeline(*f.pipeline);
  if (f.tol) s.tol.ratio = *f.tol;
  if (f.diagnostics) s.diagnostics = true;
  const auto result = run(s);
  write_outputs(s, result, f.out);

  const auto& o = result.observables;
  std::printf("%s: pipeline=%s grid=%zu threads=%zu\n", s.name.c_str(), to_string(s.pipeline), s.grid.n_points,
              thread_count());
  if (o.ratio) {
    std::printf("  r = %.6g (closed form %.6g, relative deviation %.3g)\n", *o.ratio, o.ratio_formula,
                o.ratio_deviation.value_or(0.0));
  } else {
    std::printf("  r undefined (no pairs); closed form %.6g\n", o.ratio_formula);
  }
  if (o.schmidt_K) std::printf("  Schmidt K = %.6g, purity = %.6g\n", *o.schmidt_K, *o.purity);
  if (result.comparison) {
    std::printf("  time-domain vs perturbative: peak %.3g, L2 %.3g\n", result.comparison->peak_deviation,
                result.comparison->l2_deviation);
  }
  for (const auto& flag : result.flags) std::printf("  note: %s\n", flag.c_str());
  std::printf("  wrote %s\n", f.out.c_str());
  return ok;
}

int cmd_sweep(const std::string& config, const CommonFlags& f) {
  const json doc = read_json_file(config);
  const SweepSpec spec = parse_sweep(doc);
  std::size_t hits = 0;
  const auto rows = run_sweep(doc, f.grid_n, f.tol, &hits);
  std::filesystem::create_directories(f.out);
  const auto file = std::filesystem::path(f.out) / "sweep.csv";
  write_sweep_csv(spec, rows, file);
  std::printf("sweep: %zu points, %zu cached pump-pair functions reused, wrote %s\n", rows.size(), hits,
              file.string().c_str());
  return ok;
}

int cmd_estimate(const MaterialEstimate& m) {
  const auto c = estimate_nonlinear_couplings(m);
  json j;
  j["lambda_rad_per_s"] = c.lambda;
  j["eta_rad_per_s"] = c.eta;
  j["zeta_rad_per_s"] = c.zeta;
  std::cout << j.dump(2) << '\n';
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-pair generation in a lossy microring: joint spectra and heralding ratios"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags;
  std::string run_config, sweep_config;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write jsi.csv, pair_amplitude.csv, observables.json");
  run_cmd->add_option("config", run_config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  add_common(run_cmd, run_flags);
  run_cmd->add_flag("--diagnostics", run_flags.diagnostics, "Write propagator diagnostics");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one scalar field and write sweep.csv");
  sweep_cmd->add_option("config", sweep_config, "Scenario JSON with a \"sweep\" block")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(sweep_cmd, sweep_flags);

  MaterialEstimate m;
  auto* est_cmd = app.add_subcommand("estimate", "Estimate lambda, eta, zeta from material parameters");
  est_cmd->add_option("--chi3", m.chi3, "chi(3), m^2/V^2")->required();
  est_cmd->add_option("--n", m.n, "Refractive index")->required();
  est_cmd->add_option("--mode-volume", m.mode_volume, "Ring mode volume, m^3")->required();
  est_cmd->add_option("--omega-pump", m.omega_pump, "Pump angular frequency, rad/s")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run_config, run_flags);
    if (*sweep_cmd) return cmd_sweep(sweep_config, sweep_flags);
    if (*est_cmd) return cmd_estimate(m);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return config_failure;
  } catch (const InvalidParameter& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return config_failure;
  } catch (const AccuracyError& e) {
    std::fprintf(stderr, "accuracy error: %s (best estimate %.6g, error %.3g)\n", e.what(), e.best_estimate(),
                 e.error_estimate());
    return numeric_failure;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return numeric_failure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return failure;
  }
  return failure;
}
