#pragma once

// Declarative scenarios: JSON config -> RingSystem + pump + grids, pipeline
// execution, and the CSV / JSON artifacts consumed by the plotting scripts.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ringsfwm/core_model.hpp"
#include "ringsfwm/grid.hpp"
#include "ringsfwm/perturbative.hpp"
#include "ringsfwm/propagator.hpp"
#include "ringsfwm/pump.hpp"

namespace ringsfwm::cli {

using json = nlohmann::ordered_json;

/// Bad or missing config field; `field` is a JSON pointer.
class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : "field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

enum class Pipeline { perturbative, propagator, both };

Pipeline parse_pipeline(const std::string& s);
const char* to_string(Pipeline p) noexcept;

struct GridRequest {
  std::size_t n_points = 256;
  std::optional<double> half_width;  ///< rad/m
  std::size_t time_points = 2048;
  std::optional<double> t_start;     ///< s
  std::optional<double> t_end;       ///< s
  std::size_t rk4_substeps = 1;
};

struct Tolerances {
  double ratio = 5e-3;
  double resolution = 1e-2;
  double time_resolution = 1e-2;
  double quadrature = 1e-10;
};

struct Scenario {
  std::string name;
  RingParams params;
  PumpSpec pump = PumpSpec::gaussian(0.0, 1e-10);
  GridRequest grid;
  Pipeline pipeline = Pipeline::perturbative;
  Tolerances tol;
  bool diagnostics = false;
  json source;  ///< the parsed document, echoed into observables.json
};

Scenario parse_scenario(const json& doc);
/// Throws ConfigError with line/column on malformed JSON.
json read_json_file(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

/// Caches pump-pair functions across runs that share pump and grid.
class PairFunctionCache {
public:
  std::shared_ptr<const PumpPairFunction> get(const std::string& key) const;
  void put(const std::string& key, std::shared_ptr<const PumpPairFunction> f);
  std::size_t hits() const noexcept { return hits_; }

private:
  std::map<std::string, std::shared_ptr<const PumpPairFunction>> entries_;
  mutable std::size_t hits_ = 0;
};

struct PathComparison {
  double peak_deviation = 0.0;  ///< | max|S_td| - max|S_pt| | / max|S_pt|
  double l2_deviation = 0.0;    ///< ||S_td - S_pt|| / ||S_pt||
};

struct ScenarioResult {
  explicit ScenarioResult(RingSystem sys) : system(std::move(sys)) {}

  RingSystem system;
  SpectralGrid signal_axis;
  SpectralGrid idler_axis;
  ComplexGrid pair;     ///< the pipeline's primary pair amplitude
  RealGrid jsi;         ///< normalized |pair|^2
  PairObservables observables;
  std::optional<ComplexGrid> pair_time_domain;
  std::optional<PathComparison> comparison;
  std::optional<SchmidtResult> time_domain_schmidt;
  std::optional<TimeDomainRun> time_domain;
  std::optional<TimeGrid> time_grid;
  double pump_support = 0.0;
  std::vector<std::string> flags;
};

SpectralGrid resolve_spectral_grid(const Scenario& s, const RingSystem& sys);
TimeGrid resolve_time_grid(const Scenario& s, const RingSystem& sys);

ScenarioResult run(const Scenario& s, PairFunctionCache* cache = nullptr);

/// jsi.csv, pair_amplitude.csv, observables.json (+ diagnostics files).
void write_outputs(const Scenario& s, const ScenarioResult& r, const std::filesystem::path& dir);

json observables_json(const Scenario& s, const ScenarioResult& r);

struct SweepSpec {
  std::vector<std::string> parameters;  ///< JSON pointers, all set to the same value
  std::vector<double> values;
};

SweepSpec parse_sweep(const json& doc);

struct SweepRow {
  double value = 0.0;
  PairObservables observables;
};

/// One run per value. The spectral grid is fixed across the sweep (widest
/// default of any point, unless given), so pump-pair functions are reused
/// when only signal/idler damping changes.
std::vector<SweepRow> run_sweep(const json& doc, const std::optional<std::size_t>& grid_n,
                                const std::optional<double>& tol, std::size_t* cache_hits = nullptr);

void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, const std::filesystem::path& file);

/// "%.17g"
std::string format_double(double x);

void write_grid_csv(const std::filesystem::path& file, const RealGrid& g, const std::string& title,
                    double v_signal, double v_idler);
void write_complex_grid_csv(const std::filesystem::path& file, const ComplexGrid& g, const std::string& title,
                            double v_signal, double v_idler);

}  // namespace ringsfwm::cli
