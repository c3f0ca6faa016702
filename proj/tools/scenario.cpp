#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ringsfwm/errors.hpp"

namespace ringsfwm::cli {

namespace fs = std::filesystem;

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(child(path, key), "missing");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "not finite");
  return x;
}

double number(const json& obj, const std::string& key, const std::string& path) {
  return as_number(require(obj, key, path), child(path, key));
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, child(path, key));
}

// number, or [re, im]
cplx as_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {as_number(j, path), 0.0};
  if (j.is_array() && j.size() == 2) return {as_number(j[0], path + "/0"), as_number(j[1], path + "/1")};
  throw ConfigError(path, "expected a number or [re, im]");
}

cplx complex_or(const json& obj, const std::string& key, const std::string& path, cplx fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_complex(*it, child(path, key));
}

std::size_t count_or(const json& obj, const std::string& key, const std::string& path, std::size_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() <= 0) {
    throw ConfigError(child(path, key), "expected a positive integer");
  }
  return it->get<std::size_t>();
}

std::optional<double> optional_number(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return as_number(*it, child(path, key));
}

ModeParams parse_mode(const json& j, const std::string& path) {
  const double v = number(j, "v_m_per_s", path);
  return ModeParams::from_rates(number(j, "omega_rad_per_s", path), v, number_or(j, "u_m_per_s", path, v),
                                number(j, "coupling_rate_per_s", path), number_or(j, "loss_rate_per_s", path, 0.0),
                                number_or(j, "gamma_phase_rad", path, 0.0), number_or(j, "mu_phase_rad", path, 0.0));
}

PumpSpec parse_pump(const json& j, const std::string& path) {
  const auto shape = j.value("shape", std::string("gaussian"));
  try {
    if (shape == "gaussian") {
      return PumpSpec::gaussian(as_complex(require(j, "amplitude_sqrt_m", path), child(path, "amplitude_sqrt_m")),
                                number(j, "duration_s", path));
    }
    if (shape == "tabulated") {
      const auto& samples = require(j, "samples_sqrt_m", path);
      if (!samples.is_array()) throw ConfigError(child(path, "samples_sqrt_m"), "expected an array");
      std::vector<cplx> values;
      for (std::size_t k = 0; k < samples.size(); ++k) {
        values.push_back(as_complex(samples[k], child(path, "samples_sqrt_m/" + std::to_string(k))));
      }
      if (values.size() < 8) throw ConfigError(child(path, "samples_sqrt_m"), "need at least 8 samples");
      return PumpSpec::tabulated(SpectralGrid(number(j, "half_width_rad_per_m", path), values.size()),
                                 std::move(values));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(child(path, "shape"), "expected \"gaussian\" or \"tabulated\"");
}

}  // namespace

Pipeline parse_pipeline(const std::string& s) {
  if (s == "perturbative") return Pipeline::perturbative;
  if (s == "propagator") return Pipeline::propagator;
  if (s == "both") return Pipeline::both;
  throw ConfigError("/pipeline", "expected perturbative, propagator or both, got \"" + s + "\"");
}

const char* to_string(Pipeline p) noexcept {
  switch (p) {
    case Pipeline::perturbative: return "perturbative";
    case Pipeline::propagator: return "propagator";
    case Pipeline::both: return "both";
  }
  return "?";
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  Scenario s;
  s.source = doc;
  s.name = "scenario";
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("/name", "expected a string");
    s.name = it->get<std::string>();
  }

  const auto& modes = require(doc, "modes", "");
  for (Field f : all_fields) {
    s.params.mode(f) = parse_mode(require(modes, to_string(f), "/modes"), child("/modes", to_string(f)));
  }

  if (auto it = doc.find("nonlinear"); it != doc.end()) {
    const std::string path = "/nonlinear";
    if (auto m = it->find("material"); m != it->end()) {
      const std::string mp = child(path, "material");
      MaterialEstimate est;
      est.chi3 = number(*m, "chi3_m2_per_V2", mp);
      est.n = number(*m, "refractive_index", mp);
      est.mode_volume = number(*m, "mode_volume_m3", mp);
      est.omega_pump = number_or(*m, "omega_pump_rad_per_s", mp, s.params.pump.omega);
      try {
        const auto c = estimate_nonlinear_couplings(est);
        s.params.lambda = c.lambda;
        s.params.eta = c.eta;
        s.params.zeta = c.zeta;
      } catch (const Error& e) {
        throw ConfigError(mp, e.what());
      }
    }
    s.params.lambda = complex_or(*it, "lambda_rad_per_s", path, s.params.lambda);
    s.params.eta = number_or(*it, "eta_rad_per_s", path, s.params.eta);
    s.params.zeta = complex_or(*it, "zeta_rad_per_s", path, s.params.zeta);
  } else {
    s.params.lambda = 1.0;
  }

  s.pump = parse_pump(require(doc, "pump", ""), "/pump");

  if (auto it = doc.find("grid"); it != doc.end()) {
    const std::string path = "/grid";
    s.grid.n_points = count_or(*it, "n_points", path, s.grid.n_points);
    s.grid.half_width = optional_number(*it, "half_width_rad_per_m", path);
    s.grid.time_points = count_or(*it, "time_points", path, s.grid.time_points);
    s.grid.t_start = optional_number(*it, "t_start_s", path);
    s.grid.t_end = optional_number(*it, "t_end_s", path);
    s.grid.rk4_substeps = count_or(*it, "rk4_substeps", path, s.grid.rk4_substeps);
  }
  if (s.grid.n_points < 8) throw ConfigError("/grid/n_points", "need at least 8 points");
  if (s.grid.time_points < 5) throw ConfigError("/grid/time_points", "need at least 5 points");

  if (auto it = doc.find("pipeline"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("/pipeline", "expected a string");
    s.pipeline = parse_pipeline(it->get<std::string>());
  }

  if (auto it = doc.find("tolerances"); it != doc.end()) {
    const std::string path = "/tolerances";
    s.tol.ratio = number_or(*it, "ratio_rel", path, s.tol.ratio);
    s.tol.resolution = number_or(*it, "resolution_rel", path, s.tol.resolution);
    s.tol.time_resolution = number_or(*it, "time_resolution_rel", path, s.tol.time_resolution);
    s.tol.quadrature = number_or(*it, "quadrature_rel", path, s.tol.quadrature);
  }

  if (auto it = doc.find("outputs"); it != doc.end()) {
    s.diagnostics = it->value("propagator_diagnostics", false);
  }

  try {
    (void)derive_rates(s.params);
  } catch (const Error& e) {
    throw ConfigError("/modes", e.what());
  }
  return s;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line/column
    const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(at), '\n');
    const auto nl = text.rfind('\n', at == 0 ? 0 : at - 1);
    const std::size_t col = nl == std::string::npos ? at + 1 : at - nl;
    throw ConfigError("", path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                              ": JSON parse error: " + e.what());
  }
}

Scenario load_scenario(const fs::path& path) { return parse_scenario(read_json_file(path)); }

std::shared_ptr<const PumpPairFunction> PairFunctionCache::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  ++hits_;
  return it->second;
}

void PairFunctionCache::put(const std::string& key, std::shared_ptr<const PumpPairFunction> f) {
  entries_[key] = std::move(f);
}

SpectralGrid resolve_spectral_grid(const Scenario& s, const RingSystem& sys) {
  const double hw = s.grid.half_width.value_or(default_spectral_half_width(sys, s.pump));
  return SpectralGrid(hw, s.grid.n_points);
}

TimeGrid resolve_time_grid(const Scenario& s, const RingSystem& sys) {
  if (s.grid.t_start && s.grid.t_end) return TimeGrid(*s.grid.t_start, *s.grid.t_end, s.grid.time_points);
  if (!s.pump.is_gaussian()) {
    throw ConfigError("/grid", "t_start_s and t_end_s are required for tabulated pumps");
  }
  const TimeGrid d = default_time_grid(sys, s.pump, s.grid.time_points);
  return TimeGrid(s.grid.t_start.value_or(d.t0()), s.grid.t_end.value_or(d.t1()), s.grid.time_points);
}

namespace {

std::string pair_cache_key(const Scenario& s, const RingSystem& sys, const SpectralGrid& axis) {
  const auto& p = sys.mode(Field::pump);
  json key;
  key["pump"] = s.source.contains("pump") ? s.source["pump"] : json();
  key["gamma_p"] = {p.gamma.real(), p.gamma.imag()};
  key["gbar_p"] = sys.rate(Field::pump).total;
  key["v"] = {p.v, sys.mode(Field::signal).v, sys.mode(Field::idler).v};
  key["delta"] = sys.detuning();
  key["grid"] = {axis.half_width(), axis.size()};
  key["tol"] = s.tol.quadrature;
  return key.dump();
}

double peak_abs(const ComplexGrid& g) {
  double m = 0.0;
  for (const auto& x : g.values()) m = std::max(m, std::abs(x));
  return m;
}

double l2(const ComplexGrid& g) {
  double acc = 0.0;
  for (const auto& x : g.values()) acc += std::norm(x);
  return std::sqrt(acc);
}

}  // namespace

ScenarioResult run(const Scenario& s, PairFunctionCache* cache) {
  const RingSystem sys(s.params);
  ScenarioResult r(sys);
  const SpectralGrid axis = resolve_spectral_grid(s, sys);
  r.signal_axis = axis;
  r.idler_axis = axis;
  const double vp = sys.mode(Field::pump).v;

  const bool nonlinear_phase = s.params.eta != 0.0 || s.params.zeta != cplx{};
  const RingSystem linear = sys.with_nonlinearity(s.params.lambda, 0.0, 0.0);
  if (nonlinear_phase && s.pipeline != Pipeline::propagator) {
    r.flags.push_back("perturbative path evaluated with eta = zeta = 0");
  }

  // The weak-pump kernels always run: they carry the singles-to-coincidences ratio.
  std::shared_ptr<const PumpPairFunction> f;
  const std::string key = pair_cache_key(s, linear, axis);
  if (cache) f = cache->get(key);
  if (!f) {
    r.pump_support = s.pump.support(vp);
    const PumpField pump = intracavity_field(linear, s.pump, SpectralGrid(r.pump_support, 257));
    f = std::make_shared<const PumpPairFunction>(pump_pair_function(pump, linear, axis, axis, s.tol.quadrature));
    if (cache) cache->put(key, f);
  }
  r.pump_support = s.pump.support(vp);
  const auto kernels = response_kernels(linear, *f);
  const ComplexGrid pair = pair_amplitude(kernels);
  ObservableOptions opt;
  opt.ratio_tol = s.tol.ratio;
  opt.resolution_tol = s.tol.resolution;
  r.observables = observables(kernels, pair, linear, opt);
  r.pair = pair;
  r.jsi = jsi_closed_form(linear, *f).normalized;

  if (s.pipeline != Pipeline::perturbative) {
    const TimeGrid tg = resolve_time_grid(s, sys);
    r.time_grid = tg;
    TimeDomainOptions topt;
    topt.resolution_tol = s.tol.time_resolution;
    auto td = run_time_domain(sys, s.pump, tg, axis, axis, topt, s.grid.rk4_substeps);
    if (nonlinear_phase) r.flags.push_back("time-domain output with SPM/XPM: not cross-checked against the perturbative route");
    const double pt_peak = peak_abs(pair);
    if (pt_peak > 0.0) {
      PathComparison c;
      c.peak_deviation = std::abs(peak_abs(td.amplitude) - pt_peak) / pt_peak;
      ComplexGrid diff = td.amplitude;
      auto dv = diff.values();
      auto pv = pair.values();
      for (std::size_t k = 0; k < dv.size(); ++k) dv[k] -= pv[k];
      c.l2_deviation = l2(diff) / l2(pair);
      r.comparison = c;
    }
    if (peak_abs(td.amplitude) > 0.0) r.time_domain_schmidt = schmidt_analysis(td.amplitude);
    r.pair_time_domain = td.amplitude;
    if (s.pipeline == Pipeline::propagator) {
      r.pair = td.amplitude;
      r.jsi = normalized(intensity(td.amplitude));
    }
    r.time_domain.emplace(std::move(td));
  }
  return r;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_output(const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

template <typename T, typename RowFn>
void write_grid(const fs::path& file, const Grid2D<T>& g, const std::string& title, double vs, double vi,
                const std::string& value_columns, RowFn&& row) {
  auto out = open_output(file);
  const auto describe = [](const SpectralGrid& a) {
    return "n=" + std::to_string(a.size()) + " start=" + format_double(a[0]) + " step=" + format_double(a.spacing());
  };
  out << "# ringsfwm " << title << '\n';
  out << "# kappa_signal_rad_per_m: " << describe(g.axis_signal()) << '\n';
  out << "# kappa_idler_rad_per_m: " << describe(g.axis_idler()) << '\n';
  out << "# v_signal_m_per_s=" << format_double(vs) << " v_idler_m_per_s=" << format_double(vi) << '\n';
  out << "kappa_signal_rad_per_m,kappa_idler_rad_per_m," << value_columns << '\n';
  for (std::size_t a = 0; a < g.rows(); ++a) {
    for (std::size_t b = 0; b < g.cols(); ++b) {
      out << format_double(g.axis_signal()[a]) << ',' << format_double(g.axis_idler()[b]) << ',' << row(g(a, b))
          << '\n';
    }
  }
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json rates_json(const RingSystem& sys) {
  json j;
  for (Field f : all_fields) {
    const auto& r = sys.rate(f);
    j[to_string(f)] = {{"coupling_per_s", r.coupling},
                       {"loss_per_s", r.loss},
                       {"total_per_s", r.total},
                       {"critically_coupled", r.critically_coupled}};
  }
  j["detuning_rad_per_s"] = sys.detuning();
  return j;
}

}  // namespace

void write_grid_csv(const fs::path& file, const RealGrid& g, const std::string& title, double vs, double vi) {
  write_grid(file, g, title, vs, vi, "value", [](double x) { return format_double(x); });
}

void write_complex_grid_csv(const fs::path& file, const ComplexGrid& g, const std::string& title, double vs,
                            double vi) {
  write_grid(file, g, title, vs, vi, "re,im",
             [](cplx x) { return format_double(x.real()) + "," + format_double(x.imag()); });
}

json observables_json(const Scenario& s, const ScenarioResult& r) {
  const auto& o = r.observables;
  json j;
  j["scenario"] = s.name;
  j["pipeline"] = to_string(s.pipeline);

  json obs;
  obs["coincidences"] = o.coincidences;
  obs["singles"] = o.singles;
  obs["singles_idler_lost"] = o.singles_lost_idler;
  obs["singles_signal_lost"] = o.singles_lost_signal;
  obs["schmidt_K"] = optional_json(o.schmidt_K);
  obs["purity"] = optional_json(o.purity);
  obs["fwhm_signal_rad_per_m"] = optional_json(o.fwhm_signal);
  obs["fwhm_idler_rad_per_m"] = optional_json(o.fwhm_idler);
  obs["resolution_deviation"] = o.resolution_deviation;
  j["observables"] = obs;

  j["ratio"] = {{"numeric", optional_json(o.ratio)},
                {"closed_form", o.ratio_formula},
                {"relative_deviation", optional_json(o.ratio_deviation)},
                {"numeric_defined", o.ratio.has_value()},
                {"source", "perturbative"}};
  j["rates"] = rates_json(r.system);
  j["nonlinear"] = {{"lambda_rad_per_s", {r.system.params().lambda.real(), r.system.params().lambda.imag()}},
                    {"eta_rad_per_s", r.system.params().eta},
                    {"zeta_rad_per_s", {r.system.params().zeta.real(), r.system.params().zeta.imag()}}};
  j["grid"] = {{"n_points", r.signal_axis.size()},
               {"half_width_rad_per_m", r.signal_axis.half_width()},
               {"spacing_rad_per_m", r.signal_axis.spacing()},
               {"pump_support_rad_per_m", r.pump_support}};

  json validation;
  validation["ratio_within_tolerance"] =
      o.ratio_deviation ? json(*o.ratio_deviation <= s.tol.ratio) : json(nullptr);
  validation["ratio_tolerance"] = s.tol.ratio;
  validation["spectral_resolution_ok"] = o.resolution_deviation <= s.tol.resolution;

  if (r.time_domain) {
    const auto& td = *r.time_domain;
    json t;
    t["time_grid"] = {{"t_start_s", r.time_grid->t0()},
                      {"t_end_s", r.time_grid->t1()},
                      {"n_points", r.time_grid->size()},
                      {"rk4_substeps", s.grid.rk4_substeps}};
    t["coincidences"] = integrate_grid(intensity(*r.pair_time_domain));
    t["schmidt_K"] = r.time_domain_schmidt ? json(r.time_domain_schmidt->K) : json(nullptr);
    t["purity"] = r.time_domain_schmidt ? json(r.time_domain_schmidt->purity) : json(nullptr);
    t["resolution_deviation"] = optional_json(td.diagnostics.resolution_deviation);
    if (r.comparison) {
      t["peak_deviation_vs_perturbative"] = r.comparison->peak_deviation;
      t["l2_deviation_vs_perturbative"] = r.comparison->l2_deviation;
      validation["paths_consistent"] = r.comparison->peak_deviation <= 1e-2 && r.comparison->l2_deviation <= 2e-2;
    }
    double peak_n = 0.0;
    for (double n : td.pump.photon_number()) peak_n = std::max(peak_n, n);
    double gmin = r.system.rate(Field::signal).total;
    gmin = std::min(gmin, r.system.rate(Field::idler).total);
    const double strength = std::abs(r.system.params().lambda) * peak_n / gmin;
    t["peak_intracavity_photons"] = peak_n;
    t["pump_strength_lambda_n_over_gamma"] = strength;
    validation["weak_pump"] = strength < 1e-2;
    validation["pump_tail_truncated"] = td.pump.tail_truncated();
    j["time_domain"] = t;
  }

  json meta;
  meta["version"] = "0.1.0";
  meta["units"] = {{"kappa", "rad/m (wavevector offset from the reference resonance)"},
                   {"rates", "s^-1, angular; a rate quoted as 10 GHz means 1e10 s^-1"},
                   {"angular_detuning", "kappa * v, rad/s"},
                   {"pump_amplitude", "m^1/2; int |alpha_P(kappa)|^2 dkappa is the incoming photon number"},
                   {"jsi", "normalized to unit peak"},
                   {"pair_amplitude", "arbitrary units (absolute pair rates are not calibrated)"},
                   {"coincidences_singles", "same arbitrary units as |pair_amplitude|^2 integrated over dkappa dkappa'"}};
  meta["validation"] = validation;
  meta["flags"] = r.flags;
  meta["config"] = s.source;
  j["metadata"] = meta;
  return j;
}

void write_outputs(const Scenario& s, const ScenarioResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  const double vs = r.system.mode(Field::signal).v;
  const double vi = r.system.mode(Field::idler).v;
  const std::string source = s.pipeline == Pipeline::propagator ? "time-domain" : "perturbative";
  write_grid_csv(dir / "jsi.csv", r.jsi, "jsi normalized (" + source + ")", vs, vi);
  write_complex_grid_csv(dir / "pair_amplitude.csv", r.pair, "pair_amplitude (" + source + ")", vs, vi);
  if (s.pipeline == Pipeline::both && r.pair_time_domain) {
    write_complex_grid_csv(dir / "pair_amplitude_time_domain.csv", *r.pair_time_domain,
                           "pair_amplitude (time-domain)", vs, vi);
  }
  {
    auto out = open_output(dir / "observables.json");
    out << observables_json(s, r).dump(2) << '\n';
  }
  if (s.diagnostics && r.time_domain) {
    const auto& td = *r.time_domain;
    json d;
    d["pump_ode_error_estimate"] = td.pump_ode_error;
    d["pump_tail_truncated"] = td.pump.tail_truncated();
    d["max_abs_G11"] = td.diagnostics.max_abs_g11;
    d["max_abs_G21"] = td.diagnostics.max_abs_g21;
    d["resolution_deviation"] = optional_json(td.diagnostics.resolution_deviation);
    d["pump_time_points"] = td.pump.time_grid().size();
    auto out = open_output(dir / "propagator_diagnostics.json");
    out << d.dump(2) << '\n';

    auto env = open_output(dir / "pump_envelope.csv");
    env << "# ringsfwm intracavity pump envelope beta_P(t)\n";
    env << "t_s,re,im,photon_number\n";
    const auto& tg = td.pump.time_grid();
    const auto e = td.pump.envelope();
    for (std::size_t k = 0; k < tg.size(); ++k) {
      env << format_double(tg[k]) << ',' << format_double(e[k].real()) << ',' << format_double(e[k].imag()) << ','
          << format_double(std::norm(e[k])) << '\n';
    }
  }
}

SweepSpec parse_sweep(const json& doc) {
  const auto& sw = require(doc, "sweep", "");
  SweepSpec spec;
  if (auto it = sw.find("parameter"); it != sw.end()) {
    if (!it->is_string()) throw ConfigError("/sweep/parameter", "expected a JSON pointer string");
    spec.parameters.push_back(it->get<std::string>());
  }
  if (auto it = sw.find("parameters"); it != sw.end()) {
    if (!it->is_array()) throw ConfigError("/sweep/parameters", "expected an array of JSON pointers");
    for (const auto& p : *it) {
      if (!p.is_string()) throw ConfigError("/sweep/parameters", "expected JSON pointer strings");
      spec.parameters.push_back(p.get<std::string>());
    }
  }
  if (spec.parameters.empty()) throw ConfigError("/sweep", "no parameter given");
  const auto& values = require(sw, "values", "/sweep");
  if (!values.is_array() || values.empty()) throw ConfigError("/sweep/values", "expected a non-empty array");
  for (std::size_t k = 0; k < values.size(); ++k) {
    spec.values.push_back(as_number(values[k], "/sweep/values/" + std::to_string(k)));
  }
  for (const auto& p : spec.parameters) {
    try {
      const json::json_pointer ptr(p);
      json base = doc;
      base.erase("sweep");
      if (!base.contains(ptr) || !base.at(ptr).is_number()) {
        throw ConfigError(p, "sweep parameter must name an existing numeric field");
      }
    } catch (const json::exception& e) {
      throw ConfigError(p, e.what());
    }
  }
  return spec;
}

std::vector<SweepRow> run_sweep(const json& doc, const std::optional<std::size_t>& grid_n,
                                const std::optional<double>& tol, std::size_t* cache_hits) {
  const SweepSpec spec = parse_sweep(doc);
  std::vector<Scenario> scenarios;
  double hw = 0.0;
  for (double value : spec.values) {
    json d = doc;
    d.erase("sweep");
    for (const auto& p : spec.parameters) d[json::json_pointer(p)] = value;
    Scenario s = parse_scenario(d);
    if (grid_n) s.grid.n_points = *grid_n;
    if (tol) s.tol.ratio = *tol;
    s.pipeline = Pipeline::perturbative;
    hw = std::max(hw, resolve_spectral_grid(s, RingSystem(s.params)).half_width());
    scenarios.push_back(std::move(s));
  }
  PairFunctionCache cache;
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    auto& s = scenarios[k];
    if (!s.grid.half_width) s.grid.half_width = hw;
    rows.push_back({spec.values[k], run(s, &cache).observables});
  }
  if (cache_hits) *cache_hits = cache.hits();
  return rows;
}

void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, const fs::path& file) {
  auto out = open_output(file);
  out << "# ringsfwm sweep over";
  for (const auto& p : spec.parameters) out << ' ' << p;
  out << '\n';
  out << "value,coincidences,singles,r,r_closed_form,r_relative_deviation,schmidt_K,purity,"
         "fwhm_signal_rad_per_m,fwhm_idler_rad_per_m\n";
  const auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string("nan"); };
  for (const auto& row : rows) {
    const auto& o = row.observables;
    out << format_double(row.value) << ',' << format_double(o.coincidences) << ',' << format_double(o.singles) << ','
        << opt(o.ratio) << ',' << format_double(o.ratio_formula) << ',' << opt(o.ratio_deviation) << ','
        << opt(o.schmidt_K) << ',' << opt(o.purity) << ',' << opt(o.fwhm_signal) << ',' << opt(o.fwhm_idler)
        << '\n';
  }
}

}  // namespace ringsfwm::cli
