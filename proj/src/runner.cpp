#include "spinsqz/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "spinsqz/analysis.hpp"
#include "spinsqz/dtwa.hpp"
#include "spinsqz/ed.hpp"
#include "spinsqz/error.hpp"
#include "spinsqz/rsw.hpp"
#include "spinsqz/series_io.hpp"

namespace spinsqz {

CouplingMatrix couplings_for(const RunConfig& cfg) {
  CouplingSpec spec{parse_family(cfg.family), cfg.J, cfg.alpha, cfg.rb};
  return build_couplings(LatticeGeometry::rectangle(cfg.lx(), cfg.ly()), spec);
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Tower fit on the given lattice, cached per (lattice, couplings, Delta).
TowerFit cached_tower_fit(const CouplingMatrix& cm, double delta, double max_gib) {
  using Key = std::tuple<int, int, int, double, double, double, double>;
  static std::map<Key, TowerFit> cache;
  const Key key{cm.geometry.Lx, cm.geometry.Ly, static_cast<int>(cm.spec.family), cm.spec.J, cm.spec.alpha,
                cm.spec.rb, delta};
  const auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  EdOptions opts;
  opts.max_gib = max_gib;
  opts.max_sites = 16;
  const auto fit = tos_fit(tower_minima(tower_energies(cm, delta, 1, opts)));
  cache.emplace(key, fit);
  return fit;
}

}  // namespace

RotorModel resolve_inertia(const RunConfig& cfg, const CouplingMatrix& cm, nlohmann::json& info) {
  RotorModel r;
  if (cfg.inertia == "bare") {
    r = bare_inertia(cm, cfg.delta);
    info = {{"mode", "bare"}, {"chi", r.chi}};
    return r;
  }
  if (cfg.inertia == "tos") {
    if (cm.size() > 16) {
      throw ConfigError("inertia=tos needs an ED tower on this lattice (N <= 16); use rescaled-from:L0");
    }
    const auto fit = cached_tower_fit(cm, cfg.delta, cfg.max_gib);
    r.N = cm.size();
    r.chi = fit.rotor.chi;
    info = {{"mode", "tos"}, {"chi", r.chi}, {"E0", fit.E0}, {"max_rel_deviation", fit.max_rel_deviation},
            {"warnings", fit.warnings}};
    return r;
  }
  const std::string prefix = "rescaled-from:";
  int L0 = 0;
  try {
    L0 = std::stoi(cfg.inertia.substr(prefix.size()));
  } catch (const std::exception&) {
    throw ConfigError("inertia rescaled-from:L0 needs an integer L0, got '" + cfg.inertia + "'");
  }
  if (L0 < 2 || L0 * L0 > 16) throw ConfigError("rescaled-from:L0 needs 2 <= L0 <= 4 for the ED tower");
  const auto cm0 = build_couplings(LatticeGeometry::square(L0), cm.spec);
  const auto fit = cached_tower_fit(cm0, cfg.delta, cfg.max_gib);
  r.N = cm.size();
  r.chi = rescale_inertia(fit.rotor.chi, cm0, cm);
  info = {{"mode", cfg.inertia}, {"chi", r.chi}, {"chi_L0", fit.rotor.chi}, {"L0", L0}, {"warnings", fit.warnings}};
  return r;
}

RotorModel oat_rotor(const RunConfig& cfg) {
  RotorModel r;
  r.N = cfg.N > 0 ? cfg.N : cfg.lx() * cfg.ly();
  if (r.N < 2) throw ConfigError("OAT needs N >= 2");
  if (cfg.chi > 0.0) {
    r.chi = cfg.chi;
  } else {
    const auto cm = couplings_for(cfg);
    r.chi = cm.J0 * (1.0 - cfg.delta) / (2.0 * (r.N - 1));
  }
  if (!(r.chi > 0.0)) throw ConfigError("OAT twisting rate must be positive (Delta < 1)");
  return r;
}

QuenchOutput run_quench(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto times = cfg.times();
  QuenchOutput out;
  nlohmann::json diag = nlohmann::json::object();
  if (cfg.method == "oat") {
    const auto r = oat_rotor(cfg);
    out.series = oat_quench(r, times);
    diag["chi"] = r.chi;
  } else {
    const auto cm = couplings_for(cfg);
    if (cfg.method == "ed") {
      EdOptions opts;
      opts.max_gib = cfg.max_gib;
      auto res = ed_quench(cm, cfg.delta, times, cfg.krylov_step, opts);
      out.series = std::move(res.series);
      diag = out.series.metadata["diagnostics"];
    } else if (cfg.method == "rsw") {
      nlohmann::json info;
      const auto rotor = resolve_inertia(cfg, cm, info);
      RswOptions opts;
      opts.spin_waves = cfg.spin_waves;
      out.series = rsw_quench(cm, cfg.delta, rotor, times, opts);
      out.series.metadata["inertia"] = info;
      diag["inertia"] = info;
      const auto sw = dispersion(cm, cfg.delta);
      diag["n_sw_bound"] = spin_wave_density_bound(sw);
    } else {
      DtwaOptions opts;
      opts.dt = cfg.dt;
      opts.n_traj = cfg.ntraj;
      opts.seed = cfg.seed;
      out.series = run_ensemble(cm, cfg.delta, times, opts);
      diag["dt_used"] = out.series.metadata["dt"];
    }
  }
  out.series.metadata["config_hash"] = cfg.hash();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.manifest = {{"config", cfg.to_json()},
                  {"config_hash", cfg.hash()},
                  {"version", SPINSQZ_VERSION},
                  {"seed", cfg.seed},
                  {"wall_time_s", wall},
                  {"diagnostics", diag},
                  {"warnings", out.series.warnings},
                  {"output", cfg.output}};
  return out;
}

std::string manifest_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".manifest.json").string();
}

std::string write_quench(QuenchOutput& out, const RunConfig& cfg) {
  write_series(out.series, cfg.output);
  const auto hash = fnv1a_hex(read_file(cfg.output));
  out.manifest["output_hash"] = hash;
  write_json(out.manifest, manifest_path(cfg.output));
  return hash;
}

bool run_is_complete(const RunConfig& cfg) {
  const auto mp = manifest_path(cfg.output);
  if (!std::filesystem::exists(mp) || !std::filesystem::exists(cfg.output)) return false;
  try {
    const auto m = read_json(mp);
    return m.value("config_hash", "") == cfg.hash() && m.value("output_hash", "") == fnv1a_hex(read_file(cfg.output));
  } catch (const ConfigError&) {
    return false;
  }
}

nlohmann::json scaling_report(const std::vector<std::pair<double, TimeSeries>>& runs) {
  nlohmann::json report = {{"runs", nlohmann::json::array()}, {"warnings", nlohmann::json::array()}};
  std::vector<OptimumSample> samples;
  std::vector<double> lambdas;
  for (const auto& [N, ts] : runs) {
    nlohmann::json r = {{"N", N}};
    try {
      const auto opt = find_optimum(ts);
      r["xi2_min"] = opt.xi2_opt;
      r["t_opt"] = opt.t_opt;
      r["t_min"] = opt.t_min;
      r["v_perp_min"] = opt.v_min;
      r["m_x_at_min"] = opt.m_x_at_min;
      samples.push_back({N, opt.xi2_opt, opt.t_min, opt.v_min});
    } catch (const NumericalError& e) {
      r["optimum_error"] = e.what();
    }
    try {
      const auto lam = fit_lambda_auto(ts);
      r["lambda"] = to_json(lam.fit);
      r["t_drop"] = lam.t_drop ? nlohmann::json(*lam.t_drop) : nlohmann::json(nullptr);
      r["lambda_warnings"] = lam.warnings;
      lambdas.push_back(lam.fit.value);
    } catch (const NumericalError& e) {
      r["lambda_error"] = e.what();
    }
    report["runs"].push_back(r);
  }
  std::map<int, TimeSeries> by_L;
  for (const auto& [N, ts] : runs) {
    const int L = static_cast<int>(std::lround(std::sqrt(N)));
    if (L * L == N) by_L[L] = ts;
  }
  if (by_L.size() >= 2) report["drop_collapse"] = to_json(drop_time_collapse(by_L));
  if (samples.size() >= 4) {
    const auto sc = fit_optimum_scaling(samples);
    report["nu"] = to_json(sc.nu);
    report["mu"] = to_json(sc.mu);
    report["nu0"] = to_json(sc.nu0);
    for (const auto& w : sc.warnings) report["warnings"].push_back(w);
    if (!lambdas.empty()) {
      const double lambda = lambdas.back();
      const auto rel = check_exponent_relation(sc.nu.value, sc.nu0.value, lambda, sc.mu.value);
      report["relation"] = {{"lambda", lambda},
                            {"predicted_nu", rel.predicted},
                            {"residual", rel.residual},
                            {"rsw_form", rel.rsw_form}};
    }
  } else {
    report["warnings"].push_back("fewer than 4 sizes with an optimum: no exponent fits");
  }
  return report;
}

CampaignSpec CampaignSpec::parse(const std::string& text) {
  CampaignSpec spec;
  for (const auto& [k, v] : parse_key_values(text)) {
    if (k == "sizes") {
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          spec.sizes.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw ConfigError("sizes: bad entry '" + item + "'");
        }
      }
    } else if (k == "dir") {
      spec.dir = v;
    } else {
      spec.base.set(k, v);
    }
  }
  if (spec.sizes.empty()) throw ConfigError("campaign needs sizes = a,b,...");
  return spec;
}

CampaignSpec CampaignSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read campaign " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

RunConfig CampaignSpec::config_for(int size) const {
  RunConfig c = base;
  if (c.method == "oat") {
    c.N = size;
  } else {
    c.L = size;
    c.Ly = 0;
  }
  c.output = (std::filesystem::path(dir) / (c.method + "_" + std::to_string(size) + ".csv")).string();
  return c;
}

nlohmann::json run_campaign(const CampaignSpec& spec, std::ostream* log) {
  std::vector<std::pair<double, TimeSeries>> done;
  nlohmann::json status = nlohmann::json::array();
  int failures = 0;
  for (int size : spec.sizes) {
    const auto cfg = spec.config_for(size);
    nlohmann::json s = {{"size", size}, {"output", cfg.output}};
    try {
      if (run_is_complete(cfg)) {
        s["status"] = "skipped";
      } else {
        auto out = run_quench(cfg);
        write_quench(out, cfg);
        s["status"] = "ok";
      }
      auto ts = read_series(cfg.output);
      const double N = cfg.method == "oat" ? cfg.N : cfg.lx() * cfg.ly();
      done.emplace_back(N, std::move(ts));
    } catch (const std::exception& e) {
      s["status"] = std::string("failed: ") + e.what();
      ++failures;
    }
    if (log) *log << "size " << size << ": " << s["status"].get<std::string>() << '\n';
    status.push_back(s);
  }
  auto report = scaling_report(done);
  report["campaign"] = status;
  report["failures"] = failures;
  report["base_config"] = spec.base.to_json();
  write_json(report, (std::filesystem::path(spec.dir) / "report.json").string());
  return report;
}

}  // namespace spinsqz
