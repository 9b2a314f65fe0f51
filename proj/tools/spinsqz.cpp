#include <cmath>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinsqz/analysis.hpp"
#include "spinsqz/ed.hpp"
#include "spinsqz/error.hpp"
#include "spinsqz/rotor_oat.hpp"
#include "spinsqz/rsw.hpp"
#include "spinsqz/run_config.hpp"
#include "spinsqz/runner.hpp"
#include "spinsqz/series_io.hpp"
#include "spinsqz/thermal.hpp"

using namespace spinsqz;

namespace {

const char* kColumns =
    "Time-series CSV columns (one row per output time, units J = hbar = 1):\n"
    "  t           time in 1/J\n"
    "  m_x         <J^x>/N\n"
    "  var_e1      Var(J.e1)/N, e1 = first transverse axis (y for a state along x)\n"
    "  var_e2      Var(J.e2)/N, e2 = <J>/|<J>| x e1\n"
    "  cov_12      symmetrized Cov(J.e1, J.e2)/N\n"
    "  v_perp_min  minimum transverse variance per spin\n"
    "  theta_min   angle of the minimizing direction from e1 toward e2, (-pi/2, pi/2]\n"
    "  xi2         N^2 v_perp_min / |<J>|^2, the squeezing parameter\n"
    "  n_sw        spin-wave density, rsw only, empty otherwise\n"
    "  var_jx      Var(J^x)/N\n"
    "  m_x_err, xi2_err   jackknife standard errors, dtwa only\n"
    "A JSON sidecar (.json) holds metadata and warnings; quench also writes a\n"
    ".manifest.json with config, hashes, version, seed, wall time, diagnostics.\n"
    "Exit codes: 0 success, 2 configuration error, 3 numerical failure.";

/// Config file plus per-key flag overrides, shared by all subcommands.
struct ConfigArgs {
  std::string file;
  std::map<std::string, std::string> flags;
  std::vector<std::string> sets;

  void attach(CLI::App* app, const std::vector<std::string>& keys) {
    app->add_option("--config", file, "key = value config file");
    app->add_option("--set", sets, "override key=value (repeatable)");
    for (const auto& k : keys) {
      std::string flag = k;
      for (auto& c : flag) {
        if (c == '_') c = '-';
      }
      app->add_option("--" + flag, flags[k], "config key " + k);
    }
  }

  RunConfig build() const {
    RunConfig cfg = file.empty() ? RunConfig{} : RunConfig::load(file);
    for (const auto& [k, v] : flags) {
      if (!v.empty()) cfg.set(k, v);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    return cfg;
  }
};

const std::vector<std::string> kModelKeys = {"family", "L", "Ly", "delta", "J", "alpha", "rb", "max_gib"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

EdOptions ed_options(const RunConfig& cfg) {
  EdOptions o;
  o.max_gib = cfg.max_gib;
  return o;
}

void print_json(const nlohmann::json& j, const std::string& path) {
  if (!path.empty()) write_json(j, path);
  std::cout << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin squeezing in 2D XXZ quenches: exact, rotor/spin-wave and semiclassical solvers"};
  app.footer(kColumns);
  app.require_subcommand(1);
  app.set_version_flag("--version", SPINSQZ_VERSION);

  // quench
  ConfigArgs q;
  auto* quench = app.add_subcommand("quench", "CSS quench time series (CSV + sidecar + manifest)");
  q.attach(quench, with(kModelKeys, {"method", "N", "chi", "inertia", "tmax", "dt_out", "grid", "n_log", "t_first",
                                     "dt", "ntraj", "seed", "krylov_step", "output"}));
  bool no_sw = false;
  quench->add_flag("--no-spin-waves", no_sw, "rsw: bare rotor, n_SW dropped");
  quench->footer(kColumns);

  // tower
  ConfigArgs tw;
  int tower_count = 1;
  std::string tower_out;
  auto* tower = app.add_subcommand("tower", "ED lowest energies per Jz sector and the tower-of-states fit");
  tw.attach(tower, kModelKeys);
  tower->add_option("--count", tower_count, "levels per sector");
  tower->add_option("--output", tower_out, "CSV: jz,level,energy");

  // tcss
  ConfigArgs tc;
  std::string tcss_out;
  auto* tcss = app.add_subcommand("tcss", "temperature whose thermal energy equals the CSS energy");
  tc.attach(tcss, kModelKeys);
  tcss->add_option("--output", tcss_out, "JSON report");

  // thermal-varjx
  ConfigArgs tv;
  double tv_T = 0.0;
  std::string tv_out;
  auto* tvarjx = app.add_subcommand("thermal-varjx", "thermal Var(J^x)/N (default at T_CSS)");
  tv.attach(tvarjx, kModelKeys);
  tvarjx->add_option("--T", tv_T, "temperature; 0 selects T_CSS");
  tvarjx->add_option("--output", tv_out, "JSON report");

  // spectrum
  ConfigArgs sp;
  std::string sp_method = "rsw", sp_out;
  int sp_kz = 4, sp_sw = 2, sp_count = 3;
  auto* spectrum = app.add_subcommand("spectrum", "low-energy spectrum: rsw levels or ED per-sector levels");
  sp.attach(spectrum, with(kModelKeys, {"inertia"}));
  spectrum->add_option("--method", sp_method, "rsw | ed")->check(CLI::IsMember({"rsw", "ed"}));
  spectrum->add_option("--max-kz", sp_kz, "rsw: largest |Kz|");
  spectrum->add_option("--max-sw", sp_sw, "rsw: most spin-wave quanta");
  spectrum->add_option("--count", sp_count, "ed: levels per sector");
  spectrum->add_option("--output", sp_out, "CSV: rsw Jz,n_sw_total,energy; ed Jz,level,energy");

  // inertia
  ConfigArgs in;
  std::vector<double> in_deltas, in_rbs;
  int in_to = 0;
  bool in_tos = true;
  std::string in_out;
  auto* inertia = app.add_subcommand("inertia", "bare, tower-fit and rescaled rotor twisting rates 1/(2I)");
  in.attach(inertia, kModelKeys);
  inertia->add_option("--deltas", in_deltas, "Delta values (default: the configured one)")->delimiter(',');
  inertia->add_option("--rbs", in_rbs, "blockade radii for the rydberg family")->delimiter(',');
  inertia->add_option("--rescale-to", in_to, "also rescale the tower value to this L");
  inertia->add_flag("!--no-tos", in_tos, "skip the ED tower fit");
  inertia->add_option("--output", in_out, "CSV: param,bare,tos,rescaled");

  // oat-scaling
  std::vector<int> oat_N;
  int oat_min = 64, oat_max = 484, oat_count = 8;
  double oat_delta = 0.5, oat_J0 = 4.0;
  std::string oat_out, oat_report;
  auto* oat = app.add_subcommand("oat-scaling", "OAT optima versus N with chi = J0 (1 - Delta) / (2 (N - 1))");
  oat->add_option("--N", oat_N, "explicit sizes")->delimiter(',');
  oat->add_option("--N-min", oat_min, "log-spaced range start");
  oat->add_option("--N-max", oat_max, "log-spaced range end");
  oat->add_option("--count", oat_count, "log-spaced range points");
  oat->add_option("--delta", oat_delta, "anisotropy entering chi");
  oat->add_option("--J0", oat_J0, "coupling row sum entering chi");
  oat->add_option("--output", oat_out, "CSV: N,chi,xi2_min,t_opt,t_min,v_perp_min,m_x_at_opt");
  oat->add_option("--report", oat_report, "JSON exponent fits");

  // scaling-fit
  std::vector<std::string> fit_inputs;
  std::string fit_manifest, fit_out;
  auto* sfit = app.add_subcommand("scaling-fit", "exponents (lambda, nu, mu, nu0) from series CSVs");
  sfit->add_option("inputs", fit_inputs, "time-series CSVs")->required();
  sfit->add_option("--manifest", fit_manifest, "manifest whose config supplies N when sidecars lack it");
  sfit->add_option("--output", fit_out, "JSON report");

  // campaign
  std::string camp_file;
  auto* campaign = app.add_subcommand("campaign", "size sweep with skip-if-complete and an exponent report");
  campaign->add_option("--config", camp_file, "config keys plus sizes = a,b,... and dir = path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*quench) {
      auto cfg = q.build();
      if (no_sw) cfg.spin_waves = false;
      auto out = run_quench(cfg);
      const auto hash = write_quench(out, cfg);
      for (const auto& w : out.series.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << cfg.output << " " << hash << '\n';
    } else if (*tower) {
      const auto cfg = tw.build();
      const auto cm = couplings_for(cfg);
      auto opts = ed_options(cfg);
      opts.max_sites = 16;
      const auto levels = tower_energies(cm, cfg.delta, tower_count, opts);
      std::vector<std::vector<double>> rows;
      for (const auto& l : levels) {
        for (std::size_t k = 0; k < l.energies.size(); ++k) rows.push_back({l.jz, double(k), l.energies[k]});
      }
      if (!tower_out.empty()) write_table(tower_out, {"jz", "level", "energy"}, rows);
      const auto fit = tos_fit(tower_minima(levels));
      nlohmann::json j = {{"chi_tos", fit.rotor.chi}, {"E0", fit.E0}, {"max_rel_deviation", fit.max_rel_deviation},
                          {"chi_bare", bare_inertia(cm, cfg.delta).chi}, {"warnings", fit.warnings}};
      std::cout << j.dump(2) << '\n';
    } else if (*tcss) {
      const auto cfg = tc.build();
      ThermalOptions opts;
      opts.ed = ed_options(cfg);
      const auto th = thermal_solve(couplings_for(cfg), cfg.delta, opts);
      print_json({{"E_ground", th.E_ground}, {"E_css", th.E_css}, {"T_css", th.t_css()}}, tcss_out);
    } else if (*tvarjx) {
      const auto cfg = tv.build();
      ThermalOptions opts;
      opts.ed = ed_options(cfg);
      opts.with_vectors = true;
      const auto th = thermal_solve(couplings_for(cfg), cfg.delta, opts);
      const double T = tv_T > 0.0 ? tv_T : th.t_css();
      print_json({{"T", T}, {"var_jx", th.var_jx(T)}, {"energy", th.energy(T)}, {"E_css", th.E_css}}, tv_out);
    } else if (*spectrum) {
      const auto cfg = sp.build();
      const auto cm = couplings_for(cfg);
      if (sp_method == "rsw") {
        nlohmann::json info;
        const auto rotor = resolve_inertia(cfg, cm, info);
        const auto sw = dispersion(cm, cfg.delta);
        const auto spec = rsw_spectrum(sw, rotor, 0.0, sp_kz, sp_sw);
        std::vector<std::vector<double>> rows;
        for (const auto& l : spec.levels) rows.push_back({double(l.Kz), double(l.n_sw_total), l.energy});
        if (!sp_out.empty()) write_table(sp_out, {"Jz", "n_sw_total", "energy"}, rows);
        std::cout << nlohmann::json({{"inertia", info}, {"levels", spec.levels.size()}}).dump(2) << '\n';
      } else {
        auto opts = ed_options(cfg);
        opts.max_sites = 16;
        const auto levels = tower_energies(cm, cfg.delta, sp_count, opts);
        std::vector<std::vector<double>> rows;
        for (const auto& l : levels) {
          for (std::size_t k = 0; k < l.energies.size(); ++k) rows.push_back({l.jz, double(k), l.energies[k]});
        }
        if (!sp_out.empty()) write_table(sp_out, {"Jz", "level", "energy"}, rows);
        std::cout << rows.size() << " levels\n";
      }
    } else if (*inertia) {
      auto cfg = in.build();
      std::vector<std::pair<std::string, double>> params;
      if (!in_rbs.empty()) {
        for (double rb : in_rbs) params.emplace_back("rb", rb);
      } else if (!in_deltas.empty()) {
        for (double d : in_deltas) params.emplace_back("delta", d);
      } else {
        params.emplace_back("delta", cfg.delta);
      }
      std::vector<std::vector<double>> rows;
      std::cout << params.front().first << "\tbare\ttos\trescaled\n";
      for (const auto& [name, value] : params) {
        RunConfig c = cfg;
        c.set(name, std::to_string(value));
        const auto cm = couplings_for(c);
        const double bare = bare_inertia(cm, c.delta).chi;
        double tos = std::nan(""), resc = std::nan("");
        if (in_tos) {
          c.inertia = "tos";
          nlohmann::json info;
          tos = resolve_inertia(c, cm, info).chi;
          if (in_to > 0) {
            RunConfig big = c;
            big.L = in_to;
            big.Ly = 0;
            resc = rescale_inertia(tos, cm, couplings_for(big));
          }
        }
        rows.push_back({value, bare, tos, resc});
        std::cout << value << '\t' << bare << '\t' << tos << '\t' << resc << '\n';
      }
      if (!in_out.empty()) write_table(in_out, {params.front().first, "bare", "tos", "rescaled"}, rows);
    } else if (*oat) {
      if (oat_N.empty()) {
        if (oat_count < 2 || oat_min < 4 || oat_max <= oat_min) throw ConfigError("bad oat-scaling range");
        for (int k = 0; k < oat_count; ++k) {
          const double x = std::log(oat_min) + (std::log(oat_max) - std::log(oat_min)) * k / (oat_count - 1);
          oat_N.push_back(static_cast<int>(std::lround(std::exp(x))));
        }
      }
      std::vector<std::vector<double>> rows;
      std::vector<OptimumSample> samples;
      for (int N : oat_N) {
        const double chi = oat_J0 * (1.0 - oat_delta) / (2.0 * (N - 1));
        const auto o = oat_optimum(N, chi);
        rows.push_back({double(N), chi, o.xi2_min, o.t_opt, o.t_min, o.v_perp_min, o.m_x_at_opt});
        samples.push_back({double(N), o.xi2_min, o.t_min, o.v_perp_min});
        std::cout << N << '\t' << o.xi2_min << '\t' << o.t_min << '\t' << o.v_perp_min << '\n';
      }
      if (!oat_out.empty()) {
        write_table(oat_out, {"N", "chi", "xi2_min", "t_opt", "t_min", "v_perp_min", "m_x_at_opt"}, rows);
      }
      if (samples.size() >= 4) {
        const auto sc = fit_optimum_scaling(samples);
        print_json({{"nu_eff", to_json(sc.nu)}, {"mu", to_json(sc.mu)}, {"nu0", to_json(sc.nu0)},
                    {"warnings", sc.warnings}},
                   oat_report);
      }
    } else if (*sfit) {
      std::vector<std::pair<double, TimeSeries>> runs;
      double manifest_N = 0.0;
      if (!fit_manifest.empty()) {
        const auto m = read_json(fit_manifest);
        const auto cfg = RunConfig::parse([&] {
          std::string text;
          for (const auto& [k, v] : m.at("config").items()) text += k + " = " + v.get<std::string>() + "\n";
          return text;
        }());
        manifest_N = cfg.method == "oat" && cfg.N > 0 ? cfg.N : cfg.lx() * cfg.ly();
      }
      for (const auto& path : fit_inputs) {
        auto ts = read_series(path);
        double N = ts.metadata.contains("N") ? ts.metadata["N"].get<double>() : manifest_N;
        if (N <= 0.0) throw ConfigError(path + ": size unknown, no N in sidecar and no --manifest");
        runs.emplace_back(N, std::move(ts));
      }
      print_json(scaling_report(runs), fit_out);
    } else if (*campaign) {
      const auto spec = CampaignSpec::load(camp_file);
      const auto report = run_campaign(spec, &std::cerr);
      std::cout << report.dump(2) << '\n';
      if (report["failures"].get<int>() > 0) return 3;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
