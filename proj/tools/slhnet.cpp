// slhnet: compose, sweep, cross-check and fit SLH networks from the shell.
// Exit codes: 0 success, 1 numerical failure, 2 input error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slh/ccd.hpp"
#include "slh/fit.hpp"
#include "slh/fock.hpp"
#include "slh/linear.hpp"
#include "slh/netlist.hpp"
#include "slh/text.hpp"

namespace {

constexpr const char* kToolVersion = "slhnet 1.0.0";
constexpr double kOracleTolerance = 1e-4;

enum Exit { kOk = 0, kNumerical = 1, kInput = 2 };

struct Common {
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  double n_eff = slh::kDefaultEffectiveIndex;
  std::string out;
  int port = 1;
};

struct Manifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::string> extra;  // subcommand-specific key=value lines
  const Common* common = nullptr;

  std::vector<std::string> lines() const {
    std::vector<std::string> v{kToolVersion, "subcommand=" + subcommand};
    std::string joined;
    for (const auto& in : inputs) joined += (joined.empty() ? "" : ",") + in;
    v.push_back("inputs=" + joined);
    joined.clear();
    for (const auto& s : common->sets) joined += (joined.empty() ? "" : ",") + s;
    v.push_back("overrides=" + joined);
    v.push_back("seed=" + (common->seed ? std::to_string(*common->seed) : std::string("default")));
    v.push_back("n_eff=" + slh::format_real(common->n_eff));
    v.push_back("port=" + std::to_string(common->port));
    v.push_back("output=" + (common->out.empty() ? std::string("-") : common->out));
    for (const auto& e : extra) v.push_back(e);
    return v;
  }

  std::string header() const {
    std::string h;
    for (const auto& l : lines()) h += "# " + l + "\n";
    return h;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw slh::InputError("cannot write '" + path + "'");
  f << text;
  if (!f) throw slh::InputError("failed writing '" + path + "'");
}

slh::Overrides parse_sets(const std::vector<std::string>& sets) {
  slh::Overrides o;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw slh::InputError("--set expects NAME=VALUE, got '" + s + "'");
    const std::string name(slh::trim(s.substr(0, eq)));
    const auto v = slh::parse_complex(s.substr(eq + 1));
    if (!v) throw slh::InputError("--set " + name + ": not a number");
    if (!o.emplace(name, *v).second) throw slh::InputError("--set " + name + " given twice");
  }
  return o;
}

std::size_t port_index(const Common& c) {
  if (c.port < 1) throw slh::InputError("--port is 1-based");
  return static_cast<std::size_t>(c.port - 1);
}

// Netlist diagnostics are prefixed with the file name: "ccd.slh:3:14: ...".
slh::NetlistAst load_netlist(const std::string& path) {
  try {
    return slh::parse_netlist(slh::read_file(path));
  } catch (const slh::NetlistError& e) {
    throw slh::InputError(path + ":" + e.what());
  }
}

slh::SlhTriple compile(const std::string& path, const slh::NetlistAst& ast, const Common& c) {
  try {
    return slh::compile_netlist(ast, parse_sets(c.sets), {c.n_eff});
  } catch (const slh::NetlistError& e) {
    throw slh::InputError(path + ":" + e.what());
  }
}

std::string sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_compose(const Common& c, const std::string& netlist) {
  const auto ast = load_netlist(netlist);
  const auto g = compile(netlist, ast, c);
  Manifest m{"compose", {netlist}, {}, &c};
  emit(c.out, m.header() + slh::serialize(g));
  return kOk;
}

struct SpectrumArgs {
  std::string netlist;
  std::string grid;
  std::string unit = "db";
  bool oracle = false;
  int oracle_dim = 3;
};

int cmd_spectrum(const Common& c, const SpectrumArgs& a) {
  const auto ast = load_netlist(a.netlist);
  const auto g = compile(a.netlist, ast, c);
  slh::SpectrumRequest req;
  req.wavelengths_nm = slh::parse_grid_spec(a.grid);
  req.monitored_port = port_index(c);
  req.n_eff = c.n_eff;
  if (a.unit != "db" && a.unit != "w") throw slh::InputError("--unit must be 'db' or 'w'");
  const bool db = a.unit == "db";

  const slh::Spectrum lin = slh::spectrum(g, req);
  const slh::Spectrum shown = db ? slh::to_db(lin) : lin;
  Manifest m{"spectrum", {a.netlist}, {"grid=" + a.grid, "unit=" + a.unit}, &c};
  if (a.oracle) m.extra.push_back("oracle_initial_dim=" + std::to_string(a.oracle_dim));
  if (!a.oracle) {
    emit(c.out, slh::write_spectrum_csv(shown, m.lines()));
    return kOk;
  }

  slh::OracleOptions opts;
  opts.initial_dim = a.oracle_dim;
  const slh::Spectrum ora = slh::oracle_spectrum(g, req, opts);
  slh::Spectrum ora_shown = ora;
  ora_shown.reference_power = lin.reference_power;
  if (db) ora_shown = slh::to_db(ora_shown);

  // Rebuild the CSV with two extra columns.
  std::istringstream base(slh::write_spectrum_csv(shown, m.lines()));
  std::ostringstream os;
  std::string line;
  std::size_t row = 0;
  double worst = 0.0;
  while (std::getline(base, line)) {
    if (line.starts_with("#")) {
      os << line << '\n';
    } else if (line.starts_with("wavelength_nm")) {
      os << line << ',' << (db ? "oracle_power_db" : "oracle_power_w") << ",relative_difference\n";
    } else {
      const double pl = lin.samples[row].power;
      const double po = ora.samples[row].power;
      const double floor = lin.reference_power * slh::kDbFloorRatio;
      const double rel = std::abs(pl - po) / std::max({pl, po, floor, std::numeric_limits<double>::min()});
      worst = std::max(worst, rel);
      os << line << ',' << sig12(ora_shown.samples[row].power) << ',' << sig12(rel) << '\n';
      ++row;
    }
  }
  emit(c.out, os.str());
  if (worst > kOracleTolerance) {
    std::cerr << "slhnet: oracle disagreement " << worst << " exceeds " << kOracleTolerance << "\n";
    return kNumerical;
  }
  return kOk;
}

struct FitArgs {
  std::string data;
  std::string netlist;
  std::string config;
  std::string trace;
};

int cmd_fit(const Common& c, const FitArgs& a) {
  const slh::Spectrum data = slh::read_spectrum_csv(slh::read_file(a.data));
  const auto ast = load_netlist(a.netlist);
  slh::FitConfig cfg = slh::parse_fit_config(slh::read_file(a.config));
  if (c.seed) cfg.seed = *c.seed;
  slh::Overrides fixed;
  for (const auto& [k, v] : parse_sets(c.sets)) fixed[k] = v;
  const auto model = slh::netlist_model(ast, fixed, cfg.names(), port_index(c), c.n_eff);
  const slh::FitResult r = slh::anneal(cfg, data, model);

  std::string trace_path = a.trace;
  if (trace_path.empty() && !c.out.empty() && c.out != "-") trace_path = c.out + ".trace.csv";
  Manifest m{"fit", {a.data, a.netlist, a.config}, {"trace=" + (trace_path.empty() ? "-" : trace_path)}, &c};
  m.extra.push_back("effective_seed=" + std::to_string(cfg.seed));
  emit(c.out, m.header() + slh::format_fit_report(r));
  if (!trace_path.empty()) emit(trace_path, m.header() + slh::format_fit_trace(r));
  return kOk;
}

int cmd_check(const Common& c) {
  const auto sets = parse_sets(c.sets);
  static const std::vector<std::string> known{"n2",     "a_eff", "lambda",        "power", "gamma_nl", "length",
                                              "q",      "ell_r", "transmittance", "n_eff", "criterion"};
  std::map<std::string, double> in;
  for (const auto& [k, v] : sets) {
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw slh::InputError("check: unknown input '" + k + "'");
    if (v.imag() != 0.0) throw slh::InputError("check: '" + k + "' must be real");
    in[k] = v.real();
  }
  auto has = [&](const char* k) { return in.count(k) > 0; };
  const double criterion = has("criterion") ? in["criterion"] : slh::kNonlinearPhaseCriterion;
  const double n_eff = has("n_eff") ? in["n_eff"] : c.n_eff;

  std::ostringstream os;
  os << "criterion=" << slh::format_real(criterion) << '\n';
  std::optional<double> gamma;
  if (has("gamma_nl")) {
    gamma = in["gamma_nl"];
  } else if (has("n2") && has("a_eff") && has("lambda")) {
    gamma = slh::nonlinear_coefficient(in["n2"], in["lambda"], in["a_eff"]);
  }
  if (gamma) os << "gamma_nl=" << sig12(*gamma) << '\n';
  bool any = false;
  if (gamma && has("length") && has("power")) {
    const double dphi = slh::nonlinear_phase(*gamma, in["length"], in["power"]);
    os << "delta_phi_nl=" << sig12(dphi) << '\n';
    os << "waveguide_nonlinearity=" << (dphi >= criterion ? "significant" : "negligible") << '\n';
    any = true;
  }
  if (gamma && has("power") && in["power"] > 0.0) {
    os << "threshold_length=" << sig12(slh::threshold_length(*gamma, in["power"], criterion)) << '\n';
    any = true;
  }
  if (has("lambda") && has("q") && has("ell_r")) {
    const double b = slh::enhancement_factor(in["lambda"], in["q"], n_eff, in["ell_r"]);
    os << "enhancement_factor=" << sig12(b) << '\n';
    if (gamma && has("power")) {
      const double ring = slh::nonlinear_phase(*gamma, in["ell_r"], in["power"]) * b;
      os << "ring_delta_phi_nl=" << sig12(ring) << '\n';
      os << "ring_nonlinearity=" << (ring >= criterion ? "significant" : "negligible") << '\n';
    }
    any = true;
  }
  if (gamma && has("power") && in["power"] > 0.0 && has("lambda")) {
    const double qt = slh::threshold_q(*gamma, in["power"], in["lambda"], n_eff, criterion);
    os << "threshold_q=" << sig12(qt) << '\n';
    if (has("q")) os << "q_over_threshold=" << sig12(in["q"] / qt) << '\n';
    any = true;
  }
  if (has("transmittance") && (has("length") || has("ell_r"))) {
    const double len = has("ell_r") ? in["ell_r"] : in["length"];
    os << "kappa=" << sig12(slh::kappa_from_transmittance(in["transmittance"], n_eff, len)) << '\n';
    any = true;
  }
  if (!any) throw slh::InputError("check: not enough inputs for any design rule");
  Manifest m{"check", {}, {}, &c};
  emit(c.out, m.header() + os.str());
  return kOk;
}

struct OracleArgs {
  std::string netlist;
  double wavelength_nm = 0.0;
  int initial_dim = 3;
};

int cmd_oracle(const Common& c, const OracleArgs& a) {
  const auto ast = load_netlist(a.netlist);
  const auto g = compile(a.netlist, ast, c);
  const double probe = slh::wavelength_nm_to_omega(a.wavelength_nm, c.n_eff);
  slh::OracleOptions opts;
  opts.initial_dim = a.initial_dim;
  const auto r = slh::oracle_steady_state(g, probe, opts);
  const auto model = slh::lower(g, probe);
  const auto ss = slh::steady_state(model);
  const Eigen::VectorXcd lin_out = slh::output_fields(model, ss.amplitudes);

  std::ostringstream os;
  for (std::size_t i = 0; i < r.mode_amplitudes.size(); ++i)
    os << "mode." << g.registry.name(i) << '=' << slh::format_complex_literal(r.mode_amplitudes[i]) << '\n';
  double worst = 0.0;
  for (std::size_t k = 0; k < r.outputs.size(); ++k) {
    const double po = std::norm(r.outputs[k]);
    const double pl = std::norm(lin_out(k));
    const double rel = std::abs(po - pl) / std::max({po, pl, std::numeric_limits<double>::min()});
    if (po > 0.0 || pl > 0.0) worst = std::max(worst, rel);
    os << "port." << k + 1 << ".power=" << sig12(po) << '\n';
    os << "port." << k + 1 << ".linear_power=" << sig12(pl) << '\n';
  }
  os << "dims=" << r.dims.front() << '\n';
  os << "truncation_change=" << sig12(r.relative_change) << '\n';
  os << "mean_photons=" << sig12(r.mean_photons) << '\n';
  os << "purity=" << sig12(r.purity) << '\n';
  os << "max_relative_difference=" << sig12(worst) << '\n';
  Manifest m{"oracle", {a.netlist}, {"wavelength_nm=" + slh::format_real(a.wavelength_nm)}, &c};
  emit(c.out, m.header() + os.str());
  return worst > kOracleTolerance ? kNumerical : kOk;
}

void add_common(CLI::App* app, Common& c, bool with_port = true) {
  app->add_option("--set", c.sets, "Override a parameter, NAME=VALUE (repeatable)");
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--n-eff", c.n_eff, "Effective index for wavelength conversion");
  app->add_option("--out", c.out, "Output path (default: stdout)");
  if (with_port) app->add_option("--port", c.port, "Monitored port, 1-based");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLH network composition, spectra, oracle cross-checks and fitting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  std::string compose_netlist;
  auto* compose = app.add_subcommand("compose", "Print the composed (S, L, H) triple of a netlist");
  compose->add_option("netlist", compose_netlist)->required();
  add_common(compose, common, false);

  SpectrumArgs sa;
  auto* spec = app.add_subcommand("spectrum", "Sweep the steady-state output power of a linear netlist");
  spec->add_option("netlist", sa.netlist)->required();
  spec->add_option("--grid", sa.grid, "start_nm:stop_nm:count")->required();
  spec->add_option("--unit", sa.unit, "db or w");
  spec->add_flag("--oracle", sa.oracle, "Cross-check every point against the Fock oracle");
  spec->add_option("--oracle-dim", sa.oracle_dim, "Initial per-mode Fock truncation for --oracle");
  add_common(spec, common);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Anneal netlist parameters against a measured spectrum");
  fit->add_option("data", fa.data, "Spectrum CSV")->required();
  fit->add_option("netlist", fa.netlist)->required();
  fit->add_option("--config", fa.config, "Fit configuration file")->required();
  fit->add_option("--trace", fa.trace, "Objective trace CSV path");
  add_common(fit, common);

  auto* check = app.add_subcommand("check", "Evaluate nonlinearity design rules");
  add_common(check, common, false);

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Steady state from the truncated-Fock master equation");
  oracle->add_option("netlist", oa.netlist)->required();
  oracle->add_option("--wavelength", oa.wavelength_nm, "Probe wavelength in nm")->required();
  oracle->add_option("--initial-dim", oa.initial_dim, "Initial per-mode Fock truncation");
  add_common(oracle, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*compose) return cmd_compose(common, compose_netlist);
    if (*spec) return cmd_spectrum(common, sa);
    if (*fit) return cmd_fit(common, fa);
    if (*check) return cmd_check(common);
    if (*oracle) return cmd_oracle(common, oa);
  } catch (const slh::InputError& e) {
    std::cerr << "slhnet: " << e.what() << "\n";
    return kInput;
  } catch (const slh::NumericalError& e) {
    std::cerr << "slhnet: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "slhnet: " << e.what() << "\n";
    return kNumerical;
  }
  return kInput;
}
