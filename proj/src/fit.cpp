#include "slh/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "slh/text.hpp"

namespace slh {

namespace {

constexpr double kGridMatchTolerance = 1e-9;

std::string sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<double> db_powers(const Spectrum& s) { return to_db(s).powers(); }

}  // namespace

// ---------------------------------------------------------------------------
// Forward models

Spectrum ccd_port_spectrum(const CcdParams& p, const std::vector<double>& grid_nm) {
  validate_params(p);
  const double t = std::sqrt(1.0 - p.eta);
  const double sk = std::sqrt(p.kappa);
  const Complex e_phi = std::polar(1.0, p.phi);
  const Complex inv_2i(0.0, -0.5);

  // Port-1 row of C; the drive enters only through port 3's constant term.
  const Eigen::RowVector2cd c0(sk, sk * t * e_phi);
  Eigen::Matrix<Complex, 5, 2> c;
  c << sk, sk * t * e_phi, 0.0, -std::sqrt(p.kappa * p.eta) * e_phi, sk, sk, std::sqrt(p.gamma_p), 0.0, 0.0,
      std::sqrt(p.gamma_c);
  Eigen::Matrix2cd omega;
  omega << p.omega_p(), -p.kappa * inv_2i * (1.0 - e_phi * t), p.kappa * inv_2i * (1.0 - std::conj(e_phi) * t),
      p.omega_c();
  const Eigen::Matrix2cd a0 = Complex(0.0, -1.0) * omega - 0.5 * c.adjoint() * c;
  // d = -i h - C' l0 / 2 with h = (sqrt(k)/2i) alpha (1, 1) and l0 = alpha e_3.
  const Complex h = sk * inv_2i * p.drive;
  const Eigen::Vector2cd d = Eigen::Vector2cd(Complex(0.0, -1.0) * h, Complex(0.0, -1.0) * h) -
                             0.5 * c.row(2).adjoint() * p.drive;

  Spectrum out;
  out.unit = PowerUnit::Watt;
  out.reference_power = std::norm(p.drive);
  out.samples.reserve(grid_nm.size());
  for (std::size_t i = 0; i < grid_nm.size(); ++i) {
    const double probe = wavelength_nm_to_omega(grid_nm[i], p.n_eff);
    Eigen::Matrix2cd a = a0;
    a(0, 0) += Complex(0.0, probe);
    a(1, 1) += Complex(0.0, probe);
    const Complex det = a.determinant();
    if (!(std::abs(det) > 1e-14 * a.squaredNorm())) throw GridPointError(i, grid_nm[i], "drift matrix is singular");
    const Eigen::Vector2cd x = -(a.inverse() * d);
    out.samples.push_back({grid_nm[i], std::norm((c0 * x)(0))});
  }
  return out;
}

CcdParams with_values(CcdParams p, std::span<const std::string> names, std::span<const double> values) {
  if (names.size() != values.size()) throw InputError("parameter names and values differ in length");
  for (std::size_t k = 0; k < names.size(); ++k) {
    const std::string& n = names[k];
    const double v = values[k];
    if (n == "lambda_p_nm") p.lambda_p_nm = v;
    else if (n == "lambda_c_nm") p.lambda_c_nm = v;
    else if (n == "kappa") p.kappa = v;
    else if (n == "gamma_p") p.gamma_p = v;
    else if (n == "gamma_c") p.gamma_c = v;
    else if (n == "phi") p.phi = v;
    else if (n == "eta") p.eta = v;
    else throw InputError("'" + n + "' is not a CCD fit parameter");
  }
  return p;
}

SpectrumModel ccd_model(const CcdParams& base, std::vector<std::string> free_names) {
  with_values(base, free_names, std::vector<double>(free_names.size(), 0.0));  // name check
  return [base, names = std::move(free_names)](std::span<const double> values, const std::vector<double>& grid) {
    return ccd_port_spectrum(with_values(base, names, values), grid);
  };
}

SpectrumModel netlist_model(NetlistAst ast, Overrides fixed, std::vector<std::string> free_names,
                            std::size_t monitored_port, double n_eff) {
  for (const auto& n : free_names)
    if (fixed.count(n)) throw InputError("'" + n + "' is both fixed and free");
  return [ast = std::move(ast), fixed = std::move(fixed), names = std::move(free_names), monitored_port, n_eff](
             std::span<const double> values, const std::vector<double>& grid) {
    Overrides o = fixed;
    for (std::size_t k = 0; k < names.size(); ++k) o[names[k]] = values[k];
    const SlhTriple g = compile_netlist(ast, o, CompileOptions{n_eff});
    SpectrumRequest req;
    req.wavelengths_nm = grid;
    req.monitored_port = monitored_port;
    req.n_eff = n_eff;
    return spectrum(g, req);
  };
}

// ---------------------------------------------------------------------------
// Objective

double objective(const Spectrum& model, const Spectrum& data) {
  if (data.samples.empty()) throw InputError("data spectrum is empty");
  if (model.samples.size() != data.samples.size()) throw InputError("model and data grids differ in length");
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const double a = model.samples[i].wavelength_nm;
    const double b = data.samples[i].wavelength_nm;
    if (std::abs(a - b) > kGridMatchTolerance * std::abs(b))
      throw InputError("model and data grids differ at point " + std::to_string(i));
  }
  const auto m = db_powers(model);
  const auto d = db_powers(data);
  const double n = static_cast<double>(d.size());
  double offset = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) offset += d[i] - m[i];
  offset /= n;
  double sse = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = d[i] - m[i] - offset;
    sse += r * r;
  }
  const double f = sse / n;
  if (!std::isfinite(f)) throw NumericalError("objective is not finite");
  return f;
}

double objective(const SpectrumModel& model, std::span<const double> values, const Spectrum& data) {
  return objective(model(values, data.wavelengths()), data);
}

// ---------------------------------------------------------------------------
// Configuration

std::vector<std::string> FitConfig::names() const {
  std::vector<std::string> v;
  for (const auto& p : parameters) v.push_back(p.name);
  return v;
}

std::vector<double> FitConfig::initial_values() const {
  std::vector<double> v;
  for (const auto& p : parameters) v.push_back(p.initial);
  return v;
}

void validate_config(const FitConfig& cfg) {
  if (cfg.parameters.empty()) throw InputError("fit needs at least one free parameter");
  for (const auto& p : cfg.parameters) {
    if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower <= p.upper))
      throw InputError("bounds of '" + p.name + "' are not ordered");
    if (!(p.initial >= p.lower && p.initial <= p.upper))
      throw InputError("initial value of '" + p.name + "' lies outside its bounds");
    if (!(p.step >= 0.0) || !std::isfinite(p.step)) throw InputError("step of '" + p.name + "' must be non-negative");
    if (p.periodic && !(p.upper > p.lower)) throw InputError("periodic parameter '" + p.name + "' needs a period");
  }
  for (std::size_t i = 0; i < cfg.parameters.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (cfg.parameters[i].name == cfg.parameters[j].name)
        throw InputError("parameter '" + cfg.parameters[i].name + "' is listed twice");
  const auto& s = cfg.schedule;
  if (!(s.cooling > 0.0 && s.cooling < 1.0)) throw InputError("cooling factor must lie in (0, 1)");
  if (s.steps_per_temperature < 1) throw InputError("steps_per_temperature must be positive");
  if (!(s.stop_ratio > 0.0 && s.stop_ratio < 1.0)) throw InputError("stop_ratio must lie in (0, 1)");
  if (s.max_evaluations < 1) throw InputError("max_evaluations must be positive");
  if (s.restarts < 0) throw InputError("restarts must be non-negative");
  if (s.initial_temperature && !(*s.initial_temperature > 0.0))
    throw InputError("initial_temperature must be positive");
}

FitConfig parse_fit_config(const std::string& text) {
  FitConfig cfg;
  for (const auto& kv : parse_key_values(text)) {
    auto where = [&] { return "line " + std::to_string(kv.line) + " (" + kv.key + ")"; };
    auto real = [&](std::string_view s) {
      auto v = parse_real(s);
      if (!v) throw InputError(where() + ": expected a number");
      return *v;
    };
    auto integer = [&](std::string_view s) {
      const double v = real(s);
      if (v != std::floor(v) || std::abs(v) > 9e15) throw InputError(where() + ": expected an integer");
      return static_cast<long long>(v);
    };
    if (kv.key.starts_with("fit.")) {
      FreeParameter p;
      p.name = kv.key.substr(4);
      if (p.name.empty()) throw InputError(where() + ": missing parameter name");
      std::istringstream is(kv.value);
      std::vector<std::string> f;
      for (std::string w; is >> w;) f.push_back(w);
      if (!f.empty() && f.back() == "periodic") {
        p.periodic = true;
        f.pop_back();
      }
      if (f.size() != 3 && f.size() != 4) throw InputError(where() + ": expected LOWER UPPER INITIAL [STEP] [periodic]");
      p.lower = real(f[0]);
      p.upper = real(f[1]);
      p.initial = real(f[2]);
      if (f.size() == 4) p.step = real(f[3]);
      cfg.parameters.push_back(p);
    } else if (kv.key == "seed") {
      const long long v = integer(kv.value);
      if (v < 0) throw InputError(where() + ": seed must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(v);
    } else if (kv.key == "initial_temperature") {
      if (kv.value != "auto") cfg.schedule.initial_temperature = real(kv.value);
    } else if (kv.key == "cooling") {
      cfg.schedule.cooling = real(kv.value);
    } else if (kv.key == "steps_per_temperature") {
      cfg.schedule.steps_per_temperature = static_cast<int>(integer(kv.value));
    } else if (kv.key == "stop_ratio") {
      cfg.schedule.stop_ratio = real(kv.value);
    } else if (kv.key == "max_evaluations") {
      cfg.schedule.max_evaluations = static_cast<long>(integer(kv.value));
    } else if (kv.key == "restarts") {
      cfg.schedule.restarts = static_cast<int>(integer(kv.value));
    } else if (kv.key == "restart_threshold") {
      cfg.schedule.restart_threshold = real(kv.value);
    } else if (kv.key == "target_objective") {
      cfg.schedule.target_objective = real(kv.value);
    } else {
      throw InputError(where() + ": unknown key");
    }
  }
  validate_config(cfg);
  return cfg;
}

std::string format_fit_config(const FitConfig& cfg) {
  std::ostringstream os;
  const auto& s = cfg.schedule;
  os << "seed=" << cfg.seed << '\n';
  os << "initial_temperature=" << (s.initial_temperature ? format_real(*s.initial_temperature) : "auto") << '\n';
  os << "cooling=" << format_real(s.cooling) << '\n';
  os << "steps_per_temperature=" << s.steps_per_temperature << '\n';
  os << "stop_ratio=" << format_real(s.stop_ratio) << '\n';
  os << "max_evaluations=" << s.max_evaluations << '\n';
  os << "restarts=" << s.restarts << '\n';
  os << "restart_threshold=" << format_real(s.restart_threshold) << '\n';
  os << "target_objective=" << format_real(s.target_objective) << '\n';
  for (const auto& p : cfg.parameters) {
    os << "fit." << p.name << '=' << format_real(p.lower) << ' ' << format_real(p.upper) << ' '
       << format_real(p.initial) << ' ' << format_real(p.step);
    if (p.periodic) os << " periodic";
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Annealing

namespace {

class Annealer {
 public:
  Annealer(const FitConfig& cfg, const Spectrum& data, const SpectrumModel& model)
      : cfg_(cfg), data_(data), model_(model), rng_(cfg.seed) {
    for (std::size_t i = 0; i < cfg.parameters.size(); ++i)
      if (cfg.parameters[i].upper > cfg.parameters[i].lower) movable_.push_back(i);
  }

  FitResult run() {
    const auto& s = cfg_.schedule;
    const std::size_t n = cfg_.parameters.size();
    result_.names = cfg_.names();
    result_.best_objective = std::numeric_limits<double>::infinity();

    std::vector<double> start(n);
    for (std::size_t i = 0; i < n; ++i) start[i] = to_unit(i, cfg_.parameters[i].initial);
    // The starting point must evaluate; later failures just reject proposals.
    double f0 = objective(model_, to_values(start), data_);
    ++result_.evaluations;
    record_best(start, f0);
    if (movable_.empty() && !done()) throw InputError("all bounds are degenerate; no proposal is feasible");

    for (int restart = 0; restart <= s.restarts && !done(); ++restart) {
      result_.restarts_used = restart;
      if (restart > 0) {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (std::size_t i : movable_) start[i] = uni(rng_);
        f0 = evaluate(start);
        if (!std::isfinite(f0)) continue;
      }
      run_chain(restart, start, f0);
      if (result_.best_objective <= s.restart_threshold) break;
    }
    result_.converged = result_.best_objective <= s.restart_threshold;
    return std::move(result_);
  }

 private:
  double to_unit(std::size_t i, double x) const {
    const auto& p = cfg_.parameters[i];
    return p.upper > p.lower ? (x - p.lower) / (p.upper - p.lower) : 0.0;
  }

  std::vector<double> to_values(const std::vector<double>& u) const {
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto& p = cfg_.parameters[i];
      x[i] = p.upper > p.lower ? std::clamp(p.lower + u[i] * (p.upper - p.lower), p.lower, p.upper) : p.lower;
    }
    return x;
  }

  bool done() const {
    return result_.best_objective <= cfg_.schedule.target_objective ||
           result_.evaluations >= cfg_.schedule.max_evaluations;
  }

  double evaluate(const std::vector<double>& u) {
    ++result_.evaluations;
    double f;
    try {
      f = objective(model_, to_values(u), data_);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
    record_best(u, f);
    return f;
  }

  void record_best(const std::vector<double>& u, double f) {
    if (f < result_.best_objective) {
      result_.best_objective = f;
      result_.best = to_values(u);
    }
  }

  void run_chain(int restart, std::vector<double> u, double f) {
    const auto& s = cfg_.schedule;
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::vector<double> step(u.size(), 0.0);
    for (std::size_t i : movable_) {
      const auto& p = cfg_.parameters[i];
      step[i] = p.step > 0.0 ? p.step / (p.upper - p.lower) : 0.1;
    }
    const double t0 = s.initial_temperature.value_or(std::max(f, std::numeric_limits<double>::min()));
    double temp = t0;
    std::size_t cursor = 0;
    for (int stage = 0; temp >= t0 * s.stop_ratio && !done(); ++stage, temp *= s.cooling) {
      std::vector<int> tried(u.size(), 0), accepted(u.size(), 0);
      int total_accepted = 0;
      int moves = 0;
      for (; moves < s.steps_per_temperature && !done(); ++moves) {
        const std::size_t i = movable_[cursor++ % movable_.size()];
        std::vector<double> prop = u;
        prop[i] += step[i] * gauss(rng_);
        if (cfg_.parameters[i].periodic) prop[i] -= std::floor(prop[i]);
        else prop[i] = std::clamp(prop[i], 0.0, 1.0);
        const double fp = evaluate(prop);
        ++tried[i];
        const bool take = fp <= f || (std::isfinite(fp) && uni(rng_) < std::exp(-(fp - f) / temp));
        if (take) {
          u = std::move(prop);
          f = fp;
          ++accepted[i];
          ++total_accepted;
        }
      }
      for (std::size_t i : movable_) {
        if (tried[i] == 0) continue;
        const double r = static_cast<double>(accepted[i]) / tried[i];
        if (r > 0.6) step[i] *= 1.0 + 2.0 * (r - 0.6) / 0.4;
        else if (r < 0.4) step[i] /= 1.0 + 2.0 * (0.4 - r) / 0.4;
        step[i] = std::clamp(step[i], 1e-15, 1.0);
      }
      result_.trace.push_back({restart, stage, result_.evaluations, temp, f, result_.best_objective,
                               moves ? static_cast<double>(total_accepted) / moves : 0.0});
    }
  }

  const FitConfig& cfg_;
  const Spectrum& data_;
  const SpectrumModel& model_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> movable_;
  FitResult result_;
};

}  // namespace

FitResult anneal(const FitConfig& cfg, const Spectrum& data, const SpectrumModel& model) {
  validate_config(cfg);
  if (data.samples.empty()) throw InputError("data spectrum is empty");
  return Annealer(cfg, data, model).run();
}

Spectrum synth_data(const SpectrumModel& model, std::span<const double> values, const std::vector<double>& grid_nm,
                    double noise_db, std::uint64_t seed) {
  if (!(noise_db >= 0.0) || !std::isfinite(noise_db)) throw InputError("noise level must be non-negative");
  Spectrum s = to_db(model(values, grid_nm));
  if (noise_db > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_db);
    for (auto& x : s.samples) x.power += gauss(rng);
  }
  return s;
}

Spectrum synth_data(const CcdParams& p, const std::vector<double>& grid_nm, double noise_db, std::uint64_t seed) {
  return synth_data(ccd_model(p, {}), {}, grid_nm, noise_db, seed);
}

std::string format_fit_report(const FitResult& r) {
  std::ostringstream os;
  for (std::size_t k = 0; k < r.names.size(); ++k) os << r.names[k] << '=' << format_real(r.best[k]) << '\n';
  os << "objective=" << format_real(r.best_objective) << '\n';
  os << "evaluations=" << r.evaluations << '\n';
  os << "restarts_used=" << r.restarts_used << '\n';
  os << "converged=" << (r.converged ? "true" : "false") << '\n';
  return os.str();
}

std::string format_fit_trace(const FitResult& r) {
  std::ostringstream os;
  os << "restart,stage,evaluations,temperature,current,best,acceptance\n";
  for (const auto& t : r.trace)
    os << t.restart << ',' << t.stage << ',' << t.evaluations << ',' << sig12(t.temperature) << ','
       << sig12(t.current) << ',' << sig12(t.best) << ',' << sig12(t.acceptance) << '\n';
  return os.str();
}

}  // namespace slh
