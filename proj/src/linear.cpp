#include "slh/linear.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "slh/error.hpp"
#include "slh/text.hpp"

namespace slh {

namespace {

constexpr double kSingularRcond = 1e-14;

Eigen::VectorXcd input_vector(std::span<const Complex> inputs, Eigen::Index n_ports) {
  Eigen::VectorXcd in = Eigen::VectorXcd::Zero(n_ports);
  if (inputs.empty()) return in;
  if (static_cast<Eigen::Index>(inputs.size()) != n_ports)
    throw InputError("expected " + std::to_string(n_ports) + " input amplitudes, got " +
                     std::to_string(inputs.size()));
  for (Eigen::Index k = 0; k < n_ports; ++k) in(k) = inputs[k];
  return in;
}

std::string format_sig(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

LinearModel LinearModel::at_probe(double new_probe_omega) const {
  LinearModel m = *this;
  const double shift = new_probe_omega - probe_omega;
  for (Eigen::Index i = 0; i < m.omega.rows(); ++i) m.omega(i, i) -= shift;
  m.probe_omega = new_probe_omega;
  return m;
}

LinearModel lower(const SlhTriple& g, double probe_omega) {
  require_valid(g);
  const std::size_t n = g.registry.size();
  const std::size_t ports = g.n_ports();

  LinearModel m;
  m.registry = g.registry;
  m.probe_omega = probe_omega;
  m.scattering = scalar_scattering(g);
  m.omega = Eigen::MatrixXcd::Zero(n, n);
  m.coupling = Eigen::MatrixXcd::Zero(ports, n);
  m.h_lin = Eigen::VectorXcd::Zero(n);
  m.l0 = Eigen::VectorXcd::Zero(ports);

  auto single = [](const Monomial& mono, bool creation_side) -> std::size_t {
    for (std::size_t i = 0; i < mono.n_modes(); ++i)
      if ((creation_side ? mono[i].creation : mono[i].annihilation) == 1) return i;
    return mono.n_modes();
  };

  for (const auto& [mono, c] : g.H.terms()) {
    const unsigned cr = mono.total_creation();
    const unsigned an = mono.total_annihilation();
    if (cr == 0 && an == 0) continue;  // energy offset
    if (cr == 1 && an == 1) {
      m.omega(single(mono, true), single(mono, false)) += c;
    } else if (cr == 1 && an == 0) {
      m.h_lin(single(mono, true)) += c;
    } else if (cr == 0 && an == 1) {
      // Hermitian partner of the a' term; already checked by require_valid.
    } else {
      throw NonlinearError("H term '" + to_string(mono, g.registry) + "' is not quadratic-plus-linear");
    }
  }

  for (std::size_t k = 0; k < ports; ++k) {
    for (const auto& [mono, c] : g.L[k].terms()) {
      if (mono.is_identity()) {
        m.l0(k) += c;
      } else if (mono.total_creation() == 0 && mono.total_annihilation() == 1) {
        m.coupling(k, single(mono, false)) += c;
      } else {
        throw NonlinearError("L[" + std::to_string(k + 1) + "] term '" + to_string(mono, g.registry) +
                             "' is not affine in annihilation operators");
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) m.omega(i, i) -= probe_omega;
  return m;
}

SteadyState steady_state(const LinearModel& m, std::span<const Complex> inputs) {
  const Eigen::VectorXcd in = input_vector(inputs, m.n_ports());
  const Eigen::MatrixXcd cd = m.coupling.adjoint();
  const Eigen::VectorXcd d = Complex(0, -1) * m.h_lin - 0.5 * cd * m.l0 - cd * (m.scattering * in);

  SteadyState out;
  if (m.n_modes() == 0) return out;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m.drift());
  out.rcond = lu.rcond();
  if (!(out.rcond > kSingularRcond)) {
    std::ostringstream msg;
    msg << "drift matrix is singular (rcond " << out.rcond << ")";
    throw SingularDrift(msg.str());
  }
  out.amplitudes = lu.solve(-d);
  return out;
}

Eigen::VectorXcd output_fields(const LinearModel& m, const Eigen::VectorXcd& amplitudes,
                               std::span<const Complex> inputs) {
  const Eigen::VectorXcd in = input_vector(inputs, m.n_ports());
  Eigen::VectorXcd out = m.l0 + m.scattering * in;
  if (m.n_modes() > 0) out += m.coupling * amplitudes;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> Spectrum::wavelengths() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.wavelength_nm);
  return v;
}

std::vector<double> Spectrum::powers() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(s.power);
  return v;
}

GridPointError::GridPointError(std::size_t idx, double wl, const std::string& what)
    : SingularDrift("grid point " + std::to_string(idx) + " (" + format_sig(wl, 12) + " nm): " + what),
      index(idx),
      wavelength_nm(wl) {}

Spectrum spectrum(const SlhTriple& g, const SpectrumRequest& request) {
  return spectrum(lower(g, 0.0), request);
}

Spectrum spectrum(const LinearModel& base, const SpectrumRequest& request) {
  const auto& grid = request.wavelengths_nm;
  if (grid.empty()) throw InputError("wavelength grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
      throw InputError("grid point " + std::to_string(i) + " is not a positive wavelength");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InputError("wavelength grid must be strictly increasing");
  }
  if (request.monitored_port >= static_cast<std::size_t>(base.n_ports()))
    throw InputError("monitored port " + std::to_string(request.monitored_port + 1) + " does not exist");
  const Eigen::VectorXcd in = input_vector(request.inputs, base.n_ports());

  Spectrum out;
  out.unit = PowerUnit::Watt;
  out.reference_power = in.squaredNorm() + base.l0.squaredNorm();
  out.samples.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const LinearModel m = base.at_probe(wavelength_nm_to_omega(grid[i], request.n_eff));
    SteadyState ss;
    try {
      ss = steady_state(m, request.inputs);
    } catch (const SingularDrift& e) {
      throw GridPointError(i, grid[i], e.what());
    }
    const Eigen::VectorXcd fields = output_fields(m, ss.amplitudes, request.inputs);
    out.samples.push_back({grid[i], std::norm(fields(request.monitored_port))});
  }
  return out;
}

Spectrum to_db(const Spectrum& linear) {
  if (linear.unit == PowerUnit::Decibel) return linear;
  Spectrum out = linear;
  out.unit = PowerUnit::Decibel;
  for (auto& s : out.samples) {
    const double ratio = linear.reference_power > 0.0 ? s.power / linear.reference_power : 0.0;
    s.power = ratio < kDbFloorRatio ? kDbFloor : 10.0 * std::log10(ratio);
  }
  return out;
}

Spectrum to_linear(const Spectrum& db) {
  if (db.unit == PowerUnit::Watt) return db;
  Spectrum out = db;
  out.unit = PowerUnit::Watt;
  for (auto& s : out.samples) s.power = db.reference_power * std::pow(10.0, s.power / 10.0);
  return out;
}

std::vector<double> linear_grid(double start_nm, double stop_nm, std::size_t count) {
  if (count == 0) throw InputError("grid needs at least one point");
  if (!(start_nm > 0.0)) throw InputError("grid start must be a positive wavelength");
  if (count > 1 && !(stop_nm > start_nm)) throw InputError("grid stop must exceed start");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = count == 1 ? start_nm : start_nm + (stop_nm - start_nm) * static_cast<double>(i) / (count - 1);
  return g;
}

std::vector<double> parse_grid_spec(const std::string& spec) {
  const auto c1 = spec.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (c2 == std::string::npos) throw InputError("grid spec must look like start_nm:stop_nm:count");
  auto start = parse_real(spec.substr(0, c1));
  auto stop = parse_real(spec.substr(c1 + 1, c2 - c1 - 1));
  auto count = parse_real(spec.substr(c2 + 1));
  if (!start || !stop || !count || *count < 1 || *count != std::floor(*count))
    throw InputError("grid spec must look like start_nm:stop_nm:count");
  return linear_grid(*start, *stop, static_cast<std::size_t>(*count));
}

std::string write_spectrum_csv(const Spectrum& s, const std::vector<std::string>& preamble) {
  std::ostringstream os;
  for (const auto& line : preamble) os << "# " << line << '\n';
  os << "# reference_power=" << format_sig(s.reference_power, 12) << '\n';
  os << "wavelength_nm," << (s.unit == PowerUnit::Decibel ? "power_db" : "power_w") << '\n';
  for (const auto& x : s.samples) os << format_sig(x.wavelength_nm, 12) << ',' << format_sig(x.power, 12) << '\n';
  return os.str();
}

Spectrum read_spectrum_csv(const std::string& text) {
  Spectrum out;
  std::istringstream is(text);
  std::string line;
  int row = 0;
  bool have_header = false;
  std::string power_column = "power";
  while (std::getline(is, line)) {
    ++row;
    std::string_view v = trim(line);
    if (v.empty()) continue;
    if (v.front() == '#') {
      constexpr std::string_view key = "reference_power=";
      auto body = trim(v.substr(1));
      if (body.starts_with(key)) {
        auto ref = parse_real(body.substr(key.size()));
        if (!ref) throw InputError("row " + std::to_string(row) + ": bad reference_power");
        out.reference_power = *ref;
      }
      continue;
    }
    std::vector<std::string_view> cols;
    for (std::size_t start = 0;;) {
      const auto comma = v.find(',', start);
      cols.push_back(trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!have_header) {
      if (cols[0] != "wavelength_nm") throw InputError("row " + std::to_string(row) + ": missing column 'wavelength_nm'");
      if (cols.size() > 1 && cols[1] == "power_db")
        out.unit = PowerUnit::Decibel;
      else if (cols.size() > 1 && cols[1] == "power_w")
        out.unit = PowerUnit::Watt;
      else
        throw InputError("row " + std::to_string(row) + ": missing column 'power_db' or 'power_w'");
      power_column = std::string(cols[1]);
      have_header = true;
      continue;
    }
    if (cols.size() < 2) throw InputError("row " + std::to_string(row) + ": missing column '" + power_column + "'");
    auto wl = parse_real(cols[0]);
    if (!wl) throw InputError("row " + std::to_string(row) + ", column 'wavelength_nm': not a number");
    auto p = parse_real(cols[1]);
    if (!p) throw InputError("row " + std::to_string(row) + ", column '" + power_column + "': not a number");
    if (!out.samples.empty() && !(*wl > out.samples.back().wavelength_nm))
      throw InputError("row " + std::to_string(row) + ", column 'wavelength_nm': not strictly increasing");
    out.samples.push_back({*wl, *p});
  }
  if (!have_header) throw InputError("spectrum CSV has no header row");
  if (out.samples.empty()) throw InputError("spectrum CSV has no data rows");
  return out;
}

}  // namespace slh
