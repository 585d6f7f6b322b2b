#include "slh/ccd.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "slh/error.hpp"
#include "slh/text.hpp"

namespace slh {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(what) + " must be positive");
}

}  // namespace

double wavelength_nm_to_omega(double lambda_nm, double n_eff) {
  require_positive(lambda_nm, "wavelength");
  require_positive(n_eff, "effective index");
  return 2.0 * std::numbers::pi * kSpeedOfLight / (n_eff * lambda_nm * 1e-9);
}

double omega_to_wavelength_nm(double omega, double n_eff) {
  require_positive(omega, "angular frequency");
  require_positive(n_eff, "effective index");
  return 2.0 * std::numbers::pi * kSpeedOfLight / (n_eff * omega) * 1e9;
}

void validate_params(const CcdParams& p) {
  require_positive(p.lambda_p_nm, "lambda_p_nm");
  require_positive(p.lambda_c_nm, "lambda_c_nm");
  require_positive(p.n_eff, "n_eff");
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(std::string(what) + " must be non-negative");
  };
  nonneg(p.kappa, "kappa");
  nonneg(p.gamma_p, "gamma_p");
  nonneg(p.gamma_c, "gamma_c");
  if (!(p.eta >= 0.0 && p.eta <= 1.0)) throw InputError("eta must lie in [0, 1]");
  if (!std::isfinite(p.phi)) throw InputError("phi must be finite");
  if (!std::isfinite(p.drive.real()) || !std::isfinite(p.drive.imag()))
    throw InputError("drive must be finite");
}

ModeRegistry ccd_registry() { return ModeRegistry({"a", "b"}); }

SlhTriple build_ccd(const CcdParams& p) {
  validate_params(p);
  const ModeRegistry reg = ccd_registry();
  const ModeId a = reg.mode("a");
  const ModeId b = reg.mode("b");

  const SlhTriple gp1 = mirror(reg, a, p.kappa, p.omega_p());
  const SlhTriple gp2 = loss_mirror(reg, a, p.kappa);
  const SlhTriple gp3 = loss_mirror(reg, a, p.gamma_p);
  const SlhTriple gc1 = mirror(reg, b, p.kappa, p.omega_c());
  const SlhTriple gc2 = loss_mirror(reg, b, p.kappa);
  const SlhTriple gc3 = loss_mirror(reg, b, p.gamma_c);
  const SlhTriple gw = coherent_drive(reg, p.drive);
  const SlhTriple gphi = phase_shifter(reg, p.phi);
  const SlhTriple g1 = passthrough(reg, 1);
  const SlhTriple geta = beamsplitter(reg, p.eta);

  const SlhTriple feedback =
      series(concat(gp2, g1), series(geta, series(concat(gphi, g1), concat(gc2, g1))));
  const SlhTriple forward = series(gc1, series(gp1, gw));
  return concat(concat(concat(feedback, forward), gp3), gc3);
}

SlhTriple ccd_closed_form(const CcdParams& p) {
  validate_params(p);
  const ModeRegistry reg = ccd_registry();
  const OperatorExpr a = annihilation(reg, "a");
  const OperatorExpr b = annihilation(reg, "b");
  const OperatorExpr ad = adjoint(a);
  const OperatorExpr bd = adjoint(b);
  auto c = [&](Complex v) { return OperatorExpr::constant(reg, v); };

  const double t = std::sqrt(1.0 - p.eta);
  const double r = std::sqrt(p.eta);
  const Complex e_phi = std::polar(1.0, p.phi);
  const double sk = std::sqrt(p.kappa);
  const Complex alpha = p.drive;
  const Complex inv_2i(0.0, -0.5);

  SlhTriple g = passthrough(reg, 5);
  g.S[0][0] = c(t * e_phi);
  g.S[0][1] = c(r);
  g.S[1][0] = c(-r * e_phi);
  g.S[1][1] = c(t);

  g.L[0] = sk * (a + t * e_phi * b);
  g.L[1] = -std::sqrt(p.kappa * p.eta) * e_phi * b;
  g.L[2] = sk * (a + b) + alpha;
  g.L[3] = std::sqrt(p.gamma_p) * a;
  g.L[4] = std::sqrt(p.gamma_c) * b;

  const Complex ba_coeff = p.kappa * inv_2i * (1.0 - std::conj(e_phi) * t);
  const Complex ab_coeff = -p.kappa * inv_2i * (1.0 - e_phi * t);
  g.H = p.omega_p() * (ad * a) + p.omega_c() * (bd * b) +
        sk * inv_2i * (alpha * ad - std::conj(alpha) * a) +
        sk * inv_2i * (alpha * bd - std::conj(alpha) * b) + ba_coeff * (bd * a) + ab_coeff * (ad * b);
  return g;
}

CcdParams parse_ccd_params(const std::string& text, CcdParams base) {
  for (const auto& kv : parse_key_values(text)) {
    auto where = [&] { return "line " + std::to_string(kv.line) + " (" + kv.key + ")"; };
    if (kv.key == "drive") {
      auto v = parse_complex(kv.value);
      if (!v) throw InputError(where() + ": expected a complex literal");
      base.drive = *v;
      continue;
    }
    auto v = parse_real(kv.value);
    if (!v) throw InputError(where() + ": expected a real number");
    if (kv.key == "lambda_p_nm") base.lambda_p_nm = *v;
    else if (kv.key == "lambda_c_nm") base.lambda_c_nm = *v;
    else if (kv.key == "kappa") base.kappa = *v;
    else if (kv.key == "gamma_p") base.gamma_p = *v;
    else if (kv.key == "gamma_c") base.gamma_c = *v;
    else if (kv.key == "phi") base.phi = *v;
    else if (kv.key == "eta") base.eta = *v;
    else if (kv.key == "n_eff") base.n_eff = *v;
    else throw InputError(where() + ": unknown parameter");
  }
  validate_params(base);
  return base;
}

std::string format_ccd_params(const CcdParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "lambda_p_nm=" << p.lambda_p_nm << '\n'
     << "lambda_c_nm=" << p.lambda_c_nm << '\n'
     << "kappa=" << p.kappa << '\n'
     << "gamma_p=" << p.gamma_p << '\n'
     << "gamma_c=" << p.gamma_c << '\n'
     << "phi=" << p.phi << '\n'
     << "eta=" << p.eta << '\n'
     << "drive=" << format_complex_literal(p.drive) << '\n'
     << "n_eff=" << p.n_eff << '\n';
  return os.str();
}

double nonlinear_coefficient(double n2, double lambda, double a_eff) {
  require_positive(n2, "n2");
  require_positive(lambda, "wavelength");
  require_positive(a_eff, "effective area");
  return 2.0 * std::numbers::pi * n2 / (lambda * a_eff);
}

double nonlinear_phase(double gamma_nl, double length, double power) {
  require_positive(gamma_nl, "nonlinear coefficient");
  require_positive(length, "length");
  if (!(power >= 0.0) || !std::isfinite(power)) throw InputError("power must be non-negative");
  return gamma_nl * length * power;
}

double enhancement_factor(double lambda, double q, double n_eff, double ring_length) {
  require_positive(lambda, "wavelength");
  require_positive(q, "Q");
  require_positive(n_eff, "effective index");
  require_positive(ring_length, "ring length");
  return lambda * q / (std::numbers::pi * n_eff * ring_length);
}

double kappa_from_transmittance(double transmittance, double n_eff, double length) {
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) throw InputError("transmittance must lie in [0, 1]");
  require_positive(n_eff, "effective index");
  require_positive(length, "length");
  return kSpeedOfLight * transmittance / (2.0 * n_eff * length);
}

double threshold_length(double gamma_nl, double power, double criterion) {
  require_positive(gamma_nl, "nonlinear coefficient");
  require_positive(power, "power");
  require_positive(criterion, "criterion");
  return criterion / (gamma_nl * power);
}

double threshold_q(double gamma_nl, double power, double lambda, double n_eff, double criterion) {
  require_positive(gamma_nl, "nonlinear coefficient");
  require_positive(power, "power");
  require_positive(lambda, "wavelength");
  require_positive(n_eff, "effective index");
  require_positive(criterion, "criterion");
  return criterion * std::numbers::pi * n_eff / (gamma_nl * lambda * power);
}

}  // namespace slh
