#pragma once

#include <map>
#include <string>
#include <vector>

#include "slh/slh.hpp"

namespace slh {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kDefaultEffectiveIndex = 2.85;

// Conversions between resonance wavelength and angular frequency using
// lambda = 2 pi c / (n_eff omega). Both throw InputError on non-positive input.
double wavelength_nm_to_omega(double lambda_nm, double n_eff = kDefaultEffectiveIndex);
double omega_to_wavelength_nm(double omega, double n_eff = kDefaultEffectiveIndex);

// Coupled-cavity device: plant mode a, controller mode b, five ports.
// Port 1 (index 0) carries the monitored field z; the drive w enters port 3.
struct CcdParams {
  double lambda_p_nm = 1550.0;
  double lambda_c_nm = 1550.0;
  double kappa = 0.0;    // rad/s, every bus-waveguide mirror
  double gamma_p = 0.0;  // rad/s, plant intrinsic loss
  double gamma_c = 0.0;  // rad/s, controller intrinsic loss
  double phi = 0.0;      // rad, feedback phase
  double eta = 0.0;      // feedback power loss in [0, 1]
  Complex drive{};       // (rad/s)^(1/2)
  double n_eff = kDefaultEffectiveIndex;

  double omega_p() const { return wavelength_nm_to_omega(lambda_p_nm, n_eff); }
  double omega_c() const { return wavelength_nm_to_omega(lambda_c_nm, n_eff); }
};

inline constexpr std::size_t kCcdMonitoredPort = 0;
inline constexpr std::size_t kCcdDrivePort = 2;

// Throws InputError naming the offending field.
void validate_params(const CcdParams& p);

ModeRegistry ccd_registry();

// Network decomposition
//   [(Gp2 + G1) <| Geta <| (Gphi + G1) <| (Gc2 + G1)] + [Gc1 <| Gp1 <| Gw] + Gp3 + Gc3
// evaluated with the series and concatenation products.
SlhTriple build_ccd(const CcdParams& p);

// The same triple written out term by term. The Hamiltonian is
//   wp a'a + wc b'b + (sqrt(k)/2i)(a' alpha - a alpha*) + (sqrt(k)/2i)(b' alpha - b alpha*)
//   + (k/2i)[(1 - e^{-i phi} sqrt(1-eta)) b'a - (1 - e^{i phi} sqrt(1-eta)) a'b].
SlhTriple ccd_closed_form(const CcdParams& p);

// Reads/writes the flat key=value parameter format (lambda_p_nm=..., kappa=...,
// drive=re+imi). Unknown keys are an InputError; missing keys keep `base`.
CcdParams parse_ccd_params(const std::string& text, CcdParams base = {});
std::string format_ccd_params(const CcdParams& p);

// ---------------------------------------------------------------------------
// Integrated-photonics design rules (SI units throughout).

// Default significance criterion for the accumulated nonlinear phase.
inline constexpr double kNonlinearPhaseCriterion = 0.1;

// gamma = 2 pi n2 / (lambda A_eff), 1/(W m)
double nonlinear_coefficient(double n2, double lambda, double a_eff);
// delta_phi = gamma * length * power, rad
double nonlinear_phase(double gamma_nl, double length, double power);
// B = lambda Q / (pi n_eff ell_r)
double enhancement_factor(double lambda, double q, double n_eff, double ring_length);
// kappa = c T / (2 n_eff length), rad/s
double kappa_from_transmittance(double transmittance, double n_eff, double length);

// Waveguide length at which gamma * length * power reaches `criterion`.
double threshold_length(double gamma_nl, double power, double criterion = kNonlinearPhaseCriterion);
// Q at which the ring-enhanced round-trip phase gamma * ell_r * B * P reaches
// `criterion`; the ring length cancels.
double threshold_q(double gamma_nl, double power, double lambda, double n_eff,
                   double criterion = kNonlinearPhaseCriterion);

}  // namespace slh
