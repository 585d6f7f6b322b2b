#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "slh/ccd.hpp"
#include "slh/error.hpp"
#include "support/generators.hpp"

namespace slh {
namespace {

using std::numbers::pi;
const Complex I(0.0, 1.0);

Monomial bd_a() {
  Monomial m(2);
  m[1].creation = 1;
  m[0].annihilation = 1;
  return m;
}

Monomial ad_b() {
  Monomial m(2);
  m[0].creation = 1;
  m[1].annihilation = 1;
  return m;
}

CcdParams sample() {
  CcdParams p;
  p.lambda_p_nm = 1550.0;
  p.lambda_c_nm = 1550.2;
  p.kappa = 5e10;
  p.gamma_p = 2e10;
  p.gamma_c = 1e10;
  p.phi = 0.5;
  p.eta = 0.1;
  p.drive = {1.0, 0.5};
  return p;
}

TEST(Conversions, FrozenValuesAndRoundTrip) {
  EXPECT_NEAR(wavelength_nm_to_omega(1550.0), 426406693222151.2, 426406693222151.2 * 1e-14);
  EXPECT_NEAR(wavelength_nm_to_omega(1550.0, 1.0), 1215259075683131.0, 1215259075683131.0 * 1e-14);
  for (double l : {400.0, 1550.0, 2200.5}) EXPECT_NEAR(omega_to_wavelength_nm(wavelength_nm_to_omega(l)), l, l * 1e-12);
  EXPECT_THROW(wavelength_nm_to_omega(0.0), InputError);
  EXPECT_THROW(omega_to_wavelength_nm(-1.0), InputError);
}

TEST(BuildCcd, MatchesClosedForm) {
  testing::Gen gen(42);
  for (int i = 0; i < 25; ++i) {
    const CcdParams p = gen.ccd_params();
    EXPECT_TRUE(equals_canonical(build_ccd(p), ccd_closed_form(p), 1e-12)) << format_ccd_params(p);
  }
}

TEST(BuildCcd, FivePortsAndValid) {
  const SlhTriple g = build_ccd(sample());
  EXPECT_EQ(g.n_ports(), 5u);
  EXPECT_TRUE(validate(g).empty());
}

TEST(BuildCcd, ScatteringCorner) {
  const CcdParams p = sample();
  const Eigen::MatrixXcd s = scalar_scattering(build_ccd(p));
  EXPECT_NEAR(std::abs(s(0, 0) - std::sqrt(1 - p.eta) * std::polar(1.0, p.phi)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s(0, 1) - std::sqrt(p.eta)), 0.0, 1e-15);
}

TEST(BuildCcd, TotalFeedbackLossReroutes) {
  CcdParams p = sample();
  p.eta = 1.0;
  const Eigen::MatrixXcd s = scalar_scattering(build_ccd(p));
  EXPECT_NEAR(std::abs(s(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s(0, 1) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s(1, 1)), 0.0, 1e-15);
  // Unitary beamsplitter: the lower-left entry carries a sign.
  EXPECT_NEAR(std::abs(s(1, 0) + std::polar(1.0, p.phi)), 0.0, 1e-15);
}

TEST(ClosedForm, CouplingCoefficientLimits) {
  CcdParams p = sample();
  p.eta = 0.0;
  p.phi = 0.0;
  const SlhTriple zero = ccd_closed_form(p);
  EXPECT_EQ(zero.H.coefficient(bd_a()), Complex(0.0));
  EXPECT_EQ(zero.H.coefficient(ad_b()), Complex(0.0));

  p.phi = pi;
  const Complex k_over_i = p.kappa / I;
  const SlhTriple g = build_ccd(p);
  EXPECT_NEAR(std::abs(g.H.coefficient(bd_a()) - k_over_i), 0.0, p.kappa * 1e-15);
  EXPECT_NEAR(std::abs(g.H.coefficient(ad_b()) - std::conj(k_over_i)), 0.0, p.kappa * 1e-15);
}

// The Hamiltonian as printed in the source differs from what the series rule
// produces: the drive also reaches b, and the a-b coupling appears on a'b
// instead of b'a. Pin that difference so a future "fix" notices.
TEST(ClosedForm, PrintedHamiltonianDiffersFromComposition) {
  const CcdParams p = sample();
  const ModeRegistry reg = ccd_registry();
  const OperatorExpr a = annihilation(reg, "a"), b = annihilation(reg, "b");
  const OperatorExpr ad = adjoint(a), bd = adjoint(b);
  const Complex alpha = p.drive;
  const double rk = std::sqrt(p.kappa);
  const Complex x = 1.0 - std::polar(std::sqrt(1 - p.eta), -p.phi);
  const Complex h2i = 1.0 / (2.0 * I);
  const OperatorExpr printed = p.omega_p() * (ad * a) + p.omega_c() * (bd * b) +
                               rk * h2i * (alpha * ad - std::conj(alpha) * a) +
                               p.kappa * h2i * (x * (ad * b) - std::conj(x) * (bd * a));
  const OperatorExpr composed = build_ccd(p).H;
  EXPECT_FALSE(equals_canonical(printed, composed, 1e-6));
  const OperatorExpr missing_drive = rk * h2i * (alpha * bd - std::conj(alpha) * b);
  const OperatorExpr coupling_swap = p.kappa * h2i * (x * (bd * a) - std::conj(x) * (ad * b)) -
                                     p.kappa * h2i * (x * (ad * b) - std::conj(x) * (bd * a));
  EXPECT_TRUE(equals_canonical(printed + missing_drive + coupling_swap, composed, 1e-12));
}

TEST(ClosedForm, PortOneOutputField) {
  testing::Gen gen(3);
  for (int i = 0; i < 5; ++i) {
    const CcdParams p = gen.ccd_params();
    const SlhTriple g = build_ccd(p);
    const std::vector<Complex> amps{gen.complex(1e3), gen.complex(1e3)};
    std::vector<PortField> in;
    for (std::size_t k = 0; k < 5; ++k) in.push_back({gen.complex(1e3), k});
    const Complex t = std::polar(std::sqrt(1 - p.eta), p.phi);
    const Complex expected = std::sqrt(p.kappa) * (amps[0] + t * amps[1]) + t * in[0].amplitude +
                             std::sqrt(p.eta) * in[1].amplitude;
    const Complex got = output_amplitudes(g, amps, in)[0].amplitude;
    EXPECT_LT(std::abs(got - expected), 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Params, ValidationAndFileRoundTrip) {
  CcdParams p = sample();
  EXPECT_NO_THROW(validate_params(p));
  const CcdParams back = parse_ccd_params(format_ccd_params(p));
  EXPECT_EQ(format_ccd_params(back), format_ccd_params(p));
  EXPECT_EQ(back.drive, p.drive);
  p.eta = 1.2;
  EXPECT_THROW(validate_params(p), InputError);
  EXPECT_THROW(parse_ccd_params("kappa=1\nbogus=2\n"), InputError);
  EXPECT_EQ(parse_ccd_params("kappa=7\n", sample()).gamma_p, sample().gamma_p);
}

TEST(DesignRules, NonlinearPhase) {
  EXPECT_NEAR(nonlinear_phase(150.0, 670.0, 1e-6), 0.1005, 1e-12);
  EXPECT_EQ(nonlinear_phase(150.0, 670.0, 0.0), 0.0);
  EXPECT_NEAR(nonlinear_phase(150.0, 335.0, 1e-6), 0.5 * nonlinear_phase(150.0, 670.0, 1e-6), 1e-15);
  EXPECT_NEAR(threshold_length(150.0, 1e-6), 666.6666666666667, 1e-9);
}

TEST(DesignRules, EnhancementFactor) {
  const double ring = pi * 6e-6;
  EXPECT_NEAR(enhancement_factor(1550e-9, 3.5e9, 2.85, ring), 32144293.6409171, 32144293.6409171 * 1e-12);
  EXPECT_NEAR(enhancement_factor(1550e-9, 7e9, 2.85, ring), 2 * enhancement_factor(1550e-9, 3.5e9, 2.85, ring),
              1e-4);
  EXPECT_NEAR(enhancement_factor(pi * 2.85 * ring / 1e4, 1e4, 2.85, ring), 1.0, 1e-12);
  const double q = threshold_q(150.0, 1e-6, 1550e-9, 2.85);
  EXPECT_NEAR(q, 3850984543.1100698, 1.0);
  EXPECT_LT(std::abs(q / 3.5e9 - 1.0), 0.2);
}

TEST(DesignRules, KappaFromTransmittance) {
  const double ring = pi * 6e-6;
  EXPECT_EQ(kappa_from_transmittance(0.0, 2.85, ring), 0.0);
  EXPECT_NEAR(kappa_from_transmittance(0.01, 2.85, ring), 27902603270.39147, 27902603270.39147 * 1e-13);
  EXPECT_NEAR(kappa_from_transmittance(0.02, 2.85, ring), 2 * kappa_from_transmittance(0.01, 2.85, ring), 1e-3);
  EXPECT_THROW(kappa_from_transmittance(1.5, 2.85, ring), InputError);
  EXPECT_THROW(kappa_from_transmittance(0.5, 2.85, 0.0), InputError);
}

}  // namespace
}  // namespace slh
