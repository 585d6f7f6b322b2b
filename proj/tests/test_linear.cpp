#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "slh/ccd.hpp"
#include "slh/error.hpp"
#include "slh/linear.hpp"
#include "support/generators.hpp"

namespace slh {
namespace {

const Complex I(0.0, 1.0);

CcdParams lossless() {
  CcdParams p;
  p.lambda_p_nm = 1550.0;
  p.lambda_c_nm = 1550.1;
  p.kappa = 5e10;
  p.phi = 0.7;
  p.drive = {std::sqrt(5e10), 0.0};
  return p;
}

double relative(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); }

TEST(Lower, SingleMirrorReadOff) {
  const ModeRegistry reg({"a"});
  const LinearModel m = lower(mirror(reg, reg.mode("a"), 4.0, 10.0), 7.0);
  ASSERT_EQ(m.n_modes(), 1);
  ASSERT_EQ(m.n_ports(), 1);
  EXPECT_EQ(m.omega(0, 0), Complex(3.0));
  EXPECT_EQ(m.coupling(0, 0), Complex(2.0));
  EXPECT_EQ(m.scattering(0, 0), Complex(1.0));
}

TEST(Lower, CcdCouplingEntry) {
  CcdParams p = lossless();
  p.eta = 0.2;
  const LinearModel m = lower(build_ccd(p), p.omega_p());
  const Complex expected = p.kappa / (2.0 * I) * (1.0 - std::polar(std::sqrt(1 - p.eta), -p.phi));
  // omega(i, j) multiplies a_i' a_j: row b, column a is the b'a coefficient.
  EXPECT_LT(std::abs(m.omega(1, 0) - expected), 1e-15 * p.kappa);
  EXPECT_LT((m.omega - m.omega.adjoint()).norm(), 1e-12 * m.omega.norm());
}

TEST(Lower, RejectsNonlinearTermsByName) {
  const ModeRegistry reg({"a"});
  SlhTriple g = passthrough(reg, 1);
  const OperatorExpr a = annihilation(reg, "a");
  g.L[0] = a * a;
  try {
    lower(g, 0.0);
    FAIL() << "expected NonlinearError";
  } catch (const NonlinearError& e) {
    EXPECT_NE(std::string(e.what()).find("a^2"), std::string::npos) << e.what();
  }
  SlhTriple h = passthrough(reg, 1);
  h.H = adjoint(a) * adjoint(a) * a * a;
  EXPECT_THROW(lower(h, 0.0), NonlinearError);
}

TEST(SteadyState, ZeroDriveIsVacuum) {
  const LinearModel m = lower(build_ccd([] {
                                CcdParams p = lossless();
                                p.drive = 0.0;
                                return p;
                              }()),
                              wavelength_nm_to_omega(1550.02));
  EXPECT_EQ(steady_state(m).amplitudes.norm(), 0.0);
}

TEST(SteadyState, DrivenDampedCavity) {
  // kappa = 2, detuning 0.3, alpha = 0.01 sqrt(2); x = -sqrt(k) alpha / (k/2 + i delta).
  const ModeRegistry reg({"a"});
  const SlhTriple g = series(mirror(reg, reg.mode("a"), 2.0, 0.3), coherent_drive(reg, 0.01 * std::sqrt(2.0)));
  const LinearModel m = lower(g, 0.0);
  const Complex x = steady_state(m).amplitudes(0);
  EXPECT_NEAR(x.real(), -0.01834862385321101, 1e-15);
  EXPECT_NEAR(x.imag(), 0.005504587155963303, 1e-15);
  // A single-sided cavity is all-pass.
  EXPECT_NEAR(std::norm(output_fields(m, steady_state(m).amplitudes)(0)), 2e-4, 1e-15);
}

TEST(SteadyState, SingularDriftAtGridPoint) {
  const ModeRegistry reg({"a"});
  const OperatorExpr a = annihilation(reg, "a");
  SlhTriple g = passthrough(reg, 1);
  const double w = wavelength_nm_to_omega(1550.0);
  g.H = w * (adjoint(a) * a) + adjoint(a) + a;
  SpectrumRequest req;
  req.wavelengths_nm = {1549.0, 1550.0};
  try {
    spectrum(g, req);
    FAIL() << "expected GridPointError";
  } catch (const GridPointError& e) {
    EXPECT_EQ(e.index, 1u);
    EXPECT_EQ(e.wavelength_nm, 1550.0);
  }
}

TEST(Spectrum, ZeroDriveClampsToFloor) {
  CcdParams p = lossless();
  p.drive = 0.0;
  SpectrumRequest req;
  req.wavelengths_nm = linear_grid(1549.0, 1551.0, 11);
  const Spectrum lin = spectrum(build_ccd(p), req);
  for (double v : lin.powers()) EXPECT_EQ(v, 0.0);
  for (double v : to_db(lin).powers()) EXPECT_EQ(v, kDbFloor);
}

TEST(Spectrum, LosslessCcdConservesPower) {
  const CcdParams p = lossless();
  const SlhTriple g = build_ccd(p);
  SpectrumRequest req;
  req.wavelengths_nm = linear_grid(1548.0, 1552.0, 51);
  std::vector<double> total(req.wavelengths_nm.size(), 0.0);
  for (std::size_t port = 0; port < 5; ++port) {
    req.monitored_port = port;
    const Spectrum s = spectrum(g, req);
    EXPECT_NEAR(s.reference_power, std::norm(p.drive), 1e-3);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += s.samples[i].power;
  }
  for (double t : total) EXPECT_LT(relative(t, std::norm(p.drive)), 1e-9);
}

TEST(Spectrum, PassiveWithLoss) {
  testing::Gen gen(9);
  for (int n = 0; n < 10; ++n) {
    CcdParams p = gen.ccd_params();
    p.eta = std::max(p.eta, 0.01);
    SpectrumRequest req;
    req.wavelengths_nm = linear_grid(p.lambda_p_nm - 3, p.lambda_p_nm + 3, 61);
    const Spectrum s = spectrum(build_ccd(p), req);
    for (double v : s.powers()) EXPECT_LE(v, s.reference_power * (1 + 1e-12));
  }
}

TEST(Spectrum, LinearInDriveAndPhaseBlind) {
  CcdParams p = lossless();
  p.gamma_p = 1e10;
  p.eta = 0.1;
  SpectrumRequest req;
  req.wavelengths_nm = linear_grid(1549.5, 1550.5, 21);
  const Spectrum base = spectrum(build_ccd(p), req);
  const Complex c(1.7, -0.4);
  p.drive *= c;
  const Spectrum scaled = spectrum(build_ccd(p), req);
  p.drive *= std::polar(1.0, 2.1) / c;
  const Spectrum rotated = spectrum(build_ccd(p), req);
  for (std::size_t i = 0; i < base.samples.size(); ++i) {
    EXPECT_LT(relative(scaled.samples[i].power, std::norm(c) * base.samples[i].power), 1e-12);
    EXPECT_LT(relative(rotated.samples[i].power, base.samples[i].power), 1e-12);
  }
}

TEST(Spectrum, FrameCovariance) {
  testing::Gen gen(17);
  const ModeRegistry reg({"a", "b"});
  for (int n = 0; n < 10; ++n) {
    const SlhTriple g = gen.network(reg, 0.1);
    const double probe = gen.uniform(-1, 1), delta = gen.uniform(-5, 5);
    const LinearModel m0 = lower(g, probe);
    const LinearModel m1 = lower(rotating_frame(g, -delta), probe + delta);
    const Eigen::VectorXcd y0 = output_fields(m0, steady_state(m0).amplitudes);
    const Eigen::VectorXcd y1 = output_fields(m1, steady_state(m1).amplitudes);
    EXPECT_LT((y0 - y1).norm(), 1e-12 * std::max(1e-300, y0.norm()));
  }
}

TEST(Spectrum, EitNullBetweenTwoPeaks) {
  CcdParams p;
  p.kappa = 5e10;
  p.gamma_p = 2e10;
  p.gamma_c = 1e10;
  p.phi = 0.5;
  p.eta = 0.1;
  p.drive = 1.0;
  SpectrumRequest req;
  req.wavelengths_nm = linear_grid(1548.0, 1552.0, 2001);
  const std::vector<double> db = to_db(spectrum(build_ccd(p), req)).powers();
  // A null is a local minimum with a local maximum on either side.
  auto is_max = [&](std::size_t i) { return db[i] > db[i - 1] && db[i] > db[i + 1]; };
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < db.size(); ++i)
    if (is_max(i)) maxima.push_back(i);
  ASSERT_GE(maxima.size(), 2u);
  const auto null = std::min_element(db.begin() + maxima.front(), db.begin() + maxima.back());
  EXPECT_LT(*null, db[maxima.front()]);
  EXPECT_LT(*null, db[maxima.back()]);
  const double at = req.wavelengths_nm[null - db.begin()];
  EXPECT_GT(at, 1550.0);
  EXPECT_LT(at, 1550.1);
}

TEST(Grid, LinearAndSpec) {
  const auto g = linear_grid(1.0, 2.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), 1.0);
  EXPECT_EQ(g.back(), 2.0);
  EXPECT_EQ(parse_grid_spec("1:2:5"), g);
  EXPECT_THROW(parse_grid_spec("1:2"), InputError);
  EXPECT_THROW(parse_grid_spec("2:1:5"), InputError);
  EXPECT_THROW(parse_grid_spec("-1:1:5"), InputError);
  SpectrumRequest req;
  req.wavelengths_nm = {1550.0, 1549.0};
  EXPECT_THROW(spectrum(build_ccd(lossless()), req), InputError);
}

TEST(Csv, WriteReadRoundTrip) {
  Spectrum s;
  s.unit = PowerUnit::Decibel;
  s.samples = {{1549.123456789012, -3.25}, {1550.0, -180.0}};
  const std::string text = write_spectrum_csv(s, {"tool x"});
  EXPECT_EQ(text, "# tool x\n# reference_power=1\nwavelength_nm,power_db\n1549.12345679,-3.25\n1550,-180\n");
  const Spectrum back = read_spectrum_csv(text);
  EXPECT_EQ(back.unit, PowerUnit::Decibel);
  ASSERT_EQ(back.samples.size(), 2u);
  EXPECT_EQ(back.samples[1].power, -180.0);
}

TEST(Csv, MalformedInputNamesRowAndColumn) {
  EXPECT_THROW(read_spectrum_csv("wavelength_nm\n1550\n"), InputError);
  EXPECT_THROW(read_spectrum_csv("freq,power_db\n1,2\n"), InputError);
  try {
    read_spectrum_csv("wavelength_nm,power_w\n1550,1\n1551,abc\n");
    FAIL();
  } catch (const InputError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("row 3"), std::string::npos) << what;
    EXPECT_NE(what.find("power_w"), std::string::npos) << what;
  }
  // Extra columns are tolerated.
  EXPECT_EQ(read_spectrum_csv("wavelength_nm,power_db,x\n1550,1,2\n").samples.size(), 1u);
}

}  // namespace
}  // namespace slh
