// Seeded random inputs shared by the property tests and the acceptance run.
#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/QR>

#include "slh/ccd.hpp"
#include "slh/slh.hpp"

namespace slh::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Complex complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }
  // Small integer-valued coefficients keep ring-axiom checks exact.
  Complex small_integer_complex() { return {double(integer(-3, 3)), double(integer(-3, 3))}; }

  // Random polynomial with up to `terms` monomials of per-mode power <= max_power.
  OperatorExpr expression(const ModeRegistry& reg, int terms, int max_power, bool integer_coeffs) {
    OperatorExpr::TermMap map;
    for (int t = 0; t < terms; ++t) {
      Monomial m(reg.size());
      for (std::size_t i = 0; i < reg.size(); ++i) {
        m[i].creation = static_cast<std::uint16_t>(integer(0, max_power));
        m[i].annihilation = static_cast<std::uint16_t>(integer(0, max_power));
      }
      map[m] += integer_coeffs ? small_integer_complex() : complex();
    }
    return OperatorExpr(reg, map);
  }

  // Affine in annihilation operators: sum_i c_i a_i + c_0.
  OperatorExpr affine(const ModeRegistry& reg, double scale = 1.0) {
    OperatorExpr e = OperatorExpr::constant(reg, complex(scale));
    for (std::size_t i = 0; i < reg.size(); ++i)
      e = e + complex(scale) * annihilation(reg, ModeId{reg.name(i), i});
    return e;
  }

  // Hermitian, quadratic plus linear.
  OperatorExpr hamiltonian(const ModeRegistry& reg, double scale = 1.0) {
    OperatorExpr x(reg);
    for (std::size_t i = 0; i < reg.size(); ++i) {
      const auto ai = annihilation(reg, ModeId{reg.name(i), i});
      x = x + complex(scale) * adjoint(ai) + Complex(uniform(-scale, scale)) * (adjoint(ai) * ai);
      for (std::size_t j = i + 1; j < reg.size(); ++j)
        x = x + complex(scale) * (adjoint(ai) * annihilation(reg, ModeId{reg.name(j), j}));
    }
    return 0.5 * (x + adjoint(x));
  }

  Eigen::MatrixXcd unitary(std::size_t n) {
    Eigen::MatrixXcd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = complex();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  }

  // Scalar-S triple with affine L and Hermitian quadratic H.
  SlhTriple triple(const ModeRegistry& reg, std::size_t ports) {
    SlhTriple g = passthrough(reg, ports);
    const Eigen::MatrixXcd u = unitary(ports);
    for (std::size_t i = 0; i < ports; ++i)
      for (std::size_t j = 0; j < ports; ++j) g.S[i][j] = OperatorExpr::constant(reg, u(i, j));
    for (auto& l : g.L) l = affine(reg);
    g.H = hamiltonian(reg);
    return g;
  }

  // CCD parameters in the paper's regime: Q ~ 1e3-4e3 around 1550 nm.
  CcdParams ccd_params() {
    CcdParams p;
    p.lambda_p_nm = uniform(1540.0, 1560.0);
    p.lambda_c_nm = p.lambda_p_nm + uniform(-1.0, 1.0);
    const double omega = wavelength_nm_to_omega(p.lambda_p_nm);
    const double total = omega / uniform(1000.0, 4000.0);
    p.kappa = uniform(0.2, 0.45) * total;
    p.gamma_p = uniform(0.0, 1.0) * (total - 2.0 * p.kappa);
    p.gamma_c = uniform(0.0, 1.0) * total;
    p.phi = uniform(0.0, 2.0 * std::numbers::pi);
    p.eta = uniform(0.0, 1.0);
    p.drive = complex(std::sqrt(p.kappa));
    return p;
  }

  // Linear network built from the component library: a layer of weak drives,
  // a mirror layer per mode (so every mode is damped) with random beamsplitter
  // and phase layers in between, folded with the series product.
  SlhTriple network(const ModeRegistry& reg, double drive_scale) {
    const std::size_t ports = static_cast<std::size_t>(integer(1, 3));
    auto layer = [&](auto&& element) {
      SlhTriple acc = empty_triple(reg);
      for (std::size_t k = 0; k < ports; ++k) acc = concat(acc, element(k));
      return acc;
    };
    SlhTriple g = layer([&](std::size_t) { return coherent_drive(reg, complex(drive_scale)); });
    for (std::size_t m = 0; m < reg.size(); ++m) {
      const ModeId mode{reg.name(m), m};
      const std::size_t host = static_cast<std::size_t>(integer(0, static_cast<int>(ports) - 1));
      g = series(layer([&](std::size_t k) {
                   if (k == host) return mirror(reg, mode, uniform(0.5, 2.0), uniform(-1.0, 1.0));
                   switch (integer(0, 2)) {
                     case 0: return phase_shifter(reg, uniform(0.0, 2.0 * std::numbers::pi));
                     case 1: return loss_mirror(reg, mode, uniform(0.0, 0.5));
                     default: return passthrough(reg, 1);
                   }
                 }),
                 g);
      if (ports >= 2 && integer(0, 1) == 1) {
        const std::size_t at = static_cast<std::size_t>(integer(0, static_cast<int>(ports) - 2));
        SlhTriple mix = empty_triple(reg);
        if (at > 0) mix = concat(mix, passthrough(reg, at));
        mix = concat(mix, beamsplitter(reg, uniform(0.0, 1.0)));
        if (ports - at - 2 > 0) mix = concat(mix, passthrough(reg, ports - at - 2));
        g = series(mix, g);
      }
    }
    return g;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace slh::testing
