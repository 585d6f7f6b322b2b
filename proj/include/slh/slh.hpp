#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slh/operator_algebra.hpp"

namespace slh {

// (S, L, H) for an n-port open system. Shapes are not enforced by the type so
// that malformed triples can be represented and reported by validate().
struct SlhTriple {
  ModeRegistry registry;
  std::vector<std::vector<OperatorExpr>> S;  // row-major, n x n
  std::vector<OperatorExpr> L;               // n
  OperatorExpr H;

  std::size_t n_ports() const { return L.size(); }
};

// Coherent amplitude of an input or output field increment at one port,
// in (rad/s)^(1/2).
struct PortField {
  Complex amplitude;
  std::size_t port = 0;
};

struct Violation {
  enum class Kind { Shape, NonHermitianH, NonUnitaryS, RegistryMismatch };
  Kind kind;
  std::string message;
};

inline constexpr double kValidationTolerance = 1e-12;

// Components.
SlhTriple passthrough(const ModeRegistry& reg, std::size_t n_ports);
// Zero-port identity of the concatenation product.
SlhTriple empty_triple(const ModeRegistry& reg);
// (1, sqrt(rate) a, freq a^dagger a)
SlhTriple mirror(const ModeRegistry& reg, const ModeId& mode, double rate, double freq);
// (1, sqrt(rate) a, 0)
SlhTriple loss_mirror(const ModeRegistry& reg, const ModeId& mode, double rate);
// (1, alpha, 0)
SlhTriple coherent_drive(const ModeRegistry& reg, Complex alpha);
// (e^{i theta}, 0, 0)
SlhTriple phase_shifter(const ModeRegistry& reg, double theta);
// ([sqrt(1-eta) sqrt(eta); -sqrt(eta) sqrt(1-eta)], 0, 0). The sign on the
// lower-left entry makes S unitary; port 1 transmits sqrt(1-eta) of its input.
SlhTriple beamsplitter(const ModeRegistry& reg, double eta);

// G1 boxplus G2: block-diagonal S, stacked L (G1's ports first), H1 + H2.
SlhTriple concat(const SlhTriple& g1, const SlhTriple& g2);
// G2 <| G1: outputs of G1 feed the inputs of G2.
SlhTriple series(const SlhTriple& g2, const SlhTriple& g1);

std::vector<Violation> validate(const SlhTriple& g, double tol = kValidationTolerance);
// Throws InputError listing every violation.
void require_valid(const SlhTriple& g, double tol = kValidationTolerance);

bool equals_canonical(const SlhTriple& lhs, const SlhTriple& rhs, double eps);

bool has_scalar_scattering(const SlhTriple& g);
// Throws NonlinearError when an entry is operator-valued.
Eigen::MatrixXcd scalar_scattering(const SlhTriple& g);

// H - omega * sum_i a_i^dagger a_i: the same network seen from a frame
// rotating at omega.
SlhTriple rotating_frame(const SlhTriple& g, double omega);

// Substitutes coherent amplitudes for the mode operators of an expression
// that is affine in annihilation operators. Throws NonlinearError otherwise.
Complex evaluate_coherent(const OperatorExpr& e, std::span<const Complex> mode_amps);

// out_k = L_k(mode_amps) + sum_l S_kl in_l. in_fields must list every port once.
std::vector<PortField> output_amplitudes(const SlhTriple& g, std::span<const Complex> mode_amps,
                                         std::span<const PortField> in_fields);

// Canonical text form: modes, port count, S row-major, L, H (1-based indices).
std::string serialize(const SlhTriple& g, int precision = 12);

}  // namespace slh
