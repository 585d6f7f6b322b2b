#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace slh {

using Complex = std::complex<double>;

// Coefficients with magnitude below this are dropped when an expression is
// canonicalized.
inline constexpr double kCoefficientEpsilon = 1e-15;

// Largest joint Fock dimension to_matrix will build by default.
inline constexpr std::size_t kDefaultMaxHilbertDim = 4096;

struct ModeId {
  std::string name;
  std::size_t index = 0;
};

// Ordered set of named bosonic modes shared by every expression built on it.
// Copies share storage; two registries compare equal when their names match.
class ModeRegistry {
 public:
  ModeRegistry();
  explicit ModeRegistry(std::vector<std::string> names);

  std::size_t size() const { return names_->size(); }
  const std::vector<std::string>& names() const { return *names_; }
  const std::string& name(std::size_t index) const { return names_->at(index); }

  std::optional<ModeId> find(std::string_view name) const;
  // Throws UnknownMode.
  ModeId mode(std::string_view name) const;

  bool operator==(const ModeRegistry& other) const;

 private:
  std::shared_ptr<const std::vector<std::string>> names_;
};

// Powers of a_i^dagger and a_i for one mode inside a normal-ordered monomial.
struct ModePowers {
  std::uint16_t creation = 0;
  std::uint16_t annihilation = 0;

  bool operator==(const ModePowers&) const = default;
};

// Normal-ordered product prod_i (a_i^dagger)^c_i prod_i a_i^d_i, one entry per
// registered mode. The empty product (all zero) is the identity.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::size_t n_modes) : powers_(n_modes) {}

  static Monomial identity(std::size_t n_modes) { return Monomial(n_modes); }
  static Monomial annihilator(std::size_t n_modes, std::size_t mode);
  static Monomial creator(std::size_t n_modes, std::size_t mode);

  std::size_t n_modes() const { return powers_.size(); }
  const ModePowers& operator[](std::size_t mode) const { return powers_[mode]; }
  ModePowers& operator[](std::size_t mode) { return powers_[mode]; }

  unsigned total_creation() const;
  unsigned total_annihilation() const;
  unsigned degree() const { return total_creation() + total_annihilation(); }
  bool is_identity() const { return degree() == 0; }

  Monomial adjoint() const;

  bool operator==(const Monomial&) const = default;
  // Canonical term order: ascending total degree, then descending powers
  // compared mode by mode (creation before annihilation).
  bool operator<(const Monomial& other) const;

 private:
  std::vector<ModePowers> powers_;
};

// Polynomial in the modes of a registry with complex coefficients, always
// held in normal order. Immutable: every operation returns a new value.
class OperatorExpr {
 public:
  using TermMap = std::map<Monomial, Complex>;

  // The zero expression on the empty registry.
  OperatorExpr();
  explicit OperatorExpr(ModeRegistry registry);
  // Canonicalizes: drops coefficients below kCoefficientEpsilon, rejects
  // non-finite coefficients and monomials sized for another registry.
  OperatorExpr(ModeRegistry registry, TermMap terms);

  static OperatorExpr constant(ModeRegistry registry, Complex value);

  const ModeRegistry& registry() const { return registry_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  bool is_zero() const { return terms_.empty(); }
  // True for multiples of the identity (including zero).
  bool is_scalar() const;
  // Coefficient of the identity monomial.
  Complex scalar_part() const;
  Complex coefficient(const Monomial& m) const;
  // Largest coefficient magnitude; 0 for the zero expression.
  double max_abs_coefficient() const;

  OperatorExpr operator-() const;

 private:
  ModeRegistry registry_;
  TermMap terms_;
};

OperatorExpr annihilation(const ModeRegistry& registry, const ModeId& mode);
OperatorExpr annihilation(const ModeRegistry& registry, std::string_view name);
OperatorExpr creation(const ModeRegistry& registry, const ModeId& mode);
OperatorExpr creation(const ModeRegistry& registry, std::string_view name);

OperatorExpr adjoint(const OperatorExpr& e);
OperatorExpr add(const OperatorExpr& lhs, const OperatorExpr& rhs);
OperatorExpr mul(const OperatorExpr& lhs, const OperatorExpr& rhs);
OperatorExpr scale(Complex c, const OperatorExpr& e);
// (X - X^dagger) / 2i
OperatorExpr hermitian_imag(const OperatorExpr& e);

inline OperatorExpr operator+(const OperatorExpr& l, const OperatorExpr& r) { return add(l, r); }
inline OperatorExpr operator-(const OperatorExpr& l, const OperatorExpr& r) { return add(l, -r); }
inline OperatorExpr operator*(const OperatorExpr& l, const OperatorExpr& r) { return mul(l, r); }
inline OperatorExpr operator*(Complex c, const OperatorExpr& e) { return scale(c, e); }
inline OperatorExpr operator*(const OperatorExpr& e, Complex c) { return scale(c, e); }
OperatorExpr operator+(const OperatorExpr& e, Complex c);
inline OperatorExpr operator+(Complex c, const OperatorExpr& e) { return e + c; }

// Term maps agree with every coefficient difference at most
// eps * max(1, largest coefficient magnitude of either side). For O(1)
// coefficients this is an absolute bound; for expressions carrying
// physical rates (1e14 rad/s) it scales with the expression.
bool equals_canonical(const OperatorExpr& lhs, const OperatorExpr& rhs, double eps);

// Matrix on the tensor product of truncated Fock spaces, mode 0 the most
// significant factor. dims has one entry (>= 2) per registered mode.
Eigen::MatrixXcd to_matrix(const OperatorExpr& e, std::span<const int> dims,
                           std::size_t max_dim = kDefaultMaxHilbertDim);

// "2*ad^2*b" style rendering; `precision` significant digits.
std::string to_string(const Monomial& m, const ModeRegistry& registry);
std::string format_coefficient(Complex c, int precision = 12);
std::string to_string(const OperatorExpr& e, int precision = 12);

}  // namespace slh
