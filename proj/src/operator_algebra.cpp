#include "slh/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "slh/error.hpp"

namespace slh {

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || digit(c); });
}

void require_same_registry(const OperatorExpr& l, const OperatorExpr& r) {
  if (!(l.registry() == r.registry())) throw RegistryMismatch();
}

double falling_factorial_sqrt(int n, int k) {
  // sqrt(n! / (n-k)!)
  double v = 1.0;
  for (int j = 0; j < k; ++j) v *= static_cast<double>(n - j);
  return std::sqrt(v);
}

double binomial(unsigned n, unsigned k) {
  double v = 1.0;
  for (unsigned j = 1; j <= k; ++j) v = v * static_cast<double>(n - k + j) / static_cast<double>(j);
  return v;
}

double factorial(unsigned n) {
  double v = 1.0;
  for (unsigned j = 2; j <= n; ++j) v *= j;
  return v;
}

// Products of normal-ordered monomials, one mode at a time:
// a^d (a^dagger)^c = sum_k C(d,k) C(c,k) k! (a^dagger)^(c-k) a^(d-k).
void multiply_into(const Monomial& lhs, const Monomial& rhs, Complex coeff, std::size_t mode,
                   Monomial& partial, OperatorExpr::TermMap& out) {
  if (mode == lhs.n_modes()) {
    out[partial] += coeff;
    return;
  }
  const ModePowers l = lhs[mode];
  const ModePowers r = rhs[mode];
  const unsigned kmax = std::min<unsigned>(l.annihilation, r.creation);
  for (unsigned k = 0; k <= kmax; ++k) {
    const double weight = binomial(l.annihilation, k) * binomial(r.creation, k) * factorial(k);
    partial[mode] = ModePowers{static_cast<std::uint16_t>(l.creation + r.creation - k),
                               static_cast<std::uint16_t>(l.annihilation + r.annihilation - k)};
    multiply_into(lhs, rhs, coeff * weight, mode + 1, partial, out);
  }
}

std::string format_real(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// ModeRegistry

ModeRegistry::ModeRegistry() : names_(std::make_shared<const std::vector<std::string>>()) {}

ModeRegistry::ModeRegistry(std::vector<std::string> names) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!is_identifier(n)) throw InputError("invalid mode name '" + n + "'");
    if (!seen.insert(n).second) throw InputError("duplicate mode name '" + n + "'");
  }
  names_ = std::make_shared<const std::vector<std::string>>(std::move(names));
}

std::optional<ModeId> ModeRegistry::find(std::string_view name) const {
  const auto& n = *names_;
  for (std::size_t i = 0; i < n.size(); ++i)
    if (n[i] == name) return ModeId{n[i], i};
  return std::nullopt;
}

ModeId ModeRegistry::mode(std::string_view name) const {
  auto id = find(name);
  if (!id) throw UnknownMode(std::string(name));
  return *id;
}

bool ModeRegistry::operator==(const ModeRegistry& other) const {
  return names_ == other.names_ || *names_ == *other.names_;
}

// ---------------------------------------------------------------------------
// Monomial

Monomial Monomial::annihilator(std::size_t n_modes, std::size_t mode) {
  Monomial m(n_modes);
  m.powers_.at(mode).annihilation = 1;
  return m;
}

Monomial Monomial::creator(std::size_t n_modes, std::size_t mode) {
  Monomial m(n_modes);
  m.powers_.at(mode).creation = 1;
  return m;
}

unsigned Monomial::total_creation() const {
  unsigned s = 0;
  for (const auto& p : powers_) s += p.creation;
  return s;
}

unsigned Monomial::total_annihilation() const {
  unsigned s = 0;
  for (const auto& p : powers_) s += p.annihilation;
  return s;
}

Monomial Monomial::adjoint() const {
  Monomial m = *this;
  for (auto& p : m.powers_) std::swap(p.creation, p.annihilation);
  return m;
}

bool Monomial::operator<(const Monomial& other) const {
  const unsigned da = degree();
  const unsigned db = other.degree();
  if (da != db) return da < db;
  const std::size_t n = std::min(powers_.size(), other.powers_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (powers_[i].creation != other.powers_[i].creation)
      return powers_[i].creation > other.powers_[i].creation;
    if (powers_[i].annihilation != other.powers_[i].annihilation)
      return powers_[i].annihilation > other.powers_[i].annihilation;
  }
  return powers_.size() < other.powers_.size();
}

// ---------------------------------------------------------------------------
// OperatorExpr

OperatorExpr::OperatorExpr() = default;

OperatorExpr::OperatorExpr(ModeRegistry registry) : registry_(std::move(registry)) {}

OperatorExpr::OperatorExpr(ModeRegistry registry, TermMap terms) : registry_(std::move(registry)) {
  for (auto& [m, c] : terms) {
    if (m.n_modes() != registry_.size())
      throw InputError("monomial sized for " + std::to_string(m.n_modes()) +
                       " modes used with a registry of " + std::to_string(registry_.size()));
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw NumericalError("non-finite coefficient in operator expression");
    if (std::abs(c) >= kCoefficientEpsilon) terms_.emplace(m, c);
  }
}

OperatorExpr OperatorExpr::constant(ModeRegistry registry, Complex value) {
  TermMap t;
  t[Monomial::identity(registry.size())] = value;
  return OperatorExpr(std::move(registry), std::move(t));
}

bool OperatorExpr::is_scalar() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_identity());
}

Complex OperatorExpr::scalar_part() const {
  return coefficient(Monomial::identity(registry_.size()));
}

Complex OperatorExpr::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Complex{} : it->second;
}

double OperatorExpr::max_abs_coefficient() const {
  double v = 0.0;
  for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
  return v;
}

OperatorExpr OperatorExpr::operator-() const { return scale(-1.0, *this); }

OperatorExpr annihilation(const ModeRegistry& registry, const ModeId& mode) {
  if (mode.index >= registry.size() || registry.name(mode.index) != mode.name)
    throw UnknownMode(mode.name);
  OperatorExpr::TermMap t;
  t[Monomial::annihilator(registry.size(), mode.index)] = 1.0;
  return OperatorExpr(registry, std::move(t));
}

OperatorExpr annihilation(const ModeRegistry& registry, std::string_view name) {
  return annihilation(registry, registry.mode(name));
}

OperatorExpr creation(const ModeRegistry& registry, const ModeId& mode) {
  return adjoint(annihilation(registry, mode));
}

OperatorExpr creation(const ModeRegistry& registry, std::string_view name) {
  return creation(registry, registry.mode(name));
}

OperatorExpr adjoint(const OperatorExpr& e) {
  OperatorExpr::TermMap t;
  for (const auto& [m, c] : e.terms()) t[m.adjoint()] = std::conj(c);
  return OperatorExpr(e.registry(), std::move(t));
}

OperatorExpr add(const OperatorExpr& lhs, const OperatorExpr& rhs) {
  require_same_registry(lhs, rhs);
  OperatorExpr::TermMap t = lhs.terms();
  for (const auto& [m, c] : rhs.terms()) t[m] += c;
  return OperatorExpr(lhs.registry(), std::move(t));
}

OperatorExpr mul(const OperatorExpr& lhs, const OperatorExpr& rhs) {
  require_same_registry(lhs, rhs);
  OperatorExpr::TermMap t;
  Monomial partial(lhs.registry().size());
  for (const auto& [ml, cl] : lhs.terms())
    for (const auto& [mr, cr] : rhs.terms()) multiply_into(ml, mr, cl * cr, 0, partial, t);
  return OperatorExpr(lhs.registry(), std::move(t));
}

OperatorExpr scale(Complex c, const OperatorExpr& e) {
  OperatorExpr::TermMap t;
  for (const auto& [m, v] : e.terms()) t[m] = c * v;
  return OperatorExpr(e.registry(), std::move(t));
}

OperatorExpr hermitian_imag(const OperatorExpr& e) {
  return scale(Complex(0.0, -0.5), add(e, -adjoint(e)));
}

OperatorExpr operator+(const OperatorExpr& e, Complex c) {
  return add(e, OperatorExpr::constant(e.registry(), c));
}

bool equals_canonical(const OperatorExpr& lhs, const OperatorExpr& rhs, double eps) {
  if (!(lhs.registry() == rhs.registry())) return false;
  const double tol = eps * std::max({1.0, lhs.max_abs_coefficient(), rhs.max_abs_coefficient()});
  auto within = [&](Complex a, Complex b) { return std::abs(a - b) <= tol; };
  for (const auto& [m, c] : lhs.terms())
    if (!within(c, rhs.coefficient(m))) return false;
  for (const auto& [m, c] : rhs.terms())
    if (!lhs.terms().contains(m) && !within(c, Complex{})) return false;
  return true;
}

Eigen::MatrixXcd to_matrix(const OperatorExpr& e, std::span<const int> dims, std::size_t max_dim) {
  const auto& reg = e.registry();
  if (dims.size() != reg.size())
    throw DimensionError("to_matrix needs one truncation per mode (" + std::to_string(reg.size()) +
                         "), got " + std::to_string(dims.size()));
  std::size_t total = 1;
  for (int d : dims) {
    if (d < 2) throw DimensionError("Fock truncation must be at least 2");
    total *= static_cast<std::size_t>(d);
    if (total > max_dim)
      throw DimensionError("joint Fock dimension exceeds cap of " + std::to_string(max_dim));
  }

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(total, total);
  for (const auto& [m, c] : e.terms()) {
    // Kronecker product of the per-mode (a^dagger)^p a^q blocks.
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Constant(1, 1, c);
    for (std::size_t mode = 0; mode < reg.size(); ++mode) {
      const int d = dims[mode];
      const int p = m[mode].creation;
      const int q = m[mode].annihilation;
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(d, d);
      for (int n = q; n < d; ++n) {
        const int target = n - q + p;
        if (target >= d) continue;
        block(target, n) = falling_factorial_sqrt(n, q) * falling_factorial_sqrt(target, p);
      }
      Eigen::MatrixXcd next(term.rows() * d, term.cols() * d);
      for (Eigen::Index i = 0; i < term.rows(); ++i)
        for (Eigen::Index j = 0; j < term.cols(); ++j)
          next.block(i * d, j * d, d, d) = term(i, j) * block.cast<Complex>();
      term = std::move(next);
    }
    out += term;
  }
  return out;
}

std::string to_string(const Monomial& m, const ModeRegistry& registry) {
  std::string s;
  auto append = [&](const std::string& base, unsigned power) {
    if (power == 0) return;
    if (!s.empty()) s += '*';
    s += base;
    if (power > 1) s += '^' + std::to_string(power);
  };
  for (std::size_t i = 0; i < m.n_modes(); ++i) {
    const std::string& name = i < registry.size() ? registry.name(i) : "m" + std::to_string(i);
    append(name + "d", m[i].creation);
    append(name, m[i].annihilation);
  }
  return s.empty() ? "1" : s;
}

std::string format_coefficient(Complex c, int precision) {
  const double re = c.real();
  const double im = c.imag();
  if (im == 0.0) return format_real(re, precision);
  if (re == 0.0) return format_real(im, precision) + "i";
  std::string imag = format_real(im, precision);
  if (imag.front() != '-') imag = "+" + imag;
  return "(" + format_real(re, precision) + imag + "i)";
}

std::string to_string(const OperatorExpr& e, int precision) {
  if (e.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : e.terms()) {
    // Pull a leading minus out of purely real or purely imaginary coefficients.
    const bool negative = (c.imag() == 0.0 && c.real() < 0.0) || (c.real() == 0.0 && c.imag() < 0.0);
    const Complex shown = negative ? -c : c;
    if (first)
      out += negative ? "-" : "";
    else
      out += negative ? " - " : " + ";
    first = false;

    if (m.is_identity()) {
      out += format_coefficient(shown, precision);
    } else if (shown == Complex(1.0, 0.0)) {
      out += to_string(m, e.registry());
    } else {
      out += format_coefficient(shown, precision) + "*" + to_string(m, e.registry());
    }
  }
  return out;
}

}  // namespace slh
