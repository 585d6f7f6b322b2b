#include "slh/slh.hpp"

#include <cmath>
#include <sstream>

#include "slh/error.hpp"

namespace slh {

namespace {

OperatorExpr zero(const ModeRegistry& reg) { return OperatorExpr(reg); }
OperatorExpr one(const ModeRegistry& reg) { return OperatorExpr::constant(reg, 1.0); }

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw InputError(std::string(what) + " must be finite and non-negative");
}

void require_shape(const SlhTriple& g, const char* op) {
  const std::size_t n = g.n_ports();
  bool ok = g.S.size() == n;
  for (const auto& row : g.S) ok = ok && row.size() == n;
  if (!ok) throw InputError(std::string(op) + ": S is not n x n for an n-port L");
}

std::string port_label(std::size_t i, std::size_t j) {
  return "S[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
}

}  // namespace

SlhTriple passthrough(const ModeRegistry& reg, std::size_t n_ports) {
  SlhTriple g{reg, {}, {}, zero(reg)};
  g.S.assign(n_ports, std::vector<OperatorExpr>(n_ports, zero(reg)));
  for (std::size_t i = 0; i < n_ports; ++i) g.S[i][i] = one(reg);
  g.L.assign(n_ports, zero(reg));
  return g;
}

SlhTriple empty_triple(const ModeRegistry& reg) { return passthrough(reg, 0); }

SlhTriple mirror(const ModeRegistry& reg, const ModeId& mode, double rate, double freq) {
  require_nonnegative(rate, "mirror rate");
  if (!std::isfinite(freq)) throw InputError("mirror frequency must be finite");
  const auto a = annihilation(reg, mode);
  return SlhTriple{reg, {{one(reg)}}, {std::sqrt(rate) * a}, freq * mul(adjoint(a), a)};
}

SlhTriple loss_mirror(const ModeRegistry& reg, const ModeId& mode, double rate) {
  return mirror(reg, mode, rate, 0.0);
}

SlhTriple coherent_drive(const ModeRegistry& reg, Complex alpha) {
  return SlhTriple{reg, {{one(reg)}}, {OperatorExpr::constant(reg, alpha)}, zero(reg)};
}

SlhTriple phase_shifter(const ModeRegistry& reg, double theta) {
  if (!std::isfinite(theta)) throw InputError("phase must be finite");
  return SlhTriple{reg, {{OperatorExpr::constant(reg, std::polar(1.0, theta))}}, {zero(reg)}, zero(reg)};
}

SlhTriple beamsplitter(const ModeRegistry& reg, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw InputError("beamsplitter eta must lie in [0, 1]");
  const auto t = OperatorExpr::constant(reg, std::sqrt(1.0 - eta));
  const auto r = OperatorExpr::constant(reg, std::sqrt(eta));
  return SlhTriple{reg, {{t, r}, {-r, t}}, {zero(reg), zero(reg)}, zero(reg)};
}

SlhTriple concat(const SlhTriple& g1, const SlhTriple& g2) {
  if (!(g1.registry == g2.registry)) throw RegistryMismatch();
  require_shape(g1, "concat");
  require_shape(g2, "concat");
  const auto& reg = g1.registry;
  const std::size_t n1 = g1.n_ports();
  const std::size_t n = n1 + g2.n_ports();

  SlhTriple g{reg, {}, {}, add(g1.H, g2.H)};
  g.S.assign(n, std::vector<OperatorExpr>(n, zero(reg)));
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n1; ++j) g.S[i][j] = g1.S[i][j];
  for (std::size_t i = 0; i < g2.n_ports(); ++i)
    for (std::size_t j = 0; j < g2.n_ports(); ++j) g.S[n1 + i][n1 + j] = g2.S[i][j];
  g.L = g1.L;
  g.L.insert(g.L.end(), g2.L.begin(), g2.L.end());
  return g;
}

SlhTriple series(const SlhTriple& g2, const SlhTriple& g1) {
  if (!(g1.registry == g2.registry)) throw RegistryMismatch();
  require_shape(g1, "series");
  require_shape(g2, "series");
  if (g1.n_ports() != g2.n_ports()) throw PortMismatch(g2.n_ports(), g1.n_ports());
  const auto& reg = g1.registry;
  const std::size_t n = g1.n_ports();

  SlhTriple g{reg, {}, {}, zero(reg)};
  g.S.assign(n, std::vector<OperatorExpr>(n, zero(reg)));
  g.L.assign(n, zero(reg));

  // S2 L1 is needed for both L3 and the Hamiltonian correction.
  std::vector<OperatorExpr> s2_l1(n, zero(reg));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (g2.S[i][k].is_zero()) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (!g1.S[k][j].is_zero()) g.S[i][j] = add(g.S[i][j], mul(g2.S[i][k], g1.S[k][j]));
      if (!g1.L[k].is_zero()) s2_l1[i] = add(s2_l1[i], mul(g2.S[i][k], g1.L[k]));
    }
    g.L[i] = add(s2_l1[i], g2.L[i]);
  }

  OperatorExpr cross = zero(reg);
  for (std::size_t i = 0; i < n; ++i)
    if (!g2.L[i].is_zero() && !s2_l1[i].is_zero()) cross = add(cross, mul(adjoint(g2.L[i]), s2_l1[i]));
  g.H = add(add(g1.H, g2.H), hermitian_imag(cross));
  return g;
}

std::vector<Violation> validate(const SlhTriple& g, double tol) {
  std::vector<Violation> out;
  const std::size_t n = g.n_ports();

  bool shape_ok = g.S.size() == n;
  if (!shape_ok)
    out.push_back({Violation::Kind::Shape, "S has " + std::to_string(g.S.size()) + " rows but L has " +
                                               std::to_string(n) + " entries"});
  for (std::size_t i = 0; i < g.S.size(); ++i) {
    if (g.S[i].size() != g.S.size()) {
      shape_ok = false;
      out.push_back({Violation::Kind::Shape, "S row " + std::to_string(i + 1) + " has " +
                                                 std::to_string(g.S[i].size()) + " entries"});
    }
  }

  auto check_registry = [&](const OperatorExpr& e, const std::string& where) {
    if (!(e.registry() == g.registry))
      out.push_back({Violation::Kind::RegistryMismatch, where + " uses a different mode registry"});
  };
  for (std::size_t i = 0; i < g.S.size(); ++i)
    for (std::size_t j = 0; j < g.S[i].size(); ++j) check_registry(g.S[i][j], port_label(i, j));
  for (std::size_t i = 0; i < n; ++i) check_registry(g.L[i], "L[" + std::to_string(i + 1) + "]");
  check_registry(g.H, "H");

  if (g.H.registry() == g.registry && !equals_canonical(g.H, adjoint(g.H), tol))
    out.push_back({Violation::Kind::NonHermitianH, "H is not Hermitian: H = " + to_string(g.H)});

  if (shape_ok && has_scalar_scattering(g)) {
    const Eigen::MatrixXcd s = scalar_scattering(g);
    const double err = (s * s.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (n > 0 && !(err <= tol)) {
      std::ostringstream msg;
      msg << "scalar S is not unitary (max |S S^dagger - I| = " << err << ")";
      out.push_back({Violation::Kind::NonUnitaryS, msg.str()});
    }
  }
  return out;
}

void require_valid(const SlhTriple& g, double tol) {
  const auto v = validate(g, tol);
  if (v.empty()) return;
  std::string msg = "invalid SLH triple:";
  for (const auto& x : v) msg += "\n  " + x.message;
  throw InputError(msg);
}

bool equals_canonical(const SlhTriple& lhs, const SlhTriple& rhs, double eps) {
  if (!(lhs.registry == rhs.registry) || lhs.n_ports() != rhs.n_ports() || lhs.S.size() != rhs.S.size())
    return false;
  for (std::size_t i = 0; i < lhs.S.size(); ++i) {
    if (lhs.S[i].size() != rhs.S[i].size()) return false;
    for (std::size_t j = 0; j < lhs.S[i].size(); ++j)
      if (!equals_canonical(lhs.S[i][j], rhs.S[i][j], eps)) return false;
  }
  for (std::size_t i = 0; i < lhs.n_ports(); ++i)
    if (!equals_canonical(lhs.L[i], rhs.L[i], eps)) return false;
  return equals_canonical(lhs.H, rhs.H, eps);
}

bool has_scalar_scattering(const SlhTriple& g) {
  for (const auto& row : g.S)
    for (const auto& e : row)
      if (!e.is_scalar()) return false;
  return true;
}

Eigen::MatrixXcd scalar_scattering(const SlhTriple& g) {
  require_shape(g, "scalar_scattering");
  const std::size_t n = g.n_ports();
  Eigen::MatrixXcd s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!g.S[i][j].is_scalar())
        throw NonlinearError(port_label(i, j) + " is operator-valued: " + to_string(g.S[i][j]));
      s(i, j) = g.S[i][j].scalar_part();
    }
  return s;
}

SlhTriple rotating_frame(const SlhTriple& g, double omega) {
  SlhTriple out = g;
  for (std::size_t i = 0; i < g.registry.size(); ++i) {
    const ModeId id{g.registry.name(i), i};
    out.H = add(out.H, scale(-omega, mul(creation(g.registry, id), annihilation(g.registry, id))));
  }
  return out;
}

Complex evaluate_coherent(const OperatorExpr& e, std::span<const Complex> mode_amps) {
  Complex v{};
  for (const auto& [m, c] : e.terms()) {
    if (m.is_identity()) {
      v += c;
      continue;
    }
    if (m.total_creation() != 0 || m.total_annihilation() != 1)
      throw NonlinearError("term '" + to_string(m, e.registry()) +
                           "' is not affine in annihilation operators");
    for (std::size_t i = 0; i < m.n_modes(); ++i) {
      if (m[i].annihilation == 1) {
        if (i >= mode_amps.size())
          throw InputError("no amplitude supplied for mode '" + e.registry().name(i) + "'");
        v += c * mode_amps[i];
      }
    }
  }
  return v;
}

std::vector<PortField> output_amplitudes(const SlhTriple& g, std::span<const Complex> mode_amps,
                                         std::span<const PortField> in_fields) {
  const std::size_t n = g.n_ports();
  std::vector<Complex> in(n);
  std::vector<bool> seen(n, false);
  for (const auto& f : in_fields) {
    if (f.port >= n) throw InputError("input field for nonexistent port " + std::to_string(f.port + 1));
    if (seen[f.port]) throw InputError("port " + std::to_string(f.port + 1) + " given twice");
    seen[f.port] = true;
    in[f.port] = f.amplitude;
  }
  for (std::size_t k = 0; k < n; ++k)
    if (!seen[k]) throw InputError("no input field for port " + std::to_string(k + 1));

  const Eigen::MatrixXcd s = scalar_scattering(g);
  std::vector<PortField> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex v = evaluate_coherent(g.L[k], mode_amps);
    for (std::size_t l = 0; l < n; ++l) v += s(k, l) * in[l];
    out[k] = PortField{v, k};
  }
  return out;
}

std::string serialize(const SlhTriple& g, int precision) {
  std::ostringstream os;
  os << "modes:";
  for (const auto& name : g.registry.names()) os << ' ' << name;
  os << "\nports: " << g.n_ports() << '\n';
  for (std::size_t i = 0; i < g.S.size(); ++i)
    for (std::size_t j = 0; j < g.S[i].size(); ++j)
      os << port_label(i, j) << " = " << to_string(g.S[i][j], precision) << '\n';
  for (std::size_t i = 0; i < g.L.size(); ++i)
    os << "L[" << i + 1 << "] = " << to_string(g.L[i], precision) << '\n';
  os << "H = " << to_string(g.H, precision) << '\n';
  return os.str();
}

}  // namespace slh
