#include "slh/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include "slh/error.hpp"

namespace slh {

namespace {

using Triplet = Eigen::Triplet<Complex>;

constexpr double kRhoTolerance = 1e-10;
constexpr double kMaxInverseGrowth = 1e12;

struct Entry {
  Eigen::Index row;
  Eigen::Index col;
  Complex value;
};

std::vector<Entry> nonzeros(const Eigen::MatrixXcd& m) {
  std::vector<Entry> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != Complex{}) out.push_back({i, j, m(i, j)});
  return out;
}

// Appends weight * (A kron B) to `out`.
void kron_into(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, Complex weight,
               std::vector<Triplet>& out) {
  const auto na = nonzeros(a);
  const auto nb = nonzeros(b);
  for (const auto& x : na)
    for (const auto& y : nb)
      out.emplace_back(x.row * b.rows() + y.row, x.col * b.cols() + y.col, weight * x.value * y.value);
}

std::size_t joint_dimension(std::span<const int> dims) {
  std::size_t d = 1;
  for (int x : dims) d *= static_cast<std::size_t>(x);
  return d;
}

double relative_change(const std::vector<Complex>& now, const std::vector<Complex>& before) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < now.size(); ++i) {
    diff = std::max(diff, std::abs(now[i] - before[i]));
    scale = std::max(scale, std::abs(now[i]));
  }
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
}

// Series-connects coherent drives on every input port so that the vacuum-input
// master equation sees them.
SlhTriple embed_inputs(const SlhTriple& g, const std::vector<Complex>& inputs) {
  if (inputs.empty()) return g;
  if (inputs.size() != g.n_ports())
    throw InputError("expected " + std::to_string(g.n_ports()) + " input amplitudes, got " +
                     std::to_string(inputs.size()));
  SlhTriple drives = empty_triple(g.registry);
  for (const Complex& beta : inputs) drives = concat(drives, coherent_drive(g.registry, beta));
  return series(g, drives);
}

}  // namespace

SparseMatrixXcd liouvillian(const SlhTriple& g, std::span<const int> dims, std::size_t max_generator_dim) {
  scalar_scattering(g);  // vacuum inputs: S drops out, but it must be scalar
  if (dims.size() != g.registry.size())
    throw DimensionError("liouvillian needs one truncation per mode");
  const std::size_t d = joint_dimension(dims);
  if (d * d > max_generator_dim)
    throw DimensionError("generator dimension " + std::to_string(d * d) + " exceeds cap of " +
                         std::to_string(max_generator_dim));

  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  const Eigen::MatrixXcd h = to_matrix(g.H, dims);
  std::vector<Triplet> t;
  const Complex minus_i(0.0, -1.0);
  kron_into(id, h, minus_i, t);
  kron_into(h.transpose(), id, -minus_i, t);
  for (const auto& l_expr : g.L) {
    if (l_expr.is_zero()) continue;
    const Eigen::MatrixXcd l = to_matrix(l_expr, dims);
    const Eigen::MatrixXcd ldl = l.adjoint() * l;
    kron_into(l.conjugate(), l, 1.0, t);
    kron_into(id, ldl, -0.5, t);
    kron_into(ldl.transpose(), id, -0.5, t);
  }
  SparseMatrixXcd gen(d * d, d * d);
  gen.setFromTriplets(t.begin(), t.end());
  gen.prune(Complex{});
  return gen;
}

std::size_t null_space_dimension(const SparseMatrixXcd& generator) {
  if (static_cast<std::size_t>(generator.rows()) > kMaxDenseRankDim)
    throw DimensionError("dense rank check limited to generators of size " + std::to_string(kMaxDenseRankDim));
  Eigen::MatrixXcd dense(generator);
  const double scale = dense.cwiseAbs().maxCoeff();
  if (scale == 0.0) return static_cast<std::size_t>(dense.cols());
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(dense / scale);
  lu.setThreshold(1e-10);
  return static_cast<std::size_t>(lu.dimensionOfKernel());
}

DensityMatrix steady_state_rho(const SparseMatrixXcd& generator, std::vector<int> dims) {
  const std::size_t d = joint_dimension(dims);
  if (static_cast<std::size_t>(generator.rows()) != d * d || generator.rows() != generator.cols())
    throw DimensionError("generator size does not match the truncation");

  double scale = 0.0;
  for (Eigen::Index k = 0; k < generator.outerSize(); ++k)
    for (SparseMatrixXcd::InnerIterator it(generator, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (scale == 0.0) throw NumericalError("generator is identically zero; steady state is not unique");

  // Replace the rho_00 equation by the trace condition.
  std::vector<Triplet> t;
  t.reserve(generator.nonZeros() + d);
  for (Eigen::Index k = 0; k < generator.outerSize(); ++k)
    for (SparseMatrixXcd::InnerIterator it(generator, k); it; ++it)
      if (it.row() != 0) t.emplace_back(it.row(), it.col(), it.value() / scale);
  for (std::size_t i = 0; i < d; ++i) t.emplace_back(0, i * (d + 1), 1.0);
  SparseMatrixXcd bordered(d * d, d * d);
  bordered.setFromTriplets(t.begin(), t.end());
  bordered.makeCompressed();

  Eigen::SparseLU<SparseMatrixXcd, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(bordered);
  if (lu.info() != Eigen::Success)
    throw NumericalError("steady state is not unique (bordered generator is singular)");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
  rhs(0) = 1.0;
  const Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw NumericalError("steady-state solve did not converge");

  // A second null vector makes the bordered system (near) singular; probe its
  // inverse with a fixed right-hand side.
  const Eigen::VectorXcd probe = Eigen::VectorXcd::Ones(d * d) / std::sqrt(static_cast<double>(d * d));
  const Eigen::VectorXcd growth = lu.solve(probe);
  if (!growth.allFinite() || growth.norm() > kMaxInverseGrowth)
    throw NumericalError("steady state is not unique (bordered generator is ill-conditioned)");

  const Eigen::VectorXcd residual = generator * x / scale;
  if (!(residual.cwiseAbs().maxCoeff() <= 1e-8))
    throw NumericalError("steady-state residual too large; null space may be degenerate");

  DensityMatrix out;
  out.dims = std::move(dims);
  out.rho = Eigen::Map<const Eigen::MatrixXcd>(x.data(), d, d);
  const double herm = (out.rho - out.rho.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kRhoTolerance)) {
    std::ostringstream msg;
    msg << "steady state is not Hermitian (error " << herm << ")";
    throw NumericalError(msg.str());
  }
  out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
  const Complex tr = out.rho.trace();
  if (!(std::abs(tr - 1.0) <= kRhoTolerance)) throw NumericalError("steady state trace is not 1");
  out.rho /= tr;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(out.rho, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() >= -kRhoTolerance))
    throw NumericalError("steady state has a negative eigenvalue");
  return out;
}

Complex expectation(const OperatorExpr& op, const DensityMatrix& rho) {
  const std::size_t d = joint_dimension(rho.dims);
  if (static_cast<std::size_t>(rho.rho.rows()) != d || op.registry().size() != rho.dims.size())
    throw DimensionError("operator and density matrix dimensions differ");
  return (to_matrix(op, rho.dims) * rho.rho).trace();
}

double purity(const DensityMatrix& rho) { return (rho.rho * rho.rho).trace().real(); }

DensityMatrix coherent_state(std::span<const Complex> amplitudes, std::vector<int> dims) {
  if (amplitudes.size() != dims.size()) throw DimensionError("one amplitude per mode required");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Ones(1);
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (dims[m] < 2) throw DimensionError("Fock truncation must be at least 2");
    Eigen::VectorXcd single(dims[m]);
    Complex c = 1.0;
    for (int n = 0; n < dims[m]; ++n) {
      single(n) = c;
      c *= amplitudes[m] / std::sqrt(static_cast<double>(n + 1));
    }
    single.normalize();
    Eigen::VectorXcd next(psi.size() * single.size());
    for (Eigen::Index i = 0; i < psi.size(); ++i) next.segment(i * single.size(), single.size()) = psi(i) * single;
    psi = std::move(next);
  }
  return DensityMatrix{psi * psi.adjoint(), std::move(dims)};
}

OracleResult oracle_steady_state(const SlhTriple& g, double probe_omega, const OracleOptions& options) {
  require_valid(g);
  const SlhTriple framed = rotating_frame(g, probe_omega);
  const std::size_t n = g.registry.size();
  if (options.initial_dim < 2) throw InputError("oracle initial dimension must be at least 2");

  std::vector<OperatorExpr> annihilators;
  OperatorExpr number(g.registry);
  for (std::size_t i = 0; i < n; ++i) {
    annihilators.push_back(annihilation(g.registry, ModeId{g.registry.name(i), i}));
    number = number + adjoint(annihilators.back()) * annihilators.back();
  }

  std::optional<OracleResult> previous;
  int dim = options.initial_dim;
  for (int step = 0; step <= options.max_doublings; ++step, dim *= 2) {
    std::vector<int> dims(n, dim);
    const std::size_t d = joint_dimension(dims);
    if (d * d > options.max_generator_dim) break;

    const DensityMatrix rho = steady_state_rho(liouvillian(framed, dims, options.max_generator_dim), dims);
    OracleResult r;
    r.dims = dims;
    for (const auto& a : annihilators) r.mode_amplitudes.push_back(expectation(a, rho));
    for (const auto& l : framed.L) r.outputs.push_back(expectation(l, rho));
    r.mean_photons = expectation(number, rho).real();
    r.purity = purity(rho);
    if (n == 0) return r;
    if (previous) {
      r.relative_change = relative_change(r.mode_amplitudes, previous->mode_amplitudes);
      if (r.relative_change <= options.tolerance) return r;
    }
    previous = std::move(r);
  }
  std::ostringstream msg;
  msg << "Fock oracle did not converge within the truncation cap";
  if (previous) msg << " (last relative change " << previous->relative_change << " at dim " << previous->dims.front() << ")";
  throw NumericalError(msg.str());
}

Spectrum oracle_spectrum(const SlhTriple& g, const SpectrumRequest& request, const OracleOptions& options) {
  const SlhTriple driven = embed_inputs(g, request.inputs);
  if (request.monitored_port >= driven.n_ports())
    throw InputError("monitored port " + std::to_string(request.monitored_port + 1) + " does not exist");
  Spectrum out;
  out.unit = PowerUnit::Watt;
  out.reference_power = 0.0;
  for (const auto& l : driven.L) out.reference_power += std::norm(l.scalar_part());
  for (const double wl : request.wavelengths_nm) {
    const auto r = oracle_steady_state(driven, wavelength_nm_to_omega(wl, request.n_eff), options);
    out.samples.push_back({wl, std::norm(r.outputs.at(request.monitored_port))});
  }
  return out;
}

}  // namespace slh
