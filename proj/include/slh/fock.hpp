#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "slh/linear.hpp"
#include "slh/slh.hpp"

namespace slh {

using SparseMatrixXcd = Eigen::SparseMatrix<Complex>;

// Cap on the vectorized generator: (joint Fock dimension)^2.
inline constexpr std::size_t kMaxGeneratorDim = 4096;

struct DensityMatrix {
  Eigen::MatrixXcd rho;
  std::vector<int> dims;
};

// Generator of d rho/dt = -i[H, rho] + sum_k (L_k rho L_k' - {L_k' L_k, rho}/2)
// for vacuum inputs, acting on column-stacked vec(rho). Coherent drives must
// already be part of the triple. Throws NonlinearError for operator-valued S
// and DimensionError above max_generator_dim.
SparseMatrixXcd liouvillian(const SlhTriple& g, std::span<const int> dims,
                            std::size_t max_generator_dim = kMaxGeneratorDim);

// Unique normalized null vector of the generator. Throws NumericalError if the
// null space is not one-dimensional or the result violates the density-matrix
// invariants (Hermitian, unit trace, eigenvalues >= -1e-10).
DensityMatrix steady_state_rho(const SparseMatrixXcd& generator, std::vector<int> dims);

// Largest generator null_space_dimension() will densify.
inline constexpr std::size_t kMaxDenseRankDim = 1296;

// Dimension of the generator's numerical null space (full-pivot LU on the
// scaled dense generator). Throws DimensionError above kMaxDenseRankDim.
std::size_t null_space_dimension(const SparseMatrixXcd& generator);

// tr(op rho). Throws DimensionError on a registry/dims mismatch.
Complex expectation(const OperatorExpr& op, const DensityMatrix& rho);

double purity(const DensityMatrix& rho);

// Product of coherent states with the given amplitudes on truncated Fock spaces.
DensityMatrix coherent_state(std::span<const Complex> amplitudes, std::vector<int> dims);

struct OracleOptions {
  int initial_dim = 4;
  int max_doublings = 3;
  double tolerance = 1e-6;  // relative change of <a_i> between truncations
  std::size_t max_generator_dim = kMaxGeneratorDim;
};

struct OracleResult {
  std::vector<Complex> mode_amplitudes;  // <a_i>
  std::vector<Complex> outputs;          // <L_k>, vacuum inputs
  std::vector<int> dims;                 // truncation of the accepted solve
  double relative_change = 0.0;          // against the previous truncation
  double mean_photons = 0.0;             // sum_i <a_i' a_i>
  double purity = 0.0;
};

// Steady state of the triple in the frame rotating at probe_omega, doubling
// the per-mode truncation until <a_i> changes by less than the tolerance.
// Throws NumericalError if the cap is reached first.
OracleResult oracle_steady_state(const SlhTriple& g, double probe_omega, const OracleOptions& options = {});

// |<out_port>|^2 at each wavelength; same reference power as spectrum().
Spectrum oracle_spectrum(const SlhTriple& g, const SpectrumRequest& request, const OracleOptions& options = {});

}  // namespace slh
