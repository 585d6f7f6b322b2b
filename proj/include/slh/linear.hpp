#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slh/ccd.hpp"
#include "slh/error.hpp"
#include "slh/slh.hpp"

namespace slh {

// State-space form of a linear triple in a frame rotating at probe_omega:
//   H = sum_ij omega_ij a_i' a_j + sum_i (h_i a_i' + h_i* a_i),
//   L = C a + l0,   S = scattering (constant).
// The diagonal of `omega` holds detunings omega_i - probe_omega.
struct LinearModel {
  ModeRegistry registry;
  double probe_omega = 0.0;
  Eigen::MatrixXcd omega;
  Eigen::MatrixXcd coupling;
  Eigen::MatrixXcd scattering;
  Eigen::VectorXcd h_lin;
  Eigen::VectorXcd l0;

  Eigen::Index n_modes() const { return omega.rows(); }
  Eigen::Index n_ports() const { return coupling.rows(); }

  // A = -i omega - C' C / 2
  Eigen::MatrixXcd drift() const { return Complex(0, -1) * omega - 0.5 * coupling.adjoint() * coupling; }
  // The same model re-detuned to another probe frequency.
  LinearModel at_probe(double new_probe_omega) const;
};

// Throws NonlinearError naming the first offending monomial, or the entry of S
// that is operator-valued.
LinearModel lower(const SlhTriple& g, double probe_omega);

struct SteadyState {
  Eigen::VectorXcd amplitudes;  // per registered mode
  double rcond = 0.0;           // reciprocal condition estimate of the drift
};

// Solves A x + d = 0 with d = -i h - C' l0 / 2 - C' S in. `inputs` holds
// coherent input amplitudes per port (empty means vacuum on every port).
// Throws SingularDrift when the drift matrix is numerically singular.
SteadyState steady_state(const LinearModel& m, std::span<const Complex> inputs = {});

// C x + l0 + S in
Eigen::VectorXcd output_fields(const LinearModel& m, const Eigen::VectorXcd& amplitudes,
                               std::span<const Complex> inputs = {});

// ---------------------------------------------------------------------------
// Spectra

enum class PowerUnit { Watt, Decibel };

// Linear powers below this fraction of the reference clamp to kDbFloor.
inline constexpr double kDbFloorRatio = 1e-18;
inline constexpr double kDbFloor = -180.0;

struct SpectrumSample {
  double wavelength_nm = 0.0;
  double power = 0.0;
};

struct Spectrum {
  std::vector<SpectrumSample> samples;
  PowerUnit unit = PowerUnit::Watt;
  double reference_power = 1.0;

  std::vector<double> wavelengths() const;
  std::vector<double> powers() const;
};

struct SpectrumRequest {
  std::vector<double> wavelengths_nm;  // strictly increasing, positive
  std::size_t monitored_port = 0;
  double n_eff = kDefaultEffectiveIndex;
  std::vector<Complex> inputs;  // per-port coherent drive; empty = vacuum
};

// Thrown for a singular drift at one grid point.
class GridPointError : public SingularDrift {
 public:
  GridPointError(std::size_t index, double wavelength_nm, const std::string& what);
  std::size_t index;
  double wavelength_nm;
};

// Power at the monitored port for each wavelength, in units of |amplitude|^2.
// reference_power is the total coherent input power: |inputs|^2 plus the
// power of the constant parts of L (drives embedded in the triple).
Spectrum spectrum(const SlhTriple& g, const SpectrumRequest& request);
// Same sweep, re-using a model lowered once.
Spectrum spectrum(const LinearModel& m, const SpectrumRequest& request);

Spectrum to_db(const Spectrum& linear);
Spectrum to_linear(const Spectrum& db);

std::vector<double> linear_grid(double start_nm, double stop_nm, std::size_t count);
// "start_nm:stop_nm:count"
std::vector<double> parse_grid_spec(const std::string& spec);

// CSV with header "wavelength_nm,power_db" (or power_w), 12 significant
// digits. `preamble` lines are written first, each prefixed with "# ".
std::string write_spectrum_csv(const Spectrum& s, const std::vector<std::string>& preamble = {});
// Skips '#' lines; throws InputError naming the row/column on malformed data.
Spectrum read_spectrum_csv(const std::string& text);

}  // namespace slh
