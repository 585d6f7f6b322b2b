#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slh/ccd.hpp"
#include "slh/linear.hpp"
#include "slh/netlist.hpp"

namespace slh {

// Forward model: free-parameter values (in FitConfig order) and a wavelength
// grid to a spectrum in either unit.
using SpectrumModel = std::function<Spectrum(std::span<const double> values, const std::vector<double>& grid_nm)>;

// Names accepted by ccd_model(): lambda_p_nm lambda_c_nm kappa gamma_p gamma_c phi eta.
inline const std::vector<std::string> kCcdFitParameters{"lambda_p_nm", "lambda_c_nm", "kappa", "gamma_p",
                                                         "gamma_c",     "phi",         "eta"};

// Port-1 power of the CCD, evaluated with fixed-size 2x2 solves.
Spectrum ccd_port_spectrum(const CcdParams& p, const std::vector<double>& grid_nm);
CcdParams with_values(CcdParams base, std::span<const std::string> names, std::span<const double> values);
SpectrumModel ccd_model(const CcdParams& base, std::vector<std::string> free_names);

// Recompiles the netlist per evaluation with the free values layered over
// `fixed` (which must not name a free parameter).
SpectrumModel netlist_model(NetlistAst ast, Overrides fixed, std::vector<std::string> free_names,
                            std::size_t monitored_port, double n_eff = kDefaultEffectiveIndex);

// Mean squared dB error after removing the best constant dB offset. Linear
// spectra are converted with their own reference power. Grids must match.
double objective(const Spectrum& model, const Spectrum& data);
double objective(const SpectrumModel& model, std::span<const double> values, const Spectrum& data);

struct FreeParameter {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  double initial = 0.0;
  double step = 0.0;      // initial proposal std-dev; 0 means a tenth of the range
  bool periodic = false;  // wraps over [lower, upper) instead of clipping
};

struct AnnealSchedule {
  std::optional<double> initial_temperature;  // default: the starting objective
  double cooling = 0.95;
  int steps_per_temperature = 200;
  double stop_ratio = 1e-6;  // stop once T < T0 * stop_ratio
  long max_evaluations = 200000;
  int restarts = 5;
  double restart_threshold = 1e-6;  // restart while the best objective is above this
  double target_objective = 1e-20;  // stop as soon as the objective reaches this
};

struct FitConfig {
  std::vector<FreeParameter> parameters;
  AnnealSchedule schedule;
  std::uint64_t seed = 1;

  std::vector<std::string> names() const;
  std::vector<double> initial_values() const;
};

// Throws InputError for ill-ordered bounds, an initial value outside them, or
// a schedule outside its domain.
void validate_config(const FitConfig& cfg);

// Flat key=value text:
//   seed=7  cooling=0.95  steps_per_temperature=200  stop_ratio=1e-6
//   initial_temperature=...  max_evaluations=...  restarts=...
//   restart_threshold=...  target_objective=...
//   fit.NAME=LOWER UPPER INITIAL [STEP] [periodic]
FitConfig parse_fit_config(const std::string& text);
std::string format_fit_config(const FitConfig& cfg);

struct TraceEntry {
  int restart = 0;
  int stage = 0;
  long evaluations = 0;
  double temperature = 0.0;
  double current = 0.0;
  double best = 0.0;
  double acceptance = 0.0;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> best;
  double best_objective = 0.0;
  std::vector<TraceEntry> trace;
  long evaluations = 0;
  int restarts_used = 0;
  bool converged = false;
};

// Metropolis annealing with geometric cooling and one-coordinate Gaussian
// proposals in bound-normalized coordinates. Proposal widths adapt per stage
// towards 40-60% acceptance. Deterministic for a fixed seed.
FitResult anneal(const FitConfig& cfg, const Spectrum& data, const SpectrumModel& model);

// Forward spectrum in dB plus i.i.d. Gaussian noise of noise_db std-dev.
Spectrum synth_data(const SpectrumModel& model, std::span<const double> values, const std::vector<double>& grid_nm,
                    double noise_db, std::uint64_t seed);
Spectrum synth_data(const CcdParams& p, const std::vector<double>& grid_nm, double noise_db, std::uint64_t seed);

// key=value block of the best parameters and run statistics.
std::string format_fit_report(const FitResult& r);
// CSV: restart,stage,evaluations,temperature,current,best,acceptance
std::string format_fit_trace(const FitResult& r);

}  // namespace slh
