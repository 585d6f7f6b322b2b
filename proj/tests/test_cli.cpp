#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "slh/fit.hpp"
#include "slh/linear.hpp"
#include "slh/text.hpp"
#include "support/fit_setup.hpp"

namespace {

const std::string kSlhnet = SLHNET_PATH;
const std::string kSource = SLH_SOURCE_DIR;
const std::string kCcd = kSource + "/data/ccd.slh";

struct CliRun {
  int exit_code = -1;
  std::string out;
};

// Runs slhnet with stdout captured; stderr is folded in when asked.
CliRun slhnet(const std::string& args, bool with_stderr = false) {
  const std::string cmd = kSlhnet + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + "slhnet_" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = temp_path(name);
  std::ofstream(path) << text;
  return path;
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);)
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

std::string strip_manifest(const std::string& text) {
  std::istringstream is(text);
  std::string out;
  for (std::string line; std::getline(is, line);)
    if (line.rfind("# ", 0) != 0) out += line + "\n";
  return out;
}

TEST(Cli, ComposeMatchesGolden) {
  const CliRun r = slhnet("compose " + kCcd);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out.rfind("# slhnet ", 0), 0u);
  EXPECT_EQ(strip_manifest(r.out), slh::read_file(kSource + "/tests/golden/ccd_compose.txt"));
}

TEST(Cli, ComposeBadNetlistReportsLocation) {
  const std::string bad = write_temp("bad.slh", "mode a\nparam k = 1\nnetwork = mirror(a, k,\n");
  const CliRun r = slhnet("compose " + bad, true);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find(bad + ":4:1: "), std::string::npos) << r.out;
  EXPECT_EQ(slhnet("compose " + temp_path("does_not_exist.slh")).exit_code, 2);
  EXPECT_EQ(slhnet("compose").exit_code, 2);
  EXPECT_EQ(slhnet("").exit_code, 2);
  EXPECT_EQ(slhnet("compose " + kCcd + " --set nope=1").exit_code, 2);
}

TEST(Cli, ComposeEtaZeroCoupling) {
  const CliRun r = slhnet("compose " + kCcd + " --set eta=0");
  ASSERT_EQ(r.exit_code, 0);
  // H line, term "(re+imi)*a*bd": the b'a coefficient (kappa/2i)(1 - e^{-i phi}).
  const std::string h = value_of(r.out, "H ");
  const auto end = h.find(")*a*bd");
  ASSERT_NE(end, std::string::npos) << h;
  const auto begin = h.rfind('(', end);
  const auto c = slh::parse_complex(h.substr(begin + 1, end - begin - 1));
  ASSERT_TRUE(c.has_value());
  const double kappa = 5e10, phi = 0.5;
  const std::complex<double> expected = kappa / std::complex<double>(0, 2) * (1.0 - std::polar(1.0, -phi));
  EXPECT_LT(std::abs(*c - expected), 1e-9 * std::abs(expected));
}

TEST(Cli, SpectrumLosslessAndZeroDrive) {
  const CliRun lossless = slhnet("spectrum " + kCcd + " --set gamma_p=0 --set gamma_c=0 --set eta=0 --grid 1549:1551:21");
  EXPECT_EQ(lossless.exit_code, 0);
  const CliRun zero = slhnet("spectrum " + kCcd + " --set alpha=0 --grid 1549:1551:5");
  ASSERT_EQ(zero.exit_code, 0);
  const slh::Spectrum s = slh::read_spectrum_csv(zero.out);
  for (double v : s.powers()) EXPECT_EQ(v, -180.0);
}

TEST(Cli, SpectrumHeaderAndPrecision) {
  const CliRun r = slhnet("spectrum " + kCcd + " --grid 1549:1551:3 --unit w");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("\nwavelength_nm,power_w\n"), std::string::npos);
  EXPECT_EQ(slhnet("spectrum " + kCcd + " --grid 1549:1551").exit_code, 2);
  EXPECT_EQ(slhnet("spectrum " + kCcd + " --grid 1549:1551:3 --port 9").exit_code, 2);
}

TEST(Cli, DefaultSpectrumHasInteriorNull) {
  const CliRun r = slhnet("spectrum " + kCcd + " --grid 1548:1552:401");
  ASSERT_EQ(r.exit_code, 0);
  const std::vector<double> db = slh::read_spectrum_csv(r.out).powers();
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < db.size(); ++i)
    if (db[i] > db[i - 1] && db[i] > db[i + 1]) maxima.push_back(i);
  ASSERT_GE(maxima.size(), 2u);
  const double null = *std::min_element(db.begin() + maxima.front(), db.begin() + maxima.back());
  EXPECT_LT(null, db[maxima.front()]);
  EXPECT_LT(null, db[maxima.back()]);
}

TEST(Cli, SpectrumOracleCrossCheck) {
  const CliRun r = slhnet("spectrum " + kCcd + " --set alpha=2000 --grid 1549.9:1550.1:3 --oracle");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("wavelength_nm,power_db,oracle_power_db,relative_difference"), std::string::npos);
}

TEST(Cli, SelfFitReturnsImmediately) {
  const slh::CcdParams t = slh::testing::fit_truth();
  const std::string data = write_temp("self.csv", slh::write_spectrum_csv(slh::synth_data(t, slh::testing::fit_grid(), 0, 0)));
  const std::string cfg = write_temp("self.cfg",
                                     "seed=3\n"
                                     "fit.kappa=3e10 9e10 5e10\n"
                                     "fit.phi=0 6.283185307179586 3 0 periodic\n");
  const std::string sets = " --set lambda_p_nm=1550 --set lambda_c_nm=1550.4 --set gamma_p=5e10 --set gamma_c=7.5e10";
  const CliRun r = slhnet("fit " + data + " " + kCcd + " --config " + cfg + sets);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(value_of(r.out, "evaluations"), "1");
  EXPECT_EQ(value_of(r.out, "converged"), "true");
  EXPECT_EQ(value_of(r.out, "kappa"), "50000000000");
}

TEST(Cli, FitWritesReportAndTrace) {
  const slh::CcdParams t = slh::testing::fit_truth();
  const std::string data = write_temp("fit.csv", slh::write_spectrum_csv(slh::synth_data(t, slh::testing::fit_grid(), 0, 0)));
  const std::string cfg = write_temp("fit.cfg", "max_evaluations=500\nfit.kappa=3e10 9e10 6e10\n");
  const std::string sets = " --set lambda_p_nm=1550 --set lambda_c_nm=1550.4 --set gamma_p=5e10 --set gamma_c=7.5e10 --set phi=3";
  const std::string out = temp_path("fit_report.txt");
  ASSERT_EQ(slhnet("fit " + data + " " + kCcd + " --config " + cfg + sets + " --seed 5 --out " + out).exit_code, 0);
  const std::string report = slh::read_file(out);
  const std::string trace = slh::read_file(out + ".trace.csv");
  EXPECT_EQ(report.rfind("# slhnet ", 0), 0u);
  EXPECT_NE(report.find("# seed=5"), std::string::npos);
  EXPECT_NE(report.find("\nobjective="), std::string::npos);
  EXPECT_EQ(trace.rfind("# slhnet ", 0), 0u);
  EXPECT_NE(trace.find("restart,stage,evaluations,temperature,current,best,acceptance\n"), std::string::npos);
}

TEST(Cli, FitMalformedCsvIsInputError) {
  const std::string cfg = write_temp("m.cfg", "fit.kappa=3e10 9e10 5e10\n");
  const std::string missing = write_temp("missing.csv", "wavelength_nm\n1550\n");
  const CliRun r = slhnet("fit " + missing + " " + kCcd + " --config " + cfg, true);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("power_db"), std::string::npos) << r.out;
  const std::string bad_row = write_temp("badrow.csv", "wavelength_nm,power_db\n1550,1\n1551,x\n");
  const CliRun b = slhnet("fit " + bad_row + " " + kCcd + " --config " + cfg, true);
  EXPECT_EQ(b.exit_code, 2);
  EXPECT_NE(b.out.find("row 3, column 'power_db'"), std::string::npos) << b.out;
}

TEST(Cli, CheckVerdicts) {
  const CliRun sig = slhnet("check --set gamma_nl=150 --set power=1e-6 --set length=670");
  ASSERT_EQ(sig.exit_code, 0);
  EXPECT_EQ(value_of(sig.out, "waveguide_nonlinearity"), "significant");
  EXPECT_LT(std::abs(std::stod(value_of(sig.out, "threshold_length")) / 670.0 - 1.0), 0.01);

  const CliRun q = slhnet("check --set gamma_nl=150 --set power=1e-6 --set lambda=1550e-9 --set q=3.5e9");
  ASSERT_EQ(q.exit_code, 0);
  EXPECT_LT(std::abs(std::stod(value_of(q.out, "threshold_q")) / 3.5e9 - 1.0), 0.2);

  const CliRun none = slhnet("check --set gamma_nl=150 --set power=0 --set length=670");
  ASSERT_EQ(none.exit_code, 0);
  EXPECT_EQ(value_of(none.out, "waveguide_nonlinearity"), "negligible");

  EXPECT_EQ(slhnet("check --set gamma_nl=-1 --set power=1e-6 --set length=670").exit_code, 2);
  EXPECT_EQ(slhnet("check --set bogus=1").exit_code, 2);
}

TEST(Cli, OracleSubcommand) {
  const CliRun r = slhnet("oracle " + kCcd + " --set alpha=2000 --wavelength 1550.02");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_LT(std::stod(value_of(r.out, "max_relative_difference")), 1e-4);
  EXPECT_LT(std::stod(value_of(r.out, "mean_photons")), 0.01);
}

TEST(Cli, IdenticalManifestsGiveIdenticalBytes) {
  const slh::CcdParams t = slh::testing::fit_truth();
  const std::string data = write_temp("rep.csv", slh::write_spectrum_csv(slh::synth_data(t, slh::testing::fit_grid(), 0.2, 4)));
  const std::string cfg = write_temp("rep.cfg", "max_evaluations=800\nfit.kappa=3e10 9e10 6e10\nfit.eta=0 1 0.2\n");
  for (const std::string& args :
       {"compose " + kCcd + " --set phi=1.2", "spectrum " + kCcd + " --grid 1549:1551:50 --set eta=0.3",
        "fit " + data + " " + kCcd + " --config " + cfg + " --seed 11",
        std::string("check --set gamma_nl=150 --set power=1e-6 --set length=100")}) {
    const CliRun a = slhnet(args), b = slhnet(args);
    EXPECT_EQ(a.exit_code, 0) << args;
    EXPECT_EQ(a.out, b.out) << args;
  }
}

}  // namespace
