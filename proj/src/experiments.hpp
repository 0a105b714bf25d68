#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace ps {

struct ModelConfig {
  std::string type = "atom";  // "atom" | "qbm"
  double omega = 100.0;       // atom drive, in units of the decay rate
  int fock_dim = 32;          // qbm truncation
  double z_re = 3.0;          // qbm packet amplitude
  double z_im = 0.0;
};

struct SchemeConfig {
  std::string kind = "jump";  // "jump" | "diffusive" | "unconditional"
  double R = 0.0;             // local oscillator amplitude
  double phi = 0.0;           // detection phase
  double eta = 0.5;           // detector efficiency
  // fig1 phase sweep; empty means 25 evenly spaced points on [0, pi].
  std::vector<double> phi_grid;
};

struct NumericsConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  // fig1: observation times. fig2: the tau values to histogram. trajectory:
  // when to record observables (empty means 201 evenly spaced points).
  std::vector<double> sample_times;
  long n_traj = 1;
  uint64_t seed = 0;
  bool seed_set = false;  // stochastic experiments refuse to run without one
  int threads = 1;
};

struct SieveConfig {
  int grid = 60;  // Fibonacci-sphere resolution parameter
};

struct ValidateConfig {
  bool quick = false;  // deterministic subset only
};

struct ExperimentConfig {
  std::string experiment;  // fig1 fig2 fig3 sieve validate trajectory
  ModelConfig model;
  SchemeConfig scheme;
  NumericsConfig numerics;
  SieveConfig sieve;
  ValidateConfig validate;
  std::string out;  // output path; empty keeps results in memory
};

// Canonical starting point for each experiment; concrete numbers, so a
// serialized default documents itself.
ExperimentConfig default_config(const std::string& experiment);

// Strict JSON: unknown keys and malformed values are config errors naming the
// section and key. Fields start from default_config of the "experiment" value.
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);

// Range and consistency checks shared by all runners (throws status::config).
void check_config(const ExperimentConfig& cfg);

// Write via temp file + rename so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& content);

// Phase sweep of the homodyne-counting purity gain in the strong local
// oscillator limit. One row per (phi, t); trajectories share random streams
// across phi values, so the sweep is smooth in phi at fixed seed.
struct Fig1Point {
  double phi = 0, t = 0;
  double analytic = 0;  // ensemble-averaged purity gain, closed form
  double mc = 0, se = 0;
};
std::vector<Fig1Point> fig1_points(const ExperimentConfig& cfg);
std::string run_fig1(const ExperimentConfig& cfg);

// Packet-asymmetry ensembles of the log-odds SDE, histogrammed at fixed tau.
// Bins are uniform in B = atanh(A) and the density columns are with respect
// to B; the A column just labels the bin centers.
struct Fig2Block {
  double tau = 0;
  std::vector<double> b_centers;
  std::vector<double> density_analytic;
  std::vector<double> density_mc;
};
// bins_per_sigma: bin width as a fraction of sqrt(tau) (0 = CSV default 0.08).
std::vector<Fig2Block> fig2_blocks(const ExperimentConfig& cfg,
                                   double bins_per_sigma = 0.0);
std::string run_fig2(const ExperimentConfig& cfg);

// Sample asymmetry paths plus the ensemble flip statistics: sign changes of B
// per unit tau in windows [1,2) .. [t_final-1, t_final), fitted against the
// exp(-tau/2)/sqrt(tau) decay law on log scale.
struct FlipWindow {
  double lo = 0, hi = 0;
  long flips = 0;
  double rate_mc = 0;   // flips per trajectory per unit tau
  double rate_law = 0;  // fitted-amplitude decay law at the window center
};
struct Fig3Data {
  std::vector<double> taus;                  // display time grid
  std::vector<std::vector<double>> a_paths;  // display asymmetry paths
  std::vector<FlipWindow> windows;
  double fit_slope = 0;  // 1 when the flip frequency follows the law
};
Fig3Data fig3_data(const ExperimentConfig& cfg);
struct Fig3Result {
  std::string trajectories_csv;
  std::string flips_csv;
  std::string flips_path;  // derived from cfg.out; empty when not written
};
Fig3Result run_fig3(const ExperimentConfig& cfg);

// Candidate ranking by pointer quality (slowest fidelity loss first).
std::string run_sieve(const ExperimentConfig& cfg);

// Single conditioned trajectory, observables at the sample times.
std::string run_trajectory(const ExperimentConfig& cfg);

// Dispatch on cfg.experiment (validate is handled by the validate module).
std::string run_experiment(const ExperimentConfig& cfg);

}  // namespace ps
