#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qmatrix.hpp"
#include "rng.hpp"

namespace ps {

// Hilbert-space dimension, self-Hamiltonian (units of inverse decay time) and
// collapse operator with decay rate normalized to 1.
struct Model {
  int dim = 0;
  cmat H, c;
  cmat cdagc;  // cached c†c
  std::vector<std::string> warnings;

  Model() = default;
  Model(cmat H_, cmat c_);
  void validate() const;
};

enum class SchemeKind { unconditional, jump, diffusive };

struct MeasurementScheme {
  SchemeKind kind = SchemeKind::unconditional;
  double R = 0.0;    // local-oscillator amplitude
  double phi = 0.0;  // homodyne phase, radians
  double eta = 0.0;  // efficiency in [0,1]; 0 behaves unconditional
  void validate() const;
};

struct DetectionRecord {
  SchemeKind kind = SchemeKind::unconditional;
  uint64_t seed = 0;
  // jump: strictly increasing click times; counts[i] >= 1 clicks at times[i]
  std::vector<double> click_times;
  std::vector<int> click_counts;
  // diffusive: per-step Wiener increments
  std::vector<double> wiener;
};

struct StepDiagnostics {
  long n_steps = 0;
  long n_clicks = 0;        // total dN summed
  long n_multi_clicks = 0;  // steps with dN >= 2
  long n_psd_repairs = 0;
  double max_top_pop = 0.0;  // top Fock level population seen at samples
};

struct SampleObs {
  double t = 0;
  double x = 0, y = 0, z = 0;     // Bloch components (dim 2 only)
  double re_c = 0, im_c = 0;      // <c>
  double n_c = 0;                 // <c†c>
  double purity = 0;
  double fidelity = 0;            // Tr(rho0 rho_int(t)), interaction picture
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;  // empty unless requested
  std::vector<SampleObs> obs;
  DetectionRecord record;
  uint64_t seed = 0;
  StepDiagnostics diag;
};

enum class DiffusiveVariant {
  kraus,  // default: one-step Kraus map, exactly purity-preserving at eta=1
  euler,  // literal first-order increment
};

struct StepOptions {
  bool midpoint = true;       // drift substeps use a midpoint refinement
  double ume_dt_cap = 0.01;   // configurable cap for the plain UME step
  DiffusiveVariant variant = DiffusiveVariant::kraus;
};

// dρ = -i[H,ρ]dt + (cρc† - ½{c†c,ρ})dt
cmat lindblad_rhs(const Model& m, const cmat& rho);

DensityMatrix ume_step(const DensityMatrix& rho, const Model& m, double dt,
                       const StepOptions& opts = {});

// η dt Tr[(c+γ)ρ(c†+γ*)], γ = R e^{iφ}; clamped to [0,1] before sampling.
double expected_click(const DensityMatrix& rho, const Model& m,
                      const MeasurementScheme& s, double dt);

struct JumpResult {
  DensityMatrix rho;
  int dn = 0;
};
JumpResult jump_step(const DensityMatrix& rho, const Model& m,
                     const MeasurementScheme& s, double dt, rng& gen,
                     const StepOptions& opts = {});

struct DiffusiveResult {
  DensityMatrix rho;
  double dw = 0.0;
};
DiffusiveResult diffusive_step(const DensityMatrix& rho, const Model& m,
                               const MeasurementScheme& s, double dt, rng& gen,
                               const StepOptions& opts = {});

// Pulls rho toward XρX†/Tr; the post-click state of the jump unraveling.
cmat jump_target(const cmat& rho, const cmat& X);

struct RunOptions {
  bool store_states = true;
  bool store_record = true;
  StepOptions step;
};

Trajectory run_trajectory(const Model& m, const MeasurementScheme& s,
                          const DensityMatrix& rho0, double t_final, double dt,
                          const std::vector<double>& sample_times, uint64_t seed,
                          const RunOptions& opts = {});

struct MeanSE {
  double mean = 0, se = 0;
};

enum Observable : int {
  kObsX = 0,
  kObsY,
  kObsZ,
  kObsReC,
  kObsImC,
  kObsN,
  kObsPurity,
  kObsFidelity,
  kObsCount
};

struct EnsembleStats {
  std::vector<double> times;
  // series[i][obs] at sample i
  std::vector<std::array<MeanSE, kObsCount>> series;
  long n_traj = 0;
  StepDiagnostics diag;  // aggregated
};

EnsembleStats ensemble_mean(const Model& m, const MeasurementScheme& s,
                            const DensityMatrix& rho0, double t_final, double dt,
                            const std::vector<double>& sample_times, long n_traj,
                            uint64_t master_seed, int threads = 1,
                            const StepOptions& step = {});

// Generic ensemble sweep: sampler(rho, sample_idx, t, out_row_segment) is
// called at each sample time; returns an n_traj x (n_samples*width) row-major
// matrix filled in trajectory order (deterministic regardless of thread count).
using SampleFn =
    std::function<void(const cmat& rho, int sample_idx, double t, double* out)>;
std::vector<double> ensemble_collect(const Model& m, const MeasurementScheme& s,
                                     const DensityMatrix& rho0, double t_final,
                                     double dt,
                                     const std::vector<double>& sample_times,
                                     long n_traj, uint64_t master_seed, int threads,
                                     int width, const SampleFn& sampler,
                                     StepDiagnostics* diag_out = nullptr,
                                     const StepOptions& step = {});

}  // namespace ps
