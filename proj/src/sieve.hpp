#pragma once

#include <string>
#include <utility>
#include <vector>

#include "models.hpp"
#include "unravel.hpp"

namespace ps {

struct SieveCandidate {
  std::string descriptor;
  BlochVector bloch;  // filled by the Bloch scan, zero otherwise
  double purity_rate = 0, purity_se = 0;
  double fidelity_rate = 0, fidelity_se = 0;
};

// ranking[0] is the best pointer candidate: the one whose loss rate is
// closest to zero. Ties break on the descriptor so reports are stable.
struct SieveReport {
  std::vector<SieveCandidate> candidates;
  std::vector<int> ranking;
};

// Initial purity-loss rate (1-eta) * 2 Tr(rho0 L[rho0]) of a pure state under
// the unconditional generator; the Hamiltonian part traces away. Mixed input
// is rejected, the formula assumes rho0 = rho0^2.
double purity_loss_rate_closed(const DensityMatrix& rho0, const Model& m,
                               double eta);

struct McRate {
  double rate = 0, se = 0;
};

// Monte Carlo version: mean of (purity(rho') - 1)/dt over n_traj single
// conditioned steps, which picks up the second-order noise term by
// construction. eta = 0 reproduces the closed form with zero variance.
McRate purity_loss_rate_mc(const DensityMatrix& rho0, const Model& m,
                           const MeasurementScheme& s, double dt, long n_traj,
                           uint64_t seed);

// Initial fidelity-loss rate Tr(rho0 D[rho0]) with D the dissipator alone;
// independent of the measurement by construction (no scheme argument) and
// well defined for mixed states too.
double fidelity_loss_rate(const DensityMatrix& rho0, const Model& m);

// Fidelity-loss rate of a two-level Bloch state averaged over one full drive
// period 2*pi/omega, with the collapse operator rotated into the interaction
// picture of H = omega * sigma_x. Equals (x^2 - 3)/8 for pure states.
double period_avg_fidelity_loss(const BlochVector& b0, double omega);

// Same average over a window min(2*pi/omega, 1): the full period when the
// drive is fast, one decay time when it is slow. Closed form (the integrand
// is a trig polynomial in 2*omega*t), so it is cheap enough for dense scans.
double window_avg_fidelity_loss(const BlochVector& b0, double omega);

// Scores pure states on a Fibonacci-sphere grid ("grid" points per great
// circle) by the window-averaged fidelity-loss rate; the purity column is the
// same window average scaled by 2(1-eta), so both columns rank identically
// and the ranking is manifestly eta-independent.
SieveReport sieve_scan_bloch(double omega, double eta, int grid);

// Scores explicit Fock-space candidates for the damped oscillator. Candidates
// must live in the model's truncated basis with negligible top-level weight.
SieveReport sieve_scan_coherent(
    const QbmParams& p,
    const std::vector<std::pair<std::string, DensityMatrix>>& candidates);

}  // namespace ps
