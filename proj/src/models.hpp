#pragma once

#include "qmatrix.hpp"
#include "rng.hpp"
#include "unravel.hpp"

namespace ps {

struct AtomParams {
  double omega = 0.0;  // drive frequency in units of the decay rate
};

struct QbmParams {
  int fock_dim = 0;
  complexd z;  // coherent amplitude, r = |z|, theta = arg z
};

Model atom_model(const AtomParams& p);
Model atom_model(double omega);
Model qbm_model(const QbmParams& p);

// State of a density matrix restricted to the span of |+z> and |-z>:
//   rho = (1+A)/2 P+ + (1-A)/2 P- + C |+z><-z| + C* |-z><+z|.
struct SubspaceState {
  double A = 0.0;
  complexd C = 0.0;
  double B() const;  // atanh(A); requires |A| < 1
  void validate() const;
};

struct SubspaceReduction {
  SubspaceState state;
  double leakage = 0.0;  // population outside the two-packet subspace
};

SubspaceReduction subspace_reduce(const DensityMatrix& rho, const QbmParams& p);

// Counting detector without local oscillator: dA = 0,
// dC = -C [2 r^2 dt + (dN - <dN>)], <dN> = eta dt r^2.
SubspaceState subspace_phono_step(const SubspaceState& s, double r, double eta,
                                  double dt, rng& gen);

// One explicit step of dB = tanh(B) dtau + dW on the rescaled clock. The
// noise coefficient is constant, so Ito and Stratonovich forms agree.
double subspace_b_step(double B, double dtau, rng& gen);

// Rescaled clock tau = 4 t eta r^2 cos^2(phi - theta).
double tau_of_t(double t, double eta, double r, double phi, double theta);

// Helpers for the two-packet experiments.
DensityMatrix coherent_mixture(complexd z, const FockBasis& basis);
DensityMatrix cat_state(complexd z, const FockBasis& basis);

}  // namespace ps
