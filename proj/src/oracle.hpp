#pragma once

#include <string>

#include "rng.hpp"

namespace ps {

// Fluctuation of the Bloch vector around the strong-drive stationary state.
struct LinearResponseState {
  double dx = 0.0, dy = 0.0, dz = 0.0;
};

// Exact one-step propagator for the linearized homodyne-counting SDE
//   d(dx) = -dx/2 dt + kx dn
//   d(dy) = (-dy/2 - 2w dz) dt + ky dn
//   d(dz) = (2w dy - dz) dt + kz dn
// with kick k = (2R cos phi, -2R sin phi, -1)/(1+2R^2) and centered counts
// dn = dN - eta dt (R^2 + 1/2). The drift is integrated in closed form so the
// step stays stable at large w; the click mean is state independent, which is
// what makes the linear model cheap.
class LinearResponsePropagator {
 public:
  LinearResponsePropagator(double omega, double R, double phi, double eta,
                           double dt);

  LinearResponseState step(const LinearResponseState& s, rng& gen) const;

  double click_mean() const { return p_; }
  const std::string& warning() const { return warning_; }

 private:
  double ax_;                      // e^{-dt/2}
  double myy_, myz_, mzy_, mzz_;   // exact yz drift propagator
  double kx_, ky_, kz_;
  double p_;
  double exp_mp_;  // e^{-p}, cached for the Poisson inversion
  std::string warning_;
};

LinearResponseState linear_response_step(const LinearResponseState& s,
                                         double omega, double R, double phi,
                                         double eta, double dt, rng& gen);

// Noise-averaged purity of the linearized model, all finite-R factors kept:
// 1/2 + eta R^2 cos^2(phi)/(1+2R^2) (1-e^{-t})
//     + eta (1+4R^2 sin^2(phi))/(6(1+2R^2)) (1-e^{-3t/2}).
double purity_curve(double t, double eta, double R, double phi);

// Long-time limit at strong local oscillator:
// 1/2 + (eta/6)(3 cos^2(phi) + 2 sin^2(phi)).
double stationary_purity(double eta, double phi);

// Density of the packet asymmetry A at rescaled time tau, for the B process
// started at 0. Diverging prefactor at |A|->1 is countered by the Gaussian.
double a_density(double tau, double a);

// Closed-form CDF of B(tau): B is a Brownian path with a fair random +-tau
// drift, so F(b) = (Phi((b-tau)/sqrt(tau)) + Phi((b+tau)/sqrt(tau)))/2.
double b_cdf(double tau, double b);

// Decay law of the +-1 flip frequency, exp(-tau/2)/sqrt(tau), up to an
// overall constant fixed by fits.
double jump_rate_law(double tau);

}  // namespace ps
