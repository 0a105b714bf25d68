#include "oracle.hpp"

#include <cmath>

#include "common.hpp"
#include "stats.hpp"

namespace ps {

LinearResponsePropagator::LinearResponsePropagator(double omega, double R,
                                                   double phi, double eta,
                                                   double dt) {
  require(omega >= 0.0, status::invalid_argument, "omega must be nonnegative");
  require(R >= 0.0, status::invalid_argument, "R must be nonnegative");
  require(eta >= 0.0 && eta <= 1.0, status::invalid_argument,
          "eta must lie in [0,1]");
  require(dt > 0.0, status::invalid_argument, "dt must be positive");
  p_ = eta * dt * (R * R + 0.5);
  if (p_ > 0.1 + 1e-12)
    fail(status::step_size,
         strformat("expected click count %g exceeds 0.1 per step; choose dt "
                   "<= 0.1/(eta*(R^2+0.5))",
                   p_));
  if (eta > 0.2)
    warning_ = strformat(
        "eta=%g is outside the small-efficiency regime the linear model "
        "assumes (eta <= 0.2)",
        eta);

  ax_ = std::exp(-0.5 * dt);

  // (dy, dz) drift matrix M = [[-1/2, -2w], [2w, -1]] exponentiates to
  // e^{-3dt/4} [cos(n dt) I + sin(n dt)/n B], B = M + (3/4) I, traceless with
  // B^2 = -(4w^2 - 1/16) I. The three branches keep full accuracy across the
  // oscillatory / overdamped crossover.
  double disc = 4.0 * omega * omega - 1.0 / 16.0;
  double cs, sn;  // cos-like factor and sin-like factor already divided by n
  if (disc > 1e-12) {
    double w = std::sqrt(disc);
    cs = std::cos(w * dt);
    sn = std::sin(w * dt) / w;
  } else if (disc < -1e-12) {
    double k = std::sqrt(-disc);
    cs = std::cosh(k * dt);
    sn = std::sinh(k * dt) / k;
  } else {
    cs = 1.0 + 0.5 * disc * dt * dt;
    sn = dt * (1.0 + disc * dt * dt / 6.0);
  }
  double damp = std::exp(-0.75 * dt);
  myy_ = damp * (cs + 0.25 * sn);
  myz_ = damp * (-2.0 * omega * sn);
  mzy_ = damp * (2.0 * omega * sn);
  mzz_ = damp * (cs - 0.25 * sn);

  double denom = 1.0 + 2.0 * R * R;
  kx_ = 2.0 * R * std::cos(phi) / denom;
  ky_ = -2.0 * R * std::sin(phi) / denom;
  kz_ = -1.0 / denom;

  exp_mp_ = std::exp(-p_);
}

LinearResponseState LinearResponsePropagator::step(
    const LinearResponseState& s, rng& gen) const {
  // Poisson inversion with the cached e^{-p}; same sampling path as
  // rng::poisson, one uniform per step.
  double u = gen.uniform();
  int k = 0;
  double term = exp_mp_, cum = exp_mp_;
  while (u > cum && k < 64) {
    ++k;
    term *= p_ / static_cast<double>(k);
    cum += term;
  }
  double dn = static_cast<double>(k) - p_;
  LinearResponseState out;
  out.dx = ax_ * s.dx + kx_ * dn;
  out.dy = myy_ * s.dy + myz_ * s.dz + ky_ * dn;
  out.dz = mzy_ * s.dy + mzz_ * s.dz + kz_ * dn;
  return out;
}

LinearResponseState linear_response_step(const LinearResponseState& s,
                                         double omega, double R, double phi,
                                         double eta, double dt, rng& gen) {
  LinearResponsePropagator prop(omega, R, phi, eta, dt);
  return prop.step(s, gen);
}

double purity_curve(double t, double eta, double R, double phi) {
  require(t >= 0.0, status::invalid_argument, "t must be nonnegative");
  require(eta >= 0.0 && eta <= 1.0, status::invalid_argument,
          "eta must lie in [0,1]");
  require(R >= 0.0, status::invalid_argument, "R must be nonnegative");
  double denom = 1.0 + 2.0 * R * R;
  double c = std::cos(phi), sphi = std::sin(phi);
  double term_x = eta * R * R * c * c / denom * (1.0 - std::exp(-t));
  double term_yz = eta * (1.0 + 4.0 * R * R * sphi * sphi) / (6.0 * denom) *
                   (1.0 - std::exp(-1.5 * t));
  return 0.5 + term_x + term_yz;
}

double stationary_purity(double eta, double phi) {
  require(eta >= 0.0 && eta <= 1.0, status::invalid_argument,
          "eta must lie in [0,1]");
  double c = std::cos(phi), s = std::sin(phi);
  return 0.5 + eta / 6.0 * (3.0 * c * c + 2.0 * s * s);
}

double a_density(double tau, double a) {
  require(tau > 0.0, status::invalid_argument, "tau must be positive");
  require(std::abs(a) < 1.0, status::invalid_argument,
          "the asymmetry A must lie strictly inside (-1, 1)");
  // ln((1+A)/(1-A)) = 2 atanh(A); work in B to keep the exponent stable
  double b = std::atanh(a);
  double log_pref = -0.5 * std::log(2.0 * M_PI * tau) -
                    1.5 * std::log1p(-a * a);
  double expo = -0.5 * tau - b * b / (2.0 * tau);
  return std::exp(log_pref + expo);
}

double b_cdf(double tau, double b) {
  require(tau > 0.0, status::invalid_argument, "tau must be positive");
  double s = std::sqrt(tau);
  return 0.5 * (normal_cdf((b - tau) / s) + normal_cdf((b + tau) / s));
}

double jump_rate_law(double tau) {
  require(tau > 0.0, status::invalid_argument, "tau must be positive");
  return std::exp(-0.5 * tau) / std::sqrt(tau);
}

}  // namespace ps
