#include "models.hpp"

#include <cmath>

#include "common.hpp"

namespace ps {

Model atom_model(const AtomParams& p) {
  require(p.omega >= 0.0, status::invalid_argument,
          "drive frequency omega must be nonnegative");
  return Model(p.omega * sigma_x(), lowering2());
}

Model atom_model(double omega) { return atom_model(AtomParams{omega}); }

Model qbm_model(const QbmParams& p) {
  require(p.fock_dim >= 2, status::dimension,
          "Fock dimension must be at least 2");
  FockBasis basis{p.fock_dim};
  // Same adequacy requirement as building the coherent state itself; throws
  // a truncation error naming the needed dimension if the tail is too fat.
  coherent_state(p.z, basis);
  Model m(cmat::Zero(p.fock_dim, p.fock_dim), annihilator(basis));
  double r = std::abs(p.z);
  double headroom = r * r + 8.0 * r + 10.0;
  if (static_cast<double>(p.fock_dim) < headroom)
    m.warnings.push_back(strformat(
        "truncation_headroom: fock_dim=%d is below the comfortable bound "
        "%.0f for |z|=%g; top-level population should be monitored",
        p.fock_dim, std::ceil(headroom), r));
  return m;
}

double SubspaceState::B() const {
  require(std::abs(A) < 1.0, status::invalid_argument,
          "B = atanh(A) requires |A| < 1");
  return std::atanh(A);
}

void SubspaceState::validate() const {
  require(std::isfinite(A) && std::abs(A) <= 1.0 + 1e-12,
          status::state_invalid, "population difference A must lie in [-1,1]");
  // (1-A)(1+A) instead of 1-A^2: no cancellation near the poles
  double cap = 0.5 * std::sqrt(std::max(0.0, (1.0 - A) * (1.0 + A)));
  require(std::abs(C) <= cap + 1e-9, status::state_invalid,
          strformat("coherence |C|=%g breaks positivity (cap %g at A=%g)",
                    std::abs(C), cap, A));
}

SubspaceReduction subspace_reduce(const DensityMatrix& rho,
                                  const QbmParams& p) {
  double r = std::abs(p.z);
  require(r >= 2.0, status::invalid_argument,
          "subspace reduction needs |z| >= 2 so the packets barely overlap");
  require(rho.dim() == p.fock_dim, status::dimension,
          "state dimension does not match fock_dim");
  FockBasis basis{p.fock_dim};
  cvec vp = coherent_vec(p.z, basis);
  cvec vm = coherent_vec(-p.z, basis);

  // Symmetric (Loewdin) orthogonalization of the slightly overlapping pair,
  // so the projectors are well defined at finite r.
  cmat s(2, 2);
  complexd ov = vp.dot(vm);  // <+z|-z>, ~ e^{-2r^2}
  s << 1.0, ov, std::conj(ov), 1.0;
  Eigen::SelfAdjointEigenSolver<cmat> es(s);
  require(es.eigenvalues().minCoeff() > 1e-12, status::numeric,
          "packet overlap too large to orthogonalize");
  cmat t = es.eigenvectors() *
           es.eigenvalues()
               .cwiseSqrt()
               .cwiseInverse()
               .cast<complexd>()
               .asDiagonal() *
           es.eigenvectors().adjoint();  // S^{-1/2}

  cmat g(2, 2);
  g(0, 0) = vp.dot(rho.m * vp);
  g(0, 1) = vp.dot(rho.m * vm);
  g(1, 0) = std::conj(g(0, 1));
  g(1, 1) = vm.dot(rho.m * vm);
  cmat rho2 = t * g * t;

  SubspaceReduction out;
  out.state.A = rho2(0, 0).real() - rho2(1, 1).real();
  out.state.C = rho2(0, 1);
  out.leakage = 1.0 - rho2(0, 0).real() - rho2(1, 1).real();
  // Near a pure packet the minority population is computed with ~1e-16
  // absolute error, which makes the positivity cap uncertain at the
  // sqrt(ulp) ~ 1e-8 scale. Coherences below that floor are numerical noise
  // left over from the orthogonalization, not signal.
  if (std::abs(out.state.C) < 1e-7) out.state.C = 0.0;
  if (out.state.A > 1.0) out.state.A = 1.0;
  if (out.state.A < -1.0) out.state.A = -1.0;
  if (out.leakage > 0.05)
    fail(status::leakage,
         strformat("population %.3g leaked out of the two-packet subspace "
                   "(limit 0.05); the reduction is not meaningful",
                   out.leakage));
  out.state.validate();
  return out;
}

SubspaceState subspace_phono_step(const SubspaceState& s, double r, double eta,
                                  double dt, rng& gen) {
  s.validate();
  require(r >= 0.0, status::invalid_argument, "amplitude r must be >= 0");
  require(eta >= 0.0 && eta <= 1.0, status::invalid_argument,
          "efficiency eta must lie in [0,1]");
  require(dt > 0.0, status::invalid_argument, "dt must be positive");
  double rate = 2.0 * r * r * dt;
  require(rate <= 0.1 + 1e-12, status::step_size,
          strformat("2 r^2 dt = %g exceeds 0.1; decrease dt", rate));
  double mean = eta * dt * r * r;  // both packets share <a†a> = r^2
  int dn = gen.poisson(mean);
  SubspaceState out = s;  // A untouched, by construction
  out.C = s.C * (1.0 - rate - (static_cast<double>(dn) - mean));
  return out;
}

double subspace_b_step(double B, double dtau, rng& gen) {
  require(dtau > 0.0, status::invalid_argument, "dtau must be positive");
  require(dtau <= 1e-3 + 1e-15, status::step_size,
          "dtau must not exceed 1e-3");
  return B + std::tanh(B) * dtau + gen.normal() * std::sqrt(dtau);
}

double tau_of_t(double t, double eta, double r, double phi, double theta) {
  double c = std::cos(phi - theta);
  return 4.0 * t * eta * r * r * c * c;
}

DensityMatrix coherent_mixture(complexd z, const FockBasis& basis) {
  cvec vp = coherent_vec(z, basis);
  cvec vm = coherent_vec(-z, basis);
  cmat m = 0.5 * (vp * vp.adjoint()) + 0.5 * (vm * vm.adjoint());
  return DensityMatrix(std::move(m));
}

DensityMatrix cat_state(complexd z, const FockBasis& basis) {
  cvec vp = coherent_vec(z, basis);
  cvec vm = coherent_vec(-z, basis);
  cvec psi = vp + vm;
  double n = psi.norm();
  require(n > 1e-12, status::numeric, "degenerate superposition");
  psi /= n;
  return pure_state(psi);
}

}  // namespace ps
