#include "sieve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stats.hpp"

namespace ps {

namespace {

void require_pure(const DensityMatrix& rho0, const char* fn) {
  double p = purity(rho0);
  require(p >= 1.0 - 1e-9, status::state_invalid,
          strformat("%s needs a pure state, got purity %.12g", fn, p));
}

void require_same_dim(const DensityMatrix& rho0, const Model& m) {
  require(rho0.dim() == m.dim, status::dimension,
          strformat("state dimension %d does not match the model dimension %d",
                    rho0.dim(), m.dim));
}

// Ranking key: rates are nonpositive, the best pointer loses least.
void rank_candidates(SieveReport& rep) {
  rep.ranking.resize(rep.candidates.size());
  std::iota(rep.ranking.begin(), rep.ranking.end(), 0);
  std::stable_sort(rep.ranking.begin(), rep.ranking.end(), [&](int a, int b) {
    const SieveCandidate& ca = rep.candidates[a];
    const SieveCandidate& cb = rep.candidates[b];
    if (ca.fidelity_rate != cb.fidelity_rate)
      return ca.fidelity_rate > cb.fidelity_rate;
    return ca.descriptor < cb.descriptor;
  });
}

}  // namespace

double purity_loss_rate_closed(const DensityMatrix& rho0, const Model& m,
                               double eta) {
  m.validate();
  require_same_dim(rho0, m);
  require(eta >= 0.0 && eta <= 1.0, status::invalid_argument,
          strformat("efficiency eta=%g outside [0,1]", eta));
  require_pure(rho0, "purity_loss_rate_closed");
  cmat l = lindblad_rhs(m, rho0.m);
  return (1.0 - eta) * 2.0 * expect_real(rho0.m, l);
}

namespace {

// One sampled purity increment (P(rho + drho) - P(rho))/dt, with drho the
// first-order conditioned update and the quadratic purity functional expanded
// exactly: P(rho + drho) = P + 2Tr(rho drho) + Tr(drho^2), using dN^2 = dN
// (respectively dW^2 = dt) when reducing the second-order term. Expanding
// before normalizing matters: any scheme that renormalizes the updated matrix
// first picks up an O(dt) bias ~ eta(1-eta) kappa dt from the trace quadratic
// term, which at usable step sizes is several standard errors and would bend
// the (1-eta) law this estimator exists to measure.
double purity_increment_sample(const DensityMatrix& rho0, const Model& m,
                               const MeasurementScheme& s, double dt,
                               rng& gen) {
  const cmat& r = rho0.m;
  double drift = 2.0 * expect_real(r, lindblad_rhs(m, r));
  if (s.kind == SchemeKind::unconditional || s.eta == 0.0) return drift;

  if (s.kind == SchemeKind::jump) {
    double p_raw = expected_click(rho0, m, s, dt);
    require(p_raw <= 0.1 + 1e-12, status::step_size,
            strformat("expected click count %g exceeds 0.1 per step; choose "
                      "dt <= 0.1/(eta*R^2 + eta)",
                      p_raw));
    complexd gamma = std::polar(s.R, s.phi);
    cmat x = m.c;
    x.diagonal().array() += gamma;
    // between clicks: drho = [L(rho) - eta(X rho X† - <X†X> rho)] dt
    cmat xrx = x * r * x.adjoint();
    double lam = xrx.trace().real();
    double cond = drift - 2.0 * s.eta *
                              (expect_real(r, xrx) - lam * purity(r));
    int dn = gen.poisson(std::min(1.0, p_raw));
    if (dn >= 1) cond += (double(dn) / dt) * (purity(xrx / lam) - purity(r));
    return cond;
  }

  // homodyne: drho = L(rho) dt + B dW with
  // B = sqrt(eta) (e^{-i phi} c rho + e^{i phi} rho c† - <x_phi> rho)
  complexd y = std::polar(1.0, -s.phi);
  cmat cr = m.c * r;
  double xphi = 2.0 * std::real(y * cr.trace());
  cmat b = y * cr;
  b += b.adjoint().eval();
  b -= xphi * r;
  b *= std::sqrt(s.eta);
  double dw = gen.normal() * std::sqrt(dt);
  return drift + (b * b).trace().real() +
         (dw / dt) * 2.0 * expect_real(r, b);
}

}  // namespace

McRate purity_loss_rate_mc(const DensityMatrix& rho0, const Model& m,
                           const MeasurementScheme& s, double dt, long n_traj,
                           uint64_t seed) {
  m.validate();
  s.validate();
  require_same_dim(rho0, m);
  require(dt > 0.0, status::step_size, "dt must be positive");
  require(n_traj >= 1, status::invalid_argument, "n_traj must be at least 1");
  require_pure(rho0, "purity_loss_rate_mc");

  RunningStat rs;
  for (long k = 0; k < n_traj; ++k) {
    rng gen = make_stream(seed, k);
    rs.add(purity_increment_sample(rho0, m, s, dt, gen));
  }
  return {rs.mean, n_traj >= 2 ? rs.stderr_mean() : 0.0};
}

double fidelity_loss_rate(const DensityMatrix& rho0, const Model& m) {
  m.validate();
  require_same_dim(rho0, m);
  const cmat& r = rho0.m;
  complexd gain = (r * m.c * r * m.c.adjoint()).trace();
  complexd drain = (r * r * m.cdagc).trace();
  return (gain - drain).real();
}

double period_avg_fidelity_loss(const BlochVector& b0, double omega) {
  require(omega > 0.0, status::invalid_argument,
          "the period average needs omega > 0");
  DensityMatrix rho = bloch_to_density(b0);
  cmat c = lowering2();
  cmat sx = sigma_x();
  cmat id = cmat::Identity(2, 2);

  // Midpoint rule over one period; exact here because the integrand is a
  // trig polynomial of degree 2 in omega*t.
  const int n = 64;
  double period = 2.0 * M_PI / omega;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    double t = (j + 0.5) * period / n;
    cmat u = std::cos(omega * t) * id +
             complexd(0, 1) * std::sin(omega * t) * sx;
    cmat cint = u * c * u.adjoint();
    complexd gain = (rho.m * cint.adjoint() * rho.m * cint).trace();
    complexd drain = (rho.m * cint.adjoint() * cint * rho.m).trace();
    acc += (gain - drain).real();
  }
  double avg = acc / n;
  require(std::isfinite(avg), status::numeric,
          "period-average quadrature produced a non-finite value");
  return avg;
}

double window_avg_fidelity_loss(const BlochVector& b0, double omega) {
  require(omega >= 0.0, status::invalid_argument,
          strformat("omega=%g must be nonnegative", omega));
  bloch_to_density(b0);  // validates |b| <= 1

  // In the interaction picture c(t) = (sigma_x - i sigma_w)/2 with the axis
  // w = cos(2wt) y - sin(2wt) z, giving for rho = (1 + r.sigma)/2
  //   f(t) = [(1-r^2) + x^2 + (c y - s z)^2]/4 - 1/2 - (c z + s y)/2,
  // a trig polynomial whose window moments have closed forms.
  double T = (omega > 2.0 * M_PI) ? 2.0 * M_PI / omega : 1.0;
  double th = 2.0 * omega * T;
  double c1, s1, c2, s2, cs;
  if (th < 1e-12) {
    c1 = 1.0, s1 = 0.0, c2 = 1.0, s2 = 0.0, cs = 0.0;
  } else {
    c1 = std::sin(th) / th;
    double sh = std::sin(0.5 * th);
    s1 = 2.0 * sh * sh / th;
    c2 = 0.5 + std::sin(2.0 * th) / (4.0 * th);
    s2 = 1.0 - c2;
    double st = std::sin(th);
    cs = st * st / (2.0 * th);
  }
  double r2 = b0.norm2();
  double cross = c2 * b0.y * b0.y + s2 * b0.z * b0.z - 2.0 * cs * b0.y * b0.z;
  return 0.25 * ((1.0 - r2) + b0.x * b0.x + cross) - 0.5 -
         0.5 * (c1 * b0.z + s1 * b0.y);
}

SieveReport sieve_scan_bloch(double omega, double eta, int grid) {
  require(grid >= 8, status::invalid_argument,
          strformat("grid=%d is too coarse, need at least 8 points per great "
                    "circle",
                    grid));
  require(omega >= 0.0, status::invalid_argument, "omega must be nonnegative");
  require(eta >= 0.0 && eta <= 1.0, status::invalid_argument,
          strformat("efficiency eta=%g outside [0,1]", eta));

  // Fibonacci sphere sized so neighbor spacing stays under 2*pi/grid.
  int n = static_cast<int>(std::ceil(2.0 * grid * double(grid) / M_PI));
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));

  SieveReport rep;
  rep.candidates.reserve(n);
  for (int i = 0; i < n; ++i) {
    BlochVector b;
    b.z = 1.0 - (2.0 * i + 1.0) / n;
    double rad = std::sqrt(std::max(0.0, 1.0 - b.z * b.z));
    b.x = rad * std::cos(golden_angle * i);
    b.y = rad * std::sin(golden_angle * i);
    SieveCandidate cand;
    cand.descriptor = strformat("bloch(%+.6f,%+.6f,%+.6f)", b.x, b.y, b.z);
    cand.bloch = b;
    cand.fidelity_rate = window_avg_fidelity_loss(b, omega);
    cand.purity_rate = 2.0 * (1.0 - eta) * cand.fidelity_rate;
    rep.candidates.push_back(std::move(cand));
  }
  rank_candidates(rep);
  return rep;
}

SieveReport sieve_scan_coherent(
    const QbmParams& p,
    const std::vector<std::pair<std::string, DensityMatrix>>& candidates) {
  Model m = qbm_model(p);
  SieveReport rep;
  rep.candidates.reserve(candidates.size());
  for (const auto& [name, rho] : candidates) {
    require(rho.dim() == m.dim, status::dimension,
            strformat("candidate '%s' has dimension %d, the model uses %d",
                      name.c_str(), rho.dim(), m.dim));
    double top = rho.m(m.dim - 1, m.dim - 1).real();
    require(top <= 1e-6, status::truncation,
            strformat("candidate '%s' puts %.3g on the top Fock level; it is "
                      "not representable in this truncation",
                      name.c_str(), top));
    SieveCandidate cand;
    cand.descriptor = name;
    cand.fidelity_rate = fidelity_loss_rate(rho, m);
    cand.purity_rate = 2.0 * cand.fidelity_rate;
    rep.candidates.push_back(std::move(cand));
  }
  rank_candidates(rep);
  return rep;
}

}  // namespace ps
