#include "qmatrix.hpp"

#include <cmath>

namespace ps {

namespace {
const complexd I1(0.0, 1.0);
}

cmat sigma_x() {
  cmat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

cmat sigma_y() {
  cmat m(2, 2);
  m << 0, -I1, I1, 0;
  return m;
}

cmat sigma_z() {
  cmat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

cmat lowering2() {
  cmat m = cmat::Zero(2, 2);
  m(1, 0) = 1.0;  // c|e> = |g>
  return m;
}

DensityMatrix::DensityMatrix(cmat mat, bool validate_now) : m(std::move(mat)) {
  if (validate_now) validate();
}

void DensityMatrix::validate() const {
  require(m.rows() == m.cols() && m.rows() >= 1, status::dimension,
          "density matrix must be square");
  double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  require(herm <= kHermTol, status::state_invalid,
          strformat("density matrix not Hermitian: max |m - m'| = %.3e", herm));
  double tr = std::abs(m.trace() - complexd(1.0, 0.0));
  require(tr <= kTraceTol, status::state_invalid,
          strformat("density matrix trace off by %.3e", tr));
  double lo = min_eigenvalue(m);
  require(lo >= -kEigTol, status::state_invalid,
          strformat("density matrix not positive: min eigenvalue %.3e", lo));
}

double min_eigenvalue(const cmat& h) {
  if (h.rows() == 2) {
    // closed form for 2x2 Hermitian matrices
    double a = h(0, 0).real(), d = h(1, 1).real();
    double ob = std::abs(h(0, 1));
    double mid = 0.5 * (a + d);
    double rad = std::sqrt(0.25 * (a - d) * (a - d) + ob * ob);
    return mid - rad;
  }
  Eigen::SelfAdjointEigenSolver<cmat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

cmat hermitized(const cmat& m) { return 0.5 * (m + m.adjoint()); }

void hermitize_renormalize(cmat& m) {
  m = 0.5 * (m + m.adjoint());
  double tr = m.trace().real();
  require(std::isfinite(tr) && tr > 0.0, status::numeric,
          strformat("state trace degenerate (%.3e); integration diverged", tr));
  m /= tr;
}

double psd_repair(cmat& m) {
  Eigen::SelfAdjointEigenSolver<cmat> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  double clipped = 0.0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0) {
      clipped -= ev(i);
      ev(i) = 0.0;
    }
  }
  if (clipped == 0.0) return 0.0;
  double tr = ev.sum();
  require(tr > 0.0, status::numeric, "state collapsed to zero under repair");
  ev /= tr;
  m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
  return clipped;
}

DensityMatrix bloch_to_density(const BlochVector& b) {
  require(b.norm2() <= 1.0 + 1e-9, status::state_invalid,
          strformat("Bloch vector norm %.12f exceeds 1", std::sqrt(b.norm2())));
  cmat m(2, 2);
  m(0, 0) = 0.5 * (1.0 + b.z);
  m(1, 1) = 0.5 * (1.0 - b.z);
  m(0, 1) = 0.5 * complexd(b.x, -b.y);
  m(1, 0) = 0.5 * complexd(b.x, b.y);
  return DensityMatrix(std::move(m), false);
}

BlochVector density_to_bloch(const DensityMatrix& rho) {
  require(rho.dim() == 2, status::dimension, "Bloch coordinates need a 2x2 state");
  const cmat& m = rho.m;
  BlochVector b;
  b.x = 2.0 * m(1, 0).real();
  b.y = 2.0 * m(1, 0).imag();
  b.z = (m(0, 0) - m(1, 1)).real();
  return b;
}

double purity(const cmat& rho) { return (rho * rho).trace().real(); }
double purity(const DensityMatrix& rho) { return purity(rho.m); }

double fidelity_to(const DensityMatrix& rho0, const DensityMatrix& rho) {
  require(rho0.dim() == rho.dim(), status::dimension,
          strformat("fidelity dimension mismatch: %d vs %d", rho0.dim(), rho.dim()));
  return (rho0.m * rho.m).trace().real();
}

cmat annihilator(const FockBasis& basis) {
  require(basis.dim >= 2, status::dimension, "Fock truncation needs D >= 2");
  cmat a = cmat::Zero(basis.dim, basis.dim);
  for (int n = 1; n < basis.dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

namespace {

// Poisson(|z|^2) tail mass P(n >= D), and the pmf at a given n, computed in
// log space to stay stable at large |z|.
double poisson_pmf(double lambda, int n) {
  if (lambda == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-lambda + n * std::log(lambda) - std::lgamma(n + 1.0));
}

double poisson_tail(double lambda, int d) {
  // sum_{n>=d} pmf; the terms decay fast past n ~ lambda + few*sqrt(lambda)
  double term = poisson_pmf(lambda, d);
  double sum = 0.0;
  for (int n = d; n < d + 2048 && term > 0.0; ++n) {
    sum += term;
    term *= lambda / (n + 1.0);
    if (term < sum * 1e-18 && n > lambda) break;
  }
  return sum;
}

}  // namespace

int coherent_required_dim(complexd z) {
  double lambda = std::norm(z);
  int d = 2;
  while (d < 4096) {
    bool tail_ok = poisson_tail(lambda, d) <= 1e-8;
    // ||(a-z)|z_D>||^2 = |z|^2 p_{D-1} / (1 - tail): defect lives on the top
    // kept level.
    double defect2 = lambda * poisson_pmf(lambda, d - 1);
    bool eig_ok = defect2 <= 1e-8;
    if (tail_ok && eig_ok) return d;
    ++d;
  }
  fail(status::truncation, "coherent amplitude too large for any supported truncation");
}

cvec coherent_vec(complexd z, const FockBasis& basis) {
  require(basis.dim >= 2, status::dimension, "Fock truncation needs D >= 2");
  double lambda = std::norm(z);
  double tail = poisson_tail(lambda, basis.dim);
  if (tail > 1e-8) {
    int need = basis.dim;
    while (need < 4096 && poisson_tail(lambda, need) > 1e-8) ++need;
    fail(status::truncation,
         strformat("coherent state |z|=%.4f needs D >= %d (tail mass %.2e at D=%d)",
                   std::sqrt(lambda), need, tail, basis.dim));
  }
  cvec v(basis.dim);
  // amplitudes z^n / sqrt(n!) built recursively, then normalized on the kept
  // levels
  complexd amp = 1.0;
  v(0) = amp;
  for (int n = 1; n < basis.dim; ++n) {
    amp *= z / std::sqrt(double(n));
    v(n) = amp;
  }
  v.normalize();
  return v;
}

DensityMatrix coherent_state(complexd z, const FockBasis& basis) {
  return pure_state(coherent_vec(z, basis));
}

DensityMatrix pure_state(const cvec& psi) {
  cvec v = psi.normalized();
  return DensityMatrix(v * v.adjoint(), false);
}

cvec number_vec(int n, const FockBasis& basis) {
  require(n >= 0 && n < basis.dim, status::dimension,
          strformat("number state %d outside truncation D=%d", n, basis.dim));
  cvec v = cvec::Zero(basis.dim);
  v(n) = 1.0;
  return v;
}

complexd expect(const cmat& rho, const cmat& op) { return (rho * op).trace(); }
double expect_real(const cmat& rho, const cmat& op) { return expect(rho, op).real(); }

}  // namespace ps
