#pragma once

#include <Eigen/Dense>

#include "common.hpp"

namespace ps {

using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;

// Basis convention, used everywhere: sigma_z eigenbasis with the excited
// state |e> at index 0 and ground |g> at index 1, so sigma_z = diag(1,-1)
// and c = (sigma_x - i sigma_y)/2 maps |e> -> |g>.
cmat sigma_x();
cmat sigma_y();
cmat sigma_z();
cmat lowering2();  // c for the two-level system

struct BlochVector {
  double x = 0, y = 0, z = 0;
  double norm2() const { return x * x + y * y + z * z; }
};

// Hermitian, unit-trace, positive matrix. Validation tolerances: 1e-9 for
// hermiticity/trace, -1e-6 for the smallest eigenvalue (stochastic steps may
// transiently dip slightly negative). Positivity is only checked where a
// DensityMatrix is constructed or explicitly revalidated, not per step.
struct DensityMatrix {
  cmat m;

  DensityMatrix() = default;
  explicit DensityMatrix(cmat mat, bool validate_now = true);

  int dim() const { return static_cast<int>(m.rows()); }
  void validate() const;
};

double min_eigenvalue(const cmat& h);          // Hermitian input
cmat hermitized(const cmat& m);                // (m + m†)/2
void hermitize_renormalize(cmat& m);           // in place, trace -> 1

// Clip negative eigenvalues and renormalize; returns the amount of negative
// weight removed (0 when the input was already positive).
double psd_repair(cmat& m);

DensityMatrix bloch_to_density(const BlochVector& b);
BlochVector density_to_bloch(const DensityMatrix& rho);

double purity(const DensityMatrix& rho);
double purity(const cmat& rho);

// Tr(rho0 * rho); both arguments must share a dimension.
double fidelity_to(const DensityMatrix& rho0, const DensityMatrix& rho);

struct FockBasis {
  int dim;  // truncation D >= 2; number states |0..D-1>
};

// a|n> = sqrt(n)|n-1> on the truncated basis; a†a has eigenvalues 0..D-1.
cmat annihilator(const FockBasis& basis);

// Normalized truncated coherent amplitudes <n|z>, n < D. Errors when the
// truncated tail mass exceeds 1e-8 (message names the required dimension).
cvec coherent_vec(complexd z, const FockBasis& basis);
DensityMatrix coherent_state(complexd z, const FockBasis& basis);

// Smallest dimension for which both the tail mass stays below 1e-8 and the
// eigenrelation defect ||(a-z)|z_D>|| stays below 1e-4. coherent_state only
// enforces the tail bound; callers that need the eigenrelation accuracy
// should size the basis with this.
int coherent_required_dim(complexd z);

DensityMatrix pure_state(const cvec& psi);
cvec number_vec(int n, const FockBasis& basis);

double expect_real(const cmat& rho, const cmat& op);    // Re Tr(rho op)
complexd expect(const cmat& rho, const cmat& op);       // Tr(rho op)

}  // namespace ps
