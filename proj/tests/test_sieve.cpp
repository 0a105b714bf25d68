#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numeric>

#include "models.hpp"
#include "sieve.hpp"
#include "stats.hpp"

using namespace ps;

namespace {

DensityMatrix excited() {
  cvec psi(2);
  psi << 1, 0;
  return pure_state(psi);
}

DensityMatrix ground() {
  cvec psi(2);
  psi << 0, 1;
  return pure_state(psi);
}

BlochVector bvec(double x, double y, double z) {
  BlochVector b;
  b.x = x;
  b.y = y;
  b.z = z;
  return b;
}

// brute-force window average used to cross-check the closed form
double window_avg_numeric(const BlochVector& b, double omega) {
  DensityMatrix rho = bloch_to_density(b);
  cmat c = lowering2(), sx = sigma_x(), id = cmat::Identity(2, 2);
  double T = (omega > 2.0 * M_PI) ? 2.0 * M_PI / omega : 1.0;
  const int n = 20000;
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    double t = (j + 0.5) * T / n;
    cmat u =
        std::cos(omega * t) * id + complexd(0, 1) * std::sin(omega * t) * sx;
    cmat cint = u * c * u.adjoint();
    acc += ((rho.m * cint.adjoint() * rho.m * cint).trace() -
            (rho.m * cint.adjoint() * cint * rho.m).trace())
               .real();
  }
  return acc / n;
}

}  // namespace

TEST_CASE("closed purity-loss rates of the driven atom") {
  Model m = atom_model(2.0);
  CHECK(std::abs(purity_loss_rate_closed(ground(), m, 0.0)) < 1e-12);
  CHECK(purity_loss_rate_closed(excited(), m, 0.0) ==
        doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(std::abs(purity_loss_rate_closed(excited(), m, 1.0)) < 1e-12);
  DensityMatrix plus = bloch_to_density(bvec(1, 0, 0));
  CHECK(std::abs(purity_loss_rate_closed(plus, m, 1.0)) < 1e-12);
  CHECK(purity_loss_rate_closed(excited(), m, 0.25) ==
        doctest::Approx(0.75 * purity_loss_rate_closed(excited(), m, 0.0))
            .epsilon(1e-12));

  CHECK_THROWS_AS(purity_loss_rate_closed(excited(), m, 1.5), error);
  DensityMatrix mixed(0.5 * cmat::Identity(2, 2));
  try {
    purity_loss_rate_closed(mixed, m, 0.0);
    FAIL("mixed state accepted");
  } catch (const error& e) {
    CHECK(e.code == status::state_invalid);
  }
}

TEST_CASE("purity rate is twice the fidelity rate for pure states") {
  for (double omega : {0.0, 2.0, 100.0}) {
    Model m = atom_model(omega);
    for (auto b : {bvec(0, 0, 1), bvec(1, 0, 0), bvec(0.36, -0.48, 0.8)}) {
      DensityMatrix rho = bloch_to_density(b);
      CHECK(std::abs(purity_loss_rate_closed(rho, m, 0.0) -
                     2.0 * fidelity_loss_rate(rho, m)) < 1e-10);
    }
  }
}

TEST_CASE("fidelity-loss rates") {
  Model atom = atom_model(1.0);
  CHECK(fidelity_loss_rate(excited(), atom) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(fidelity_loss_rate(ground(), atom)) < 1e-14);

  int dim = coherent_required_dim(complexd(1.0, 0.0));
  QbmParams p;
  p.fock_dim = dim;
  p.z = complexd(1.0, 0.0);
  Model qbm = qbm_model(p);
  FockBasis basis{dim};
  CHECK(std::abs(fidelity_loss_rate(coherent_state(p.z, basis), qbm)) < 1e-6);
  CHECK(fidelity_loss_rate(pure_state(number_vec(1, basis)), qbm) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  // mixed states are allowed here
  DensityMatrix half(cmat((0.5 * (pure_state(number_vec(0, basis)).m +
                                  pure_state(number_vec(1, basis)).m))));
  CHECK(std::isfinite(fidelity_loss_rate(half, qbm)));
}

TEST_CASE("period-averaged fidelity loss matches the closed form") {
  for (double omega : {1.0, 100.0}) {
    CHECK(period_avg_fidelity_loss(bvec(1, 0, 0), omega) ==
          doctest::Approx(-0.25).epsilon(1e-9));
    CHECK(period_avg_fidelity_loss(bvec(-1, 0, 0), omega) ==
          doctest::Approx(-0.25).epsilon(1e-9));
    CHECK(period_avg_fidelity_loss(bvec(0, 1, 0), omega) ==
          doctest::Approx(-0.375).epsilon(1e-9));
    CHECK(period_avg_fidelity_loss(bvec(0, 0, 1), omega) ==
          doctest::Approx(-0.375).epsilon(1e-9));
    double x = 0.3, y = -0.5, z = std::sqrt(1.0 - x * x - y * y);
    CHECK(period_avg_fidelity_loss(bvec(x, y, z), omega) ==
          doctest::Approx((x * x - 3.0) / 8.0).epsilon(1e-9));
  }
  CHECK((-3.0 / 8.0) / (-0.25) == doctest::Approx(1.5));
  CHECK_THROWS_AS(period_avg_fidelity_loss(bvec(1, 0, 0), 0.0), error);
}

TEST_CASE("window average: closed form against quadrature") {
  BlochVector b = bvec(0.36, -0.48, 0.8);
  for (double omega : {0.0, 0.01, 3.0, 100.0}) {
    CHECK(window_avg_fidelity_loss(b, omega) ==
          doctest::Approx(window_avg_numeric(b, omega)).epsilon(1e-6));
  }
  // fast drive: the window is exactly one period
  CHECK(window_avg_fidelity_loss(b, 100.0) ==
        doctest::Approx(period_avg_fidelity_loss(b, 100.0)).epsilon(1e-9));
  // slow drive: essentially the instantaneous rate -(1+z)^2/4
  CHECK(window_avg_fidelity_loss(bvec(0, 0, -1), 0.001) ==
        doctest::Approx(0.0).epsilon(1e-4));
  CHECK_THROWS_AS(window_avg_fidelity_loss(b, -1.0), error);
}

TEST_CASE("Bloch sieve: fast drive selects the sigma_x eigenstates") {
  int grid = 60;
  SieveReport rep = sieve_scan_bloch(100.0, 0.0, grid);
  int n = static_cast<int>(std::ceil(2.0 * grid * grid / M_PI));
  CHECK(int(rep.candidates.size()) == n);

  std::vector<int> sorted = rep.ranking;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < n; ++i) REQUIRE(sorted[i] == i);

  double cone = std::cos(2.0 * M_PI / grid);
  for (int k : {0, 1}) {
    const SieveCandidate& c = rep.candidates[rep.ranking[k]];
    CHECK(std::abs(c.bloch.x) >= cone);
    CHECK(std::isfinite(c.purity_rate));
    CHECK(c.purity_rate == doctest::Approx(2.0 * c.fidelity_rate));
  }
  // the pair straddles both poles
  CHECK(rep.candidates[rep.ranking[0]].bloch.x *
            rep.candidates[rep.ranking[1]].bloch.x <
        0.0);
  CHECK_THROWS_AS(sieve_scan_bloch(100.0, 0.0, 7), error);
}

TEST_CASE("Bloch sieve: slow drive selects the ground state") {
  int grid = 60;
  SieveReport rep = sieve_scan_bloch(0.01, 0.0, grid);
  const SieveCandidate& top = rep.candidates[rep.ranking[0]];
  CHECK(top.bloch.z <= -std::cos(2.0 * M_PI / grid));
}

TEST_CASE("Bloch sieve ranking does not depend on the efficiency") {
  SieveReport base = sieve_scan_bloch(100.0, 0.0, 24);
  for (double eta : {0.3, 0.9}) {
    SieveReport rep = sieve_scan_bloch(100.0, eta, 24);
    REQUIRE(rep.ranking.size() == base.ranking.size());
    for (size_t i = 0; i < rep.ranking.size(); ++i)
      REQUIRE(rep.ranking[i] == base.ranking[i]);
    for (size_t i = 0; i < rep.candidates.size(); ++i)
      CHECK(rep.candidates[i].purity_rate ==
            doctest::Approx((1.0 - eta) * base.candidates[i].purity_rate));
  }
}

TEST_CASE("coherent-state sieve") {
  QbmParams p;
  p.z = complexd(1.0, 0.0);
  p.fock_dim = std::max(16, coherent_required_dim(p.z));
  FockBasis basis{p.fock_dim};

  std::vector<std::pair<std::string, DensityMatrix>> cands;
  cands.emplace_back("coherent(1)", coherent_state(p.z, basis));
  cands.emplace_back("number(1)", pure_state(number_vec(1, basis)));
  cands.emplace_back("vacuum", pure_state(number_vec(0, basis)));
  SieveReport rep = sieve_scan_coherent(p, cands);

  CHECK(std::abs(rep.candidates[0].fidelity_rate) < 1e-6);
  CHECK(rep.candidates[1].fidelity_rate ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(rep.candidates[2].fidelity_rate) < 1e-14);
  // both zero-rate candidates outrank the number state; vacuum wins the tie
  // on the descriptor
  CHECK(rep.ranking[2] == 1);
  CHECK(rep.candidates[rep.ranking[0]].fidelity_rate >
        rep.candidates[rep.ranking[2]].fidelity_rate);
}

TEST_CASE("coherent-state sieve: cat states are fragile") {
  QbmParams p;
  p.z = complexd(3.0, 0.0);
  p.fock_dim = 35;
  FockBasis basis{p.fock_dim};
  std::vector<std::pair<std::string, DensityMatrix>> cands;
  cands.emplace_back("cat(3)", cat_state(p.z, basis));
  cands.emplace_back("coherent(3)", coherent_state(p.z, basis));
  SieveReport rep = sieve_scan_coherent(p, cands);
  CHECK(rep.candidates[0].fidelity_rate == doctest::Approx(-9.0).epsilon(1e-4));
  CHECK(rep.ranking[0] == 1);
}

TEST_CASE("coherent-state sieve rejects bad candidates") {
  QbmParams p;
  p.z = complexd(1.0, 0.0);
  p.fock_dim = 16;
  std::vector<std::pair<std::string, DensityMatrix>> wrong_dim;
  wrong_dim.emplace_back("small", pure_state(number_vec(0, FockBasis{8})));
  CHECK_THROWS_AS(sieve_scan_coherent(p, wrong_dim), error);

  std::vector<std::pair<std::string, DensityMatrix>> top_heavy;
  top_heavy.emplace_back("edge", pure_state(number_vec(15, FockBasis{16})));
  try {
    sieve_scan_coherent(p, top_heavy);
    FAIL("top-heavy candidate accepted");
  } catch (const error& e) {
    CHECK(e.code == status::truncation);
  }
}

TEST_CASE("Monte Carlo purity rate: eta=0 is deterministic") {
  Model m = atom_model(0.0);
  MeasurementScheme s;
  s.kind = SchemeKind::jump;
  s.eta = 0.0;
  McRate r = purity_loss_rate_mc(excited(), m, s, 1e-4, 16, 42);
  CHECK(r.se == 0.0);
  CHECK(r.rate == doctest::Approx(-2.0).epsilon(1e-3));
}

TEST_CASE("Monte Carlo purity rate matches the closed form") {
  Model m = atom_model(0.0);
  MeasurementScheme s;
  s.kind = SchemeKind::jump;
  s.eta = 0.5;
  McRate r = purity_loss_rate_mc(excited(), m, s, 1e-4, 4000, 7);
  CHECK(std::abs(r.rate - (-1.0)) < 3.0 * r.se + 5e-4);

  s.kind = SchemeKind::diffusive;
  McRate d = purity_loss_rate_mc(excited(), m, s, 1e-4, 4000, 7);
  CHECK(std::abs(d.rate - (-1.0)) < 3.0 * d.se + 5e-4);

  s.eta = 1.0;
  McRate pure_limit = purity_loss_rate_mc(excited(), m, s, 1e-4, 200, 7);
  CHECK(std::abs(pure_limit.rate) < 1e-4);

  // a superposition state through a driven model
  Model driven = atom_model(0.7);
  DensityMatrix plus = bloch_to_density(bvec(1, 0, 0));
  s.kind = SchemeKind::jump;
  s.eta = 0.25;
  McRate j = purity_loss_rate_mc(plus, driven, s, 1e-4, 4000, 11);
  double closed = purity_loss_rate_closed(plus, driven, 0.25);
  CHECK(std::abs(j.rate - closed) < 3.0 * j.se + 5e-4);
}

TEST_CASE("Monte Carlo purity rate is linear in eta through (1, 0)") {
  Model m = atom_model(0.0);
  std::vector<double> etas = {0.0, 0.25, 0.5, 0.75};
  std::vector<double> rates, ones;
  for (double eta : etas) {
    MeasurementScheme s;
    s.kind = SchemeKind::jump;
    s.eta = eta;
    McRate r = purity_loss_rate_mc(excited(), m, s, 1e-4, 4000, 13);
    CHECK(std::abs(r.rate - (-2.0 * (1.0 - eta))) < 3.0 * r.se + 5e-4);
    rates.push_back(r.rate);
    ones.push_back(1.0);
  }
  double slope = fit_slope_through(1.0, 0.0, etas, rates, ones);
  CHECK(slope == doctest::Approx(2.0).epsilon(5e-3));
}

TEST_CASE("Monte Carlo purity rate rejects mixed states") {
  Model m = atom_model(0.0);
  MeasurementScheme s;
  s.kind = SchemeKind::jump;
  s.eta = 0.5;
  DensityMatrix mixed(0.5 * cmat::Identity(2, 2));
  CHECK_THROWS_AS(purity_loss_rate_mc(mixed, m, s, 1e-4, 10, 1), error);
  CHECK_THROWS_AS(purity_loss_rate_mc(excited(), m, s, 0.0, 10, 1), error);
  CHECK_THROWS_AS(purity_loss_rate_mc(excited(), m, s, 1e-4, 0, 1), error);
}
