#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <doctest.h>

#include "common.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "stats.hpp"

using namespace ps;

TEST_CASE("running statistics match direct formulas") {
  std::vector<double> xs = {1.0, 4.0, -2.0, 7.5, 0.25, 3.0};
  RunningStat rs;
  double sum = 0;
  for (double x : xs) {
    rs.add(x);
    sum += x;
  }
  double mean = sum / xs.size();
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  CHECK(rs.mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(rs.variance() == doctest::Approx(ss / (xs.size() - 1)).epsilon(1e-14));
  CHECK(rs.stderr_mean() ==
        doctest::Approx(std::sqrt(ss / (xs.size() - 1) / xs.size()))
            .epsilon(1e-14));
}

TEST_CASE("histogram binning") {
  std::vector<double> edges = {0.0, 1.0, 2.0, 3.0};
  Histogram h = histogram({-0.5, 0.0, 0.5, 1.0, 2.9, 3.0, 3.5}, edges);
  CHECK(h.underflow == 1);
  CHECK(h.overflow == 1);
  CHECK(h.counts[0] == 2);  // 0.0 and 0.5
  CHECK(h.counts[1] == 1);  // 1.0
  CHECK(h.counts[2] == 2);  // 2.9 and the inclusive top edge 3.0
  CHECK(h.total == 7);
  CHECK(h.mass(0) == doctest::Approx(2.0 / 7.0));
  CHECK_THROWS_AS(histogram({1.0}, {0.0}), error);
  CHECK_THROWS_AS(histogram({1.0}, {1.0, 0.5}), error);
}

TEST_CASE("distribution distances") {
  CHECK(l1_distance({0.2, 0.8}, {0.3, 0.7}) == doctest::Approx(0.2));
  CHECK_THROWS_AS(l1_distance({0.5}, {0.5, 0.0}), error);

  std::vector<double> a = {1.0, 2.0};
  std::vector<double> b = {1.5};
  CHECK(ks_two_sample(a, b) == doctest::Approx(0.5));
  std::vector<double> u, v;
  for (int i = 0; i < 2000; ++i) {
    u.push_back(i / 2000.0);
    v.push_back(i / 2000.0 + 0.05);
  }
  CHECK(ks_two_sample(u, v) == doctest::Approx(0.05).epsilon(0.02));
  CHECK(ks_two_sample(u, u) == 0.0);
}

TEST_CASE("line fits") {
  std::vector<double> xs = {0.0, 1.0, 2.0, 5.0};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(3.0 * x - 2.0);
  LineFit f = ols_fit(xs, ys);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(-2.0).epsilon(1e-12));

  std::vector<double> ws = {4.0, 1.0, 2.0, 1.0};
  std::vector<double> y2;
  for (double x : xs) y2.push_back(5.0 * (x - 1.0));
  CHECK(fit_slope_through(1.0, 0.0, xs, y2, ws) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(
      fit_slope_through(1.0, 0.0, {1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}), error);
}

TEST_CASE("normal cdf anchors") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-5));
  CHECK(normal_cdf(-1.0) + normal_cdf(1.0) == doctest::Approx(1.0));
}

TEST_CASE("fluctuation decay without noise is exact") {
  rng gen(1);
  LinearResponseState s;
  s.dx = 1.0;
  double dt = 1e-3;
  for (int i = 0; i < 1000; ++i)
    s = linear_response_step(s, 2.0, 100.0, 0.4, 0.0, dt, gen);
  CHECK(s.dx == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(s.dy == 0.0);
  CHECK(s.dz == 0.0);
}

TEST_CASE("undriven y and z fluctuations decay at rates 1/2 and 1") {
  rng gen(1);
  double dt = 0.01;
  LinearResponseState sy;
  sy.dy = 1.0;
  sy = linear_response_step(sy, 0.0, 10.0, 0.0, 0.0, dt, gen);
  CHECK(sy.dy == doctest::Approx(std::exp(-0.5 * dt)).epsilon(1e-12));
  CHECK(sy.dz == 0.0);

  LinearResponseState sz;
  sz.dz = 1.0;
  sz = linear_response_step(sz, 0.0, 10.0, 0.0, 0.0, dt, gen);
  CHECK(sz.dz == doctest::Approx(std::exp(-dt)).epsilon(1e-12));
  CHECK(sz.dy == 0.0);
}

TEST_CASE("drift propagator composes exactly across step sizes") {
  // group property of the closed form: 10^4 steps of dt vs one step of t
  double omega = 100.0;
  rng gen(1);
  LinearResponsePropagator fine(omega, 100.0, 0.7, 0.0, 1e-4);
  LinearResponsePropagator coarse(omega, 100.0, 0.7, 0.0, 1.0);
  LinearResponseState s;
  s.dy = 0.3;
  s.dz = -0.8;
  LinearResponseState f = s;
  for (int i = 0; i < 10000; ++i) f = fine.step(f, gen);
  LinearResponseState c = coarse.step(s, gen);
  CHECK(f.dy == doctest::Approx(c.dy).epsilon(1e-9));
  CHECK(f.dz == doctest::Approx(c.dz).epsilon(1e-9));
}

TEST_CASE("click guard and efficiency warning") {
  CHECK_THROWS_AS(LinearResponsePropagator(100.0, 100.0, 0.0, 0.1, 1.01e-4),
                  error);
  try {
    LinearResponsePropagator(100.0, 100.0, 0.0, 0.1, 1.01e-4);
  } catch (const error& e) {
    CHECK(e.code == status::step_size);
    CHECK(std::string(e.what()).find("0.1/(eta*(R^2+0.5))") !=
          std::string::npos);
  }
  LinearResponsePropagator ok(100.0, 100.0, 0.0, 0.1, 0.5 / 5051.0);
  CHECK(ok.click_mean() < 0.1);
  CHECK(ok.warning().empty());
  LinearResponsePropagator hot(1.0, 2.0, 0.0, 0.5, 1e-3);
  CHECK_FALSE(hot.warning().empty());
}

TEST_CASE("ensemble purity of the linear model matches the closed curve") {
  double eta = 0.1, R = 100.0, phi = 0.0, omega = 100.0;
  double t = 1.0, dt = 0.5 / 5051.0;
  long nsteps = std::lround(t / dt);
  int ntraj = 2000;
  LinearResponsePropagator prop(omega, R, phi, eta, dt);
  RunningStat rs;
  for (int k = 0; k < ntraj; ++k) {
    rng gen = make_stream(555, k);
    LinearResponseState s;
    for (long i = 0; i < nsteps; ++i) s = prop.step(s, gen);
    rs.add(0.5 * (s.dx * s.dx + s.dy * s.dy + s.dz * s.dz));
  }
  double expect = purity_curve(t, eta, R, phi) - 0.5;
  CHECK(std::abs(rs.mean - expect) < 4.0 * rs.stderr_mean() + 5e-4);
}

TEST_CASE("purity curve anchors") {
  CHECK(purity_curve(0.0, 0.3, 7.0, 1.1) == 0.5);
  CHECK(purity_curve(1.0, 0.1, 100.0, 0.0) ==
        doctest::Approx(0.5316066).epsilon(1e-6));
  CHECK(purity_curve(100.0, 0.1, 100.0, 0.0) ==
        doctest::Approx(0.55).epsilon(1e-4));
  CHECK_THROWS_AS(purity_curve(-1.0, 0.1, 100.0, 0.0), error);
  CHECK_THROWS_AS(purity_curve(1.0, 1.5, 100.0, 0.0), error);
}

TEST_CASE("stationary purity and the 3:2 phase contrast") {
  CHECK(stationary_purity(0.0, 0.7) == 0.5);
  CHECK(stationary_purity(0.1, 0.0) == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(stationary_purity(0.1, M_PI / 2) ==
        doctest::Approx(0.5 + 0.1 / 3.0).epsilon(1e-12));
  double gain0 = stationary_purity(0.1, 0.0) - 0.5;
  double gain90 = stationary_purity(0.1, M_PI / 2) - 0.5;
  CHECK(gain0 / gain90 == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("stationary purity is the long-time strong-oscillator limit") {
  for (double eta : {0.05, 0.2}) {
    for (double phi : {0.0, 0.4, M_PI / 2}) {
      CHECK(std::abs(purity_curve(100.0, eta, 1e6, phi) -
                     stationary_purity(eta, phi)) <= 1e-9);
    }
  }
}

TEST_CASE("asymmetry density: anchors, symmetry, domain") {
  CHECK(a_density(0.5, 0.0) == doctest::Approx(0.4393912894).epsilon(1e-9));
  for (double tau : {0.05, 0.5, 5.0})
    for (double a : {0.1, 0.45, 0.9, 0.999})
      CHECK(a_density(tau, a) == doctest::Approx(a_density(tau, -a)));
  CHECK_THROWS_AS(a_density(0.0, 0.5), error);
  CHECK_THROWS_AS(a_density(-2.0, 0.5), error);
  CHECK_THROWS_AS(a_density(1.0, 1.0), error);
  CHECK_THROWS_AS(a_density(1.0, -1.3), error);
}

TEST_CASE("asymmetry density integrates to one") {
  for (double tau : {0.05, 0.5, 5.0}) {
    double bmax = tau + 8.0 * std::sqrt(tau) + 2.0;
    int n = 4000;
    double db = 2.0 * bmax / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double b = -bmax + (i + 0.5) * db;
      double a = std::tanh(b);
      double sech2 = 1.0 - a * a;
      // tanh saturates to +-1 in doubles near |b|~19; the mass out there
      // is far below the quadrature tolerance
      if (sech2 == 0.0) continue;
      acc += a_density(tau, a) * sech2 * db;
    }
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("B-coordinate distribution function") {
  for (double tau : {0.3, 2.0}) {
    CHECK(b_cdf(tau, 50.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b_cdf(tau, -50.0) == doctest::Approx(0.0).epsilon(1e-12));
    for (double b : {0.2, 1.0, 3.0})
      CHECK(b_cdf(tau, -b) == doctest::Approx(1.0 - b_cdf(tau, b)));
    // derivative equals the A-density pushed back to B
    for (double b : {0.0, 0.8, 2.5}) {
      double h = 1e-5;
      double numeric = (b_cdf(tau, b + h) - b_cdf(tau, b - h)) / (2.0 * h);
      double a = std::tanh(b);
      double q = a_density(tau, a) * (1.0 - a * a);
      CHECK(numeric == doctest::Approx(q).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(b_cdf(0.0, 1.0), error);
}

TEST_CASE("flip-rate law") {
  CHECK(jump_rate_law(2.0) / jump_rate_law(4.0) ==
        doctest::Approx(std::sqrt(2.0) * std::exp(1.0)).epsilon(1e-12));
  double prev = jump_rate_law(1.0);
  for (double tau = 1.25; tau <= 6.0; tau += 0.25) {
    double cur = jump_rate_law(tau);
    CHECK(cur < prev);
    prev = cur;
  }
  for (double tau : {0.7, 1.9, 4.2})
    CHECK(std::abs(std::log(jump_rate_law(tau)) + 0.5 * tau +
                   0.5 * std::log(tau)) < 1e-12);
  CHECK_THROWS_AS(jump_rate_law(0.0), error);
  CHECK_THROWS_AS(jump_rate_law(-1.0), error);
}
