#pragma once

#include <vector>

namespace ps {

// Welford accumulator.
struct RunningStat {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const;  // sample variance, n-1 denominator
  double stderr_mean() const;
};

struct Histogram {
  std::vector<double> edges;   // size bins+1, ascending
  std::vector<long> counts;    // size bins
  long total = 0;              // includes out-of-range samples
  long underflow = 0;
  long overflow = 0;

  // fraction of all samples in bin i
  double mass(size_t i) const;
};

Histogram histogram(const std::vector<double>& samples,
                    const std::vector<double>& edges);

// Sum of |p_i - q_i| over bins; both arguments are per-bin masses.
double l1_distance(const std::vector<double>& p, const std::vector<double>& q);

// Kolmogorov-Smirnov statistic between two empirical samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit ols_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// Weighted least squares for a line constrained to pass through (x0, y0);
// returns the slope. Used for calibration fits where one point is exact.
double fit_slope_through(double x0, double y0, const std::vector<double>& xs,
                         const std::vector<double>& ys,
                         const std::vector<double>& ws);

double normal_cdf(double x);

}  // namespace ps
