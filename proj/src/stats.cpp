#include "stats.hpp"

#include <algorithm>
#include <cmath>

#include "common.hpp"

namespace ps {

double RunningStat::variance() const {
  if (n < 2) return 0.0;
  return m2 / static_cast<double>(n - 1);
}

double RunningStat::stderr_mean() const {
  if (n < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(n));
}

double Histogram::mass(size_t i) const {
  if (total == 0) return 0.0;
  return static_cast<double>(counts[i]) / static_cast<double>(total);
}

Histogram histogram(const std::vector<double>& samples,
                    const std::vector<double>& edges) {
  require(edges.size() >= 2, status::invalid_argument,
          "histogram needs at least one bin");
  require(std::is_sorted(edges.begin(), edges.end()), status::invalid_argument,
          "histogram edges must be ascending");
  Histogram h;
  h.edges = edges;
  h.counts.assign(edges.size() - 1, 0);
  for (double x : samples) {
    ++h.total;
    if (x < edges.front()) {
      ++h.underflow;
      continue;
    }
    if (x >= edges.back()) {
      // right edge is inclusive so a sample exactly at the top lands inside
      if (x == edges.back()) {
        ++h.counts.back();
      } else {
        ++h.overflow;
      }
      continue;
    }
    size_t i = static_cast<size_t>(
        std::upper_bound(edges.begin(), edges.end(), x) - edges.begin() - 1);
    ++h.counts[i];
  }
  return h;
}

double l1_distance(const std::vector<double>& p, const std::vector<double>& q) {
  require(p.size() == q.size(), status::invalid_argument,
          "mass vectors differ in length");
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return acc;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), status::invalid_argument,
          "KS needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

LineFit ols_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() >= 2, status::invalid_argument,
          "line fit needs matching x/y with at least two points");
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  require(std::abs(denom) > 1e-30, status::numeric,
          "degenerate x values in line fit");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

double fit_slope_through(double x0, double y0, const std::vector<double>& xs,
                         const std::vector<double>& ys,
                         const std::vector<double>& ws) {
  require(xs.size() == ys.size() && xs.size() == ws.size() && !xs.empty(),
          status::invalid_argument, "constrained fit needs matching arrays");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    require(ws[i] >= 0.0, status::invalid_argument,
            "fit weights must be nonnegative");
    double dx = xs[i] - x0;
    num += ws[i] * dx * (ys[i] - y0);
    den += ws[i] * dx * dx;
  }
  require(den > 1e-30, status::numeric,
          "constrained fit has no leverage away from the anchor");
  return num / den;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace ps
