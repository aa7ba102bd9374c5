#include "missreg/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace missreg {

MeanSe mean_se(std::span<const double> v) {
  MeanSe out;
  out.n = static_cast<int>(v.size());
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return out;
}

PairedTests paired_tests(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_tests: length mismatch");
  if (a.size() < 5) throw std::invalid_argument("paired_tests: need at least 5 pairs");
  const std::size_t n = a.size();
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];

  PairedTests out;
  out.n = static_cast<int>(n);
  const MeanSe ms = mean_se(diff);
  out.mean_diff = ms.mean;
  if (ms.se > 0.0) {
    out.t_stat = ms.mean / ms.se;
    boost::math::students_t dist(static_cast<double>(n - 1));
    out.t_p = boost::math::cdf(boost::math::complement(dist, out.t_stat));
  } else if (ms.mean > 0.0) {
    out.t_stat = std::numeric_limits<double>::infinity();
    out.t_p = 0.0;
  } else if (ms.mean < 0.0) {
    out.t_stat = -std::numeric_limits<double>::infinity();
    out.t_p = 1.0;
  } else {
    out.t_stat = 0.0;
    out.t_p = 0.5;
  }

  std::vector<double> nz;
  for (double d : diff)
    if (d != 0.0) nz.push_back(d);
  out.n_nonzero = static_cast<int>(nz.size());
  if (nz.empty()) {
    out.wilcoxon_defined = false;
    out.wilcoxon_stat = 0.0;
    out.wilcoxon_p = 0.5;
    return out;
  }
  std::vector<std::size_t> order(nz.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(nz[i]) < std::abs(nz[j]); });
  std::vector<double> rank(nz.size());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(nz[order[j + 1]]) == std::abs(nz[order[i]])) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  double w_plus = 0.0;
  for (std::size_t i = 0; i < nz.size(); ++i)
    if (nz[i] > 0) w_plus += rank[i];
  const double m = static_cast<double>(nz.size());
  const double mean = m * (m + 1) / 4.0;
  const double var = m * (m + 1) * (2 * m + 1) / 24.0 - tie_term / 48.0;
  out.wilcoxon_stat = w_plus;
  if (var <= 0.0) {
    out.wilcoxon_p = w_plus > mean ? 0.0 : (w_plus < mean ? 1.0 : 0.5);
    return out;
  }
  const double diff_c = w_plus - mean;
  const double cc = diff_c > 0 ? 0.5 : (diff_c < 0 ? -0.5 : 0.0);
  const double z = (diff_c - cc) / std::sqrt(var);
  out.wilcoxon_p = boost::math::cdf(boost::math::complement(boost::math::normal(), z));
  return out;
}

}  // namespace missreg
