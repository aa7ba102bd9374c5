#pragma once

#include <span>

namespace missreg {

/// Paired comparison of a against b, alternative: mean(a - b) > 0.
struct PairedTests {
  double mean_diff = 0.0;
  double t_stat = 0.0;
  double t_p = 0.5;
  /// Wilcoxon W+: rank sum of the positive differences, zeros dropped.
  double wilcoxon_stat = 0.0;
  double wilcoxon_p = 0.5;
  /// False when every difference is zero.
  bool wilcoxon_defined = true;
  int n = 0;
  int n_nonzero = 0;
};

/// One-sided paired t-test and Wilcoxon signed-rank test (normal
/// approximation with tie correction). Requires at least 5 pairs.
PairedTests paired_tests(std::span<const double> a, std::span<const double> b);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};
MeanSe mean_se(std::span<const double> v);

}  // namespace missreg
