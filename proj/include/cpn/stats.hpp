#pragma once

#include <cstddef>
#include <span>

namespace cpn {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased sample variance
  double se = 0.0;   // sqrt(var / n)
  std::size_t n = 0;
};

MeanVar mean_var(std::span<const double> xs);

// Ordinary least squares y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t n = 0;

  // One-sided confidence bounds for the slope at the given level, Student-t
  // with n - 2 degrees of freedom.
  double slope_upper(double level) const;
  double slope_lower(double level) const;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double ibeta(double a, double b, double x);

// Quantile of Student's t with `df` degrees of freedom, p in (0, 1).
double student_t_quantile(double p, double df);

// Two-sample Kolmogorov-Smirnov p-value (asymptotic Kolmogorov law with the
// usual finite-sample lambda correction). Writes the raw statistic through
// `stat` when given.
double ks_two_sample_p(std::span<const double> a, std::span<const double> b,
                       double* stat = nullptr);

// Wilcoxon signed-rank two-sided p-value on paired differences, normal
// approximation with tie and continuity corrections. Zero differences are
// dropped; a degenerate sample (all zeros) returns 1.
double wilcoxon_signed_rank_p(std::span<const double> diffs);

double pearson_correlation(std::span<const double> x,
                           std::span<const double> y);

// Correlation between the sorted sample and unit-exponential plotting
// quantiles -log(1 - (i - 1/2)/n). Near 1 for exponential data.
double exp_qq_correlation(std::span<const double> xs);

}  // namespace cpn
