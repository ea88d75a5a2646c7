#pragma once

#include <span>
#include <utility>
#include <vector>

namespace kinemetric {

/// z multiplier for the limits of agreement.
inline constexpr double kLoaZ = 1.96;

struct BlandAltman {
  double bias = 0.0;     // mean of (a - b)
  double sd_diff = 0.0;  // sample standard deviation of (a - b)
  double loa_low = 0.0;
  double loa_high = 0.0;
  std::size_t n = 0;
  std::vector<std::pair<double, double>> points;  // (mean, difference)
};

struct TTestResult {
  double t = 0.0;
  int df = 0;
  double p = 1.0;  // two-tailed
};

/// Differences are a - b; needs n >= 2.
BlandAltman bland_altman(std::span<const double> a, std::span<const double> b);

/// (1/n) sum |y - y_hat|
double mae(std::span<const double> y, std::span<const double> y_hat);
/// (1/n) sum (y - y_hat); signed.
double mse_signed(std::span<const double> y, std::span<const double> y_hat);

double mean(std::span<const double> v);
/// Sample (n - 1) standard deviation.
double sample_sd(std::span<const double> v);

double pearson(std::span<const double> x, std::span<const double> y);

/// Paired t-test on d = x - y with a two-tailed p-value.
TTestResult paired_t_test(std::span<const double> x, std::span<const double> y);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Student t cumulative distribution.
double t_cdf(double t, int df);

}  // namespace kinemetric
