#include "kinemetric/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kinemetric/error.hpp"

namespace kinemetric {

namespace {

void require_pairs(std::span<const double> a, std::span<const double> b, std::size_t min_n, const char* what) {
  if (a.size() != b.size())
    throw InputError(std::string(what) + ": inputs differ in length (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
  if (a.size() < min_n)
    throw DegenerateError(std::string(what) + ": need at least " + std::to_string(min_n) + " pairs, got " +
                          std::to_string(a.size()));
}

// Spread below this fraction of the data magnitude is treated as zero, so
// that x = y + c still reads as constant after floating-point subtraction.
bool negligible_spread(double sd, double scale) {
  return sd <= 1e-12 * std::max(1.0, std::abs(scale));
}

double t_two_tailed(double t, double nu);

// Continued fraction for I_x(a, b), modified Lentz evaluation.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double mean(std::span<const double> v) {
  if (v.empty()) throw DegenerateError("mean of empty sequence");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw DegenerateError("standard deviation needs at least 2 values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

BlandAltman bland_altman(std::span<const double> a, std::span<const double> b) {
  require_pairs(a, b, 2, "Bland-Altman");
  BlandAltman out;
  out.n = a.size();
  std::vector<double> diff(a.size());
  out.points.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
    out.points.emplace_back(0.5 * (a[i] + b[i]), diff[i]);
  }
  out.bias = mean(diff);
  out.sd_diff = sample_sd(diff);
  out.loa_low = out.bias - kLoaZ * out.sd_diff;
  out.loa_high = out.bias + kLoaZ * out.sd_diff;
  return out;
}

double mae(std::span<const double> y, std::span<const double> y_hat) {
  require_pairs(y, y_hat, 1, "MAE");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - y_hat[i]);
  return s / static_cast<double>(y.size());
}

double mse_signed(std::span<const double> y, std::span<const double> y_hat) {
  require_pairs(y, y_hat, 1, "mean signed error");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] - y_hat[i];
  return s / static_cast<double>(y.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_pairs(x, y, 2, "Pearson");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double n1 = static_cast<double>(x.size() - 1);
  if (negligible_spread(std::sqrt(sxx / n1), mx) || negligible_spread(std::sqrt(syy / n1), my))
    throw DegenerateError("Pearson: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

TTestResult paired_t_test(std::span<const double> x, std::span<const double> y) {
  require_pairs(x, y, 2, "paired t-test");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  const double md = mean(d);
  const double sd = sample_sd(d);
  double scale = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) scale = std::max({scale, std::abs(x[i]), std::abs(y[i])});
  if (negligible_spread(sd, scale)) throw DegenerateError("paired t-test: zero-variance differences");
  TTestResult out;
  out.df = static_cast<int>(d.size()) - 1;
  out.t = md / (sd / std::sqrt(static_cast<double>(d.size())));
  out.p = std::clamp(t_two_tailed(out.t, out.df), 0.0, 1.0);
  return out;
}

namespace {

// I_x(a, b) with y = 1 - x supplied separately so callers can avoid the
// cancellation in 1 - x when x is close to 1.
double incomplete_beta_xy(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) throw InputError("incomplete beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

// Two-sided tail mass P(|T| > |t|).
double t_two_tailed(double t, double nu) {
  const double tt = t * t;
  return incomplete_beta_xy(0.5 * nu, 0.5, nu / (nu + tt), tt / (nu + tt));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x >= 1.0) return 1.0;
  return incomplete_beta_xy(a, b, x, 1.0 - x);
}

double t_cdf(double t, int df) {
  if (df < 1) throw InputError("t_cdf: df must be >= 1");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (t == 0.0) return 0.5;
  const double tail = 0.5 * t_two_tailed(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace kinemetric
