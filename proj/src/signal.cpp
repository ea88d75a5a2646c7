#include "kinemetric/signal.hpp"

#include <cmath>
#include <cstdlib>

#include <Eigen/Dense>

#include "kinemetric/error.hpp"

namespace kinemetric {

Violation validate(const SgParams& p) {
  if (p.window < 3 || p.window % 2 == 0) return "window must be an odd integer >= 3";
  if (p.order < 0 || p.order >= p.window) return "order must satisfy 0 <= order < window";
  return std::nullopt;
}

std::vector<double> savgol_coefficients(const SgParams& p) {
  if (auto v = validate(p)) throw InputError("Savitzky-Golay: " + *v);
  const int half = p.window / 2;
  Eigen::MatrixXd vander(p.window, p.order + 1);
  for (int i = 0; i < p.window; ++i) {
    double x = 1.0;
    for (int j = 0; j <= p.order; ++j) {
      vander(i, j) = x;
      x *= static_cast<double>(i - half);
    }
  }
  // Value of the fitted polynomial at offset 0 is its constant term, i.e.
  // row 0 of the pseudo-inverse: c = V (V^T V)^-1 e0.
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(p.order + 1);
  e0(0) = 1.0;
  const Eigen::VectorXd sol = (vander.transpose() * vander).ldlt().solve(e0);
  const Eigen::VectorXd c = vander * sol;
  return {c.data(), c.data() + c.size()};
}

std::vector<double> savitzky_golay(std::span<const double> values, const SgParams& p) {
  const auto coeffs = savgol_coefficients(p);
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  if (n < p.window)
    throw DegenerateError("Savitzky-Golay: series of " + std::to_string(n) + " samples is shorter than window " +
                          std::to_string(p.window));
  const std::ptrdiff_t half = p.window / 2;
  const auto at = [&](std::ptrdiff_t k) {
    if (k < 0) k = -k;
    if (k >= n) k = 2 * (n - 1) - k;
    return values[static_cast<std::size_t>(k)];
  };
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = -half; j <= half; ++j) acc += coeffs[static_cast<std::size_t>(j + half)] * at(i + j);
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

ScalarSeries savitzky_golay(const ScalarSeries& series, const SgParams& p) {
  ScalarSeries out{series.start_time, series.rate, {}};
  out.samples = savitzky_golay(std::span<const double>(series.samples), p);
  return out;
}

TimeSeries<Point3> savitzky_golay(const TimeSeries<Point3>& series, const SgParams& p) {
  const std::size_t n = series.size();
  std::vector<double> xs(n), ys(n), zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = series.samples[i].x;
    ys[i] = series.samples[i].y;
    zs[i] = series.samples[i].z;
  }
  const auto sx = savitzky_golay(std::span<const double>(xs), p);
  const auto sy = savitzky_golay(std::span<const double>(ys), p);
  const auto sz = savitzky_golay(std::span<const double>(zs), p);
  TimeSeries<Point3> out{series.start_time, series.rate, std::vector<Point3>(n)};
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = {sx[i], sy[i], sz[i]};
  return out;
}

ScalarSeries resample(const ScalarSeries& series, double target_rate) {
  if (series.size() < 2) throw DegenerateError("resample: need at least 2 samples");
  if (!(target_rate > 0.0) || !std::isfinite(target_rate)) throw InputError("resample: target rate must be positive");
  const std::size_t n = series.size();
  const double ratio = series.rate / target_rate;  // source samples per output sample
  const double last = static_cast<double>(n - 1);
  const auto count = static_cast<std::size_t>(std::floor(last / ratio + 1e-9)) + 1;

  ScalarSeries out{series.start_time, target_rate, std::vector<double>(count)};
  for (std::size_t i = 0; i < count; ++i) {
    double pos = static_cast<double>(i) * series.rate / target_rate;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-9) pos = nearest;
    if (pos > last) pos = last;
    auto idx = static_cast<std::size_t>(std::floor(pos));
    if (idx >= n - 1) idx = n - 2;
    const double frac = pos - static_cast<double>(idx);
    const double a = series.samples[idx], b = series.samples[idx + 1];
    out.samples[i] = frac == 0.0 ? a : (frac == 1.0 ? b : a + (b - a) * frac);
  }
  return out;
}

AlignmentResult align(const ScalarSeries& reference, const ScalarSeries& target, int max_lag) {
  if (reference.rate != target.rate) throw InputError("align: series must share a sampling rate");
  const auto nr = static_cast<int>(reference.size());
  const auto nt = static_cast<int>(target.size());
  if (nr < 2 || nt < 2) throw DegenerateError("align: need at least 2 samples per series");
  if (max_lag < 0 || max_lag >= std::min(nr, nt))
    throw InputError("align: max_lag must be in [0, " + std::to_string(std::min(nr, nt)) + ")");

  const auto centered = [](const std::vector<double>& v, double& energy) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    std::vector<double> c(v.size());
    energy = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      c[i] = v[i] - mean;
      energy += c[i] * c[i];
    }
    return c;
  };
  double er = 0.0, et = 0.0;
  const auto r = centered(reference.samples, er);
  const auto t = centered(target.samples, et);
  if (!(er > 0.0) || !(et > 0.0)) throw DegenerateError("align: zero variance");
  const double norm = std::sqrt(er * et);

  const auto corr = [&](int lag) {
    // sum_j r[j] * t[j + lag] over indices valid in both
    const int lo = std::max(0, -lag);
    const int hi = std::min(nr, nt - lag);
    double acc = 0.0;
    for (int j = lo; j < hi; ++j) acc += r[static_cast<std::size_t>(j)] * t[static_cast<std::size_t>(j + lag)];
    return acc / norm;
  };

  AlignmentResult best{0, corr(0)};
  for (int mag = 1; mag <= max_lag; ++mag) {
    for (int lag : {mag, -mag}) {
      const double c = corr(lag);
      if (c > best.peak_correlation + 1e-12) best = {lag, c};
    }
  }
  return best;
}

ScalarSeries apply_lag(const ScalarSeries& series, int lag) {
  if (static_cast<std::size_t>(std::abs(lag)) >= series.size())
    throw InputError("apply_lag: |lag| must be smaller than the series length");
  ScalarSeries out = series;
  out.start_time = series.start_time + static_cast<double>(lag) / series.rate;
  return out;
}

}  // namespace kinemetric
