#pragma once

#include <span>
#include <vector>

#include "kinemetric/model.hpp"

namespace kinemetric {

struct SgParams {
  int window = 15;
  int order = 3;
};

Violation validate(const SgParams& p);

/// Center-point least-squares smoothing weights for a symmetric window.
std::vector<double> savgol_coefficients(const SgParams& p);

/// Savitzky-Golay smoothing with mirror padding of (window - 1) / 2 samples
/// at each edge; output length equals input length.
ScalarSeries savitzky_golay(const ScalarSeries& series, const SgParams& p);
std::vector<double> savitzky_golay(std::span<const double> values, const SgParams& p);

/// Smooths each coordinate of a point track independently.
TimeSeries<Point3> savitzky_golay(const TimeSeries<Point3>& series, const SgParams& p);

/// Linear interpolation at start_time + i / target_rate for every i whose
/// time does not pass the last source sample.
ScalarSeries resample(const ScalarSeries& series, double target_rate);

struct AlignmentResult {
  /// Target is shifted by -lag to match the reference.
  int lag = 0;
  double peak_correlation = 0.0;
};

/// Lag in [-max_lag, max_lag] maximizing the normalized cross-correlation of
/// the mean-centered series over their overlap; ties go to the smaller |lag|.
AlignmentResult align(const ScalarSeries& reference, const ScalarSeries& target, int max_lag);

/// Moves start_time by lag / rate; samples are untouched.
ScalarSeries apply_lag(const ScalarSeries& series, int lag);

}  // namespace kinemetric
