#pragma once

// Reference computations used by the tests. They deliberately avoid the
// library's own code paths (no Eigen, no continued fractions, no quaternions).

#include <array>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "kinemetric/model.hpp"

namespace oracle {

using kinemetric::Point3;

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Rodrigues rotation matrix for a unit axis and angle.
inline Mat3 axis_angle_matrix(Point3 axis, double angle) {
  const double n = axis.norm();
  axis = (1.0 / n) * axis;
  const double c = std::cos(angle), s = std::sin(angle), C = 1.0 - c;
  const double x = axis.x, y = axis.y, z = axis.z;
  return {{{c + x * x * C, x * y * C - z * s, x * z * C + y * s},
           {y * x * C + z * s, c + y * y * C, y * z * C - x * s},
           {z * x * C - y * s, z * y * C + x * s, c + z * z * C}}};
}

inline Point3 rotate(const Mat3& m, const Point3& p) {
  return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z, m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
          m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z};
}

template <class Rng>
Mat3 random_rotation(Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  Point3 axis{g(rng), g(rng), g(rng)};
  while (axis.norm() < 1e-6) axis = {g(rng), g(rng), g(rng)};
  return axis_angle_matrix(axis, u(rng));
}

/// Student t density.
inline double t_pdf(double t, int df) {
  const double v = df;
  const double log_c = std::lgamma((v + 1.0) / 2.0) - std::lgamma(v / 2.0) - 0.5 * std::log(v * M_PI);
  return std::exp(log_c - (v + 1.0) / 2.0 * std::log1p(t * t / v));
}

/// Cumulative composite Simpson integration of the t density on [0, t_max].
/// cdf(t) is exact to the quadrature for |t| on the even-node grid (multiples of 2h).
class TDensityIntegral {
public:
  TDensityIntegral(int df, double t_max, double h) : h_(h) {
    const auto panels = static_cast<std::size_t>(std::ceil(t_max / (2.0 * h)));
    cumulative_.assign(panels + 1, 0.0L);
    long double acc = 0.0L;
    for (std::size_t k = 0; k < panels; ++k) {
      const double a = 2.0 * h * static_cast<double>(k);
      acc += static_cast<long double>(h) / 3.0L *
             (static_cast<long double>(t_pdf(a, df)) + 4.0L * t_pdf(a + h, df) + t_pdf(a + 2.0 * h, df));
      cumulative_[k + 1] = acc;
    }
  }

  double cdf(double t) const {
    const double k = std::abs(t) / (2.0 * h_);
    const auto idx = static_cast<std::size_t>(std::llround(k));
    if (std::abs(k - static_cast<double>(idx)) > 1e-9 || idx >= cumulative_.size())
      throw std::invalid_argument("t not on the integration grid");
    const double half = static_cast<double>(cumulative_[idx]);
    return t >= 0.0 ? 0.5 + half : 0.5 - half;
  }

private:
  double h_;
  std::vector<long double> cumulative_;
};

/// Least-squares polynomial fit of `values` (at offsets -half..half) evaluated
/// at offset 0, by normal equations and Gaussian elimination in long double.
inline double polyfit_center(const std::vector<double>& values, int order) {
  const int half = static_cast<int>(values.size() / 2);
  const int m = order + 1;
  std::vector<std::vector<long double>> a(m, std::vector<long double>(m + 1, 0.0L));
  for (int i = -half; i <= half; ++i) {
    std::vector<long double> pw(2 * m, 1.0L);
    for (int k = 1; k < 2 * m; ++k) pw[k] = pw[k - 1] * i;
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) a[r][c] += pw[r + c];
      a[r][m] += pw[r] * values[i + half];
    }
  }
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return static_cast<double>(a[0][m] / a[0][0]);
}

}  // namespace oracle
