#include "kinemetric/kinematics.hpp"

#include <algorithm>
#include <numbers>

#include "kinemetric/error.hpp"

namespace kinemetric {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct AxisOrder {
  int i, j, k;
  double parity;  // +1 for cyclic orders
};

AxisOrder axes_of(EulerSequence s) {
  switch (s) {
    case EulerSequence::XYZ: return {0, 1, 2, 1.0};
    case EulerSequence::YZX: return {1, 2, 0, 1.0};
    case EulerSequence::ZXY: return {2, 0, 1, 1.0};
    case EulerSequence::XZY: return {0, 2, 1, -1.0};
    case EulerSequence::YXZ: return {1, 0, 2, -1.0};
    case EulerSequence::ZYX: return {2, 1, 0, -1.0};
  }
  return {0, 1, 2, 1.0};
}

constexpr std::array<std::pair<EulerSequence, std::string_view>, 6> kSequences{{{EulerSequence::XYZ, "XYZ"},
                                                                                {EulerSequence::XZY, "XZY"},
                                                                                {EulerSequence::YXZ, "YXZ"},
                                                                                {EulerSequence::YZX, "YZX"},
                                                                                {EulerSequence::ZXY, "ZXY"},
                                                                                {EulerSequence::ZYX, "ZYX"}}};

void require_segment(const Point3& v, const char* name) {
  if (!(v.norm() > kMinSegmentLength))
    throw DegenerateError(std::string("degenerate segment: ") + name + " vector has zero length");
}

}  // namespace

double angle_cross(const Point3& hip, const Point3& knee, const Point3& ankle) {
  const Point3 thigh = hip - knee;
  const Point3 shank = knee - ankle;
  require_segment(thigh, "thigh");
  require_segment(shank, "shank");
  return std::atan2(thigh.cross(shank).norm(), thigh.dot(shank)) * kRadToDeg;
}

double angle_cosine(const Point3& hip, const Point3& knee, const Point3& ankle) {
  const Point3 m = knee - hip;
  const Point3 n = knee - ankle;
  const Point3 p = ankle - hip;
  require_segment(m, "hip-knee");
  require_segment(n, "ankle-knee");
  const double mm = m.dot(m), nn = n.dot(n), pp = p.dot(p);
  const double c = (mm + nn - pp) / (2.0 * std::sqrt(mm) * std::sqrt(nn));
  return std::acos(std::clamp(c, -1.0, 1.0)) * kRadToDeg;
}

double to_canonical(double raw_deg, AngleMethod method) {
  return method == AngleMethod::Cross ? raw_deg : 180.0 - raw_deg;
}

Quaternion relative_quaternion(const Quaternion& thigh, const Quaternion& shank) {
  return thigh.conjugate() * shank;
}

std::optional<EulerSequence> parse_euler_sequence(std::string_view s) {
  for (const auto& [seq, name] : kSequences)
    if (name == s) return seq;
  return std::nullopt;
}

std::string_view to_string(EulerSequence s) {
  for (const auto& [seq, name] : kSequences)
    if (seq == s) return name;
  return "?";
}

Violation validate(const EulerConfig& cfg) {
  if (cfg.flexion_index < 1 || cfg.flexion_index > 3) return "flexion_index must be 1, 2 or 3";
  if (cfg.sign != 1 && cfg.sign != -1) return "sign must be +1 or -1";
  return std::nullopt;
}

std::array<double, 3> euler_angles(const Quaternion& q, EulerSequence seq) {
  const auto r = q.to_matrix();
  const auto [i, j, k, s] = axes_of(seq);
  const double b = std::asin(std::clamp(s * r[i][k], -1.0, 1.0));
  const double a = std::atan2(-s * r[j][k], r[k][k]);
  const double c = std::atan2(-s * r[i][j], r[i][i]);
  return {a, b, c};
}

FlexionSample quat_to_flexion(const Quaternion& q, const EulerConfig& cfg) {
  if (auto v = validate(cfg)) throw InputError("Euler config: " + *v);
  const auto e = euler_angles(q, cfg.sequence);
  FlexionSample out;
  out.degrees = cfg.sign * e[static_cast<std::size_t>(cfg.flexion_index - 1)] * kRadToDeg;
  out.gimbal_warning = std::abs(90.0 - std::abs(e[1] * kRadToDeg)) < 0.5;
  return out;
}

AngleSeries series_angles(const JointCenterSeries& joints, AngleMethod method, Modality modality, Side side) {
  const std::size_t n = joints.knee.size();
  if (n == 0) throw InputError("empty joint series");
  if (joints.hip.size() != n || joints.ankle.size() != n) throw InputError("joint series lengths differ");
  AngleSeries out;
  out.joint = Joint::Knee;
  out.side = side;
  out.modality = modality;
  out.series.start_time = joints.knee.start_time;
  out.series.rate = joints.knee.rate;
  out.series.samples.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const auto& h = joints.hip.samples[f];
    const auto& k = joints.knee.samples[f];
    const auto& a = joints.ankle.samples[f];
    try {
      const double raw = method == AngleMethod::Cross ? angle_cross(h, k, a) : angle_cosine(h, k, a);
      out.series.samples[f] = to_canonical(raw, method);
    } catch (const Error& e) {
      throw DegenerateError(std::string(to_string(modality)) + " " + std::string(to_string(side)) + " knee frame " +
                            std::to_string(f) + ": " + e.what());
    }
  }
  return out;
}

ImuAngleResult series_angles(const QuaternionStream& thigh, const QuaternionStream& shank, const EulerConfig& cfg,
                             Side side, double offset_deg) {
  const std::size_t n = thigh.samples.size();
  if (n == 0) throw InputError("empty IMU stream");
  if (shank.samples.size() != n || shank.rate != thigh.rate)
    throw InputError("thigh and shank IMU streams differ in rate or length");
  ImuAngleResult out;
  auto& a = out.angles;
  a.joint = Joint::Knee;
  a.side = side;
  a.modality = Modality::Imu;
  a.series.start_time = thigh.samples.start_time;
  a.series.rate = thigh.rate;
  a.series.samples.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    const auto rel = relative_quaternion(thigh.samples.samples[f], shank.samples.samples[f]);
    const auto s = quat_to_flexion(rel, cfg);
    if (s.gimbal_warning) out.gimbal_frames.push_back(f);
    double v = s.degrees - offset_deg;
    // round-off around the identity rotation
    if (v < 0.0 && v > -1e-9) v = 0.0;
    if (!(v >= 0.0 && v <= 180.0))
      throw InputError("imu " + std::string(to_string(side)) + " knee frame " + std::to_string(f) + ": flexion " +
                       std::to_string(v) + " deg outside [0, 180]; check the Euler configuration or offset");
    a.series.samples[f] = v;
  }
  return out;
}

}  // namespace kinemetric
