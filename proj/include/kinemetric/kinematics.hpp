#pragma once

#include <cstddef>
#include <vector>

#include "kinemetric/ingest.hpp"
#include "kinemetric/model.hpp"

namespace kinemetric {

/// Segment vectors shorter than this (meters) make a frame degenerate.
inline constexpr double kMinSegmentLength = 1e-6;

enum class AngleMethod { Cross, Cosine };

/// Knee angle from thigh T = hip - knee and shank S = knee - ankle:
/// atan2(|T x S|, T . S) in degrees, 0 at full extension.
double angle_cross(const Point3& hip, const Point3& knee, const Point3& ankle);

/// Interior angle at the knee from the law of cosines over the three joint
/// distances, in degrees. 180 at full extension.
double angle_cosine(const Point3& hip, const Point3& knee, const Point3& ankle);

/// Maps a method's native output to flexion (0 = extended).
double to_canonical(double raw_deg, AngleMethod method);

/// conj(thigh) * shank.
Quaternion relative_quaternion(const Quaternion& thigh, const Quaternion& shank);

enum class EulerSequence { XYZ, XZY, YXZ, YZX, ZXY, ZYX };

struct EulerConfig {
  EulerSequence sequence = EulerSequence::XYZ;
  int flexion_index = 1;  // 1-based position of the flexion angle in the sequence
  int sign = -1;
};

std::optional<EulerSequence> parse_euler_sequence(std::string_view s);
std::string_view to_string(EulerSequence s);
Violation validate(const EulerConfig& cfg);

/// Intrinsic Tait-Bryan angles (radians) such that R = R_a(e[0]) R_b(e[1]) R_c(e[2]).
std::array<double, 3> euler_angles(const Quaternion& q, EulerSequence seq);

struct FlexionSample {
  double degrees = 0.0;
  /// Middle Euler angle within 0.5 degrees of +/-90.
  bool gimbal_warning = false;
};

FlexionSample quat_to_flexion(const Quaternion& q, const EulerConfig& cfg = {});

// ---------------------------------------------------------------------------
// Whole-series computation
// ---------------------------------------------------------------------------

/// Joint-angle series for positional input (markers or skeleton joints).
/// Per-frame failures are rethrown with the frame index.
AngleSeries series_angles(const JointCenterSeries& joints, AngleMethod method, Modality modality, Side side);

struct ImuAngleResult {
  AngleSeries angles;
  std::vector<std::size_t> gimbal_frames;
};

/// Knee flexion from thigh/shank orientation streams. `offset_deg` is
/// subtracted from every sample (static-pose calibration).
ImuAngleResult series_angles(const QuaternionStream& thigh, const QuaternionStream& shank, const EulerConfig& cfg,
                             Side side, double offset_deg = 0.0);

}  // namespace kinemetric
