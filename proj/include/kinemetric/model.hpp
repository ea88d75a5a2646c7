#pragma once

// Core value types shared by every stage of the pipeline. All values are
// plain immutable-after-construction data; the validate() overloads report
// the first violated invariant instead of throwing.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kinemetric {

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// Position in meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Point3 operator*(double s, const Point3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend Point3 operator*(const Point3& a, double s) { return s * a; }
  friend bool operator==(const Point3&, const Point3&) = default;

  double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
  Point3 cross(const Point3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

Point3 midpoint(const Point3& a, const Point3& b);

/// Scalar-first unit quaternion, Hamilton product convention.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }
  /// Rotation of `angle_rad` about `axis` (need not be unit length, must be nonzero).
  static Quaternion from_axis_angle(const Point3& axis, double angle_rad);

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  /// Throws InputError on zero norm.
  Quaternion normalized() const;

  friend Quaternion operator*(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;

  /// Row-major rotation matrix of a unit quaternion.
  std::array<std::array<double, 3>, 3> to_matrix() const;
};

inline constexpr double kUnitNormTolerance = 1e-6;

// ---------------------------------------------------------------------------
// Time series
// ---------------------------------------------------------------------------

/// Uniformly sampled series; sample i sits at start_time + i / rate.
template <class V>
struct TimeSeries {
  double start_time = 0.0;
  double rate = 1.0;
  std::vector<V> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double time_at(std::size_t i) const { return start_time + static_cast<double>(i) / rate; }
  double duration() const {
    return samples.empty() ? 0.0 : static_cast<double>(samples.size() - 1) / rate;
  }
  double end_time() const { return start_time + duration(); }
};

using ScalarSeries = TimeSeries<double>;

// ---------------------------------------------------------------------------
// Controlled vocabularies
// ---------------------------------------------------------------------------

enum class Side { Left, Right };
enum class Joint { Knee, Hip, Ankle };
enum class Modality { Mocap, Imu, Pose33, Mesh49 };
enum class Segment { LeftThigh, RightThigh, LeftShank, RightShank, LeftFoot, RightFoot };
enum class SkeletonSource { Pose33, Mesh49 };
enum class CameraView { Frontal, Sagittal, Unknown };
enum class Action { Static, Squat, Lunge, SingleLegBalance, SquatToBox, SitToStand };
enum class Clothing { Mocap, Normal };
enum class AngleConvention { FlexionZeroExtension };

std::string_view to_string(Side v);
std::string_view to_string(Joint v);
std::string_view to_string(Modality v);
std::string_view to_string(Segment v);
std::string_view to_string(SkeletonSource v);
std::string_view to_string(CameraView v);
std::string_view to_string(Action v);
std::string_view to_string(Clothing v);

// Parsers return nullopt for labels outside the vocabulary.
std::optional<Side> parse_side(std::string_view s);
std::optional<Joint> parse_joint(std::string_view s);
std::optional<Modality> parse_modality(std::string_view s);
std::optional<Segment> parse_segment(std::string_view s);
std::optional<SkeletonSource> parse_skeleton_source(std::string_view s);
std::optional<CameraView> parse_camera_view(std::string_view s);
std::optional<Action> parse_action(std::string_view s);
std::optional<Clothing> parse_clothing(std::string_view s);

Modality modality_of(SkeletonSource s);

/// Thigh and shank IMU segments for the knee on `side`.
Segment thigh_segment(Side side);
Segment shank_segment(Side side);

/// The 22 anatomical marker labels understood by default joint-center recipes.
const std::vector<std::string>& standard_marker_names();

/// Canonical skeleton landmark name, e.g. "left_knee".
std::string landmark_name(Side side, Joint joint);

// ---------------------------------------------------------------------------
// Modality containers
// ---------------------------------------------------------------------------

struct MarkerTrajectorySet {
  std::string trial_id;
  double rate = 150.0;
  /// Marker order as it appeared in the source (serialization keeps it).
  std::vector<std::string> order;
  std::map<std::string, TimeSeries<Point3>> markers;

  std::size_t frame_count() const;
};

struct QuaternionStream {
  std::string trial_id;
  Segment segment = Segment::LeftThigh;
  double rate = 300.0;
  TimeSeries<Quaternion> samples;
};

using SkeletonFrame = std::map<std::string, Point3>;

struct SkeletonSequence {
  std::string trial_id;
  SkeletonSource source = SkeletonSource::Pose33;
  double rate = 30.0;
  double start_time = 0.0;
  CameraView camera_view = CameraView::Unknown;
  std::vector<SkeletonFrame> frames;
};

struct AngleSeries {
  Joint joint = Joint::Knee;
  Side side = Side::Left;
  Modality modality = Modality::Mocap;
  AngleConvention convention = AngleConvention::FlexionZeroExtension;
  ScalarSeries series;  // degrees
};

struct BiomarkerSet {
  double min_angle = 0.0;
  double max_angle = 0.0;
  double rom = 0.0;
  Joint joint = Joint::Knee;
  Side side = Side::Left;
  Modality modality = Modality::Mocap;
  Action action = Action::Static;

  /// The only sanctioned way to fill min/max/rom; keeps rom == max - min bit-exact.
  static BiomarkerSet from_extremes(double min_angle, double max_angle);
};

struct TrialMeta {
  std::string participant_id;
  Action action = Action::Static;
  Clothing clothing = Clothing::Mocap;
  int repetition_index = 1;
};

// ---------------------------------------------------------------------------
// Invariant checks: nullopt means ok, otherwise the first violation.
// ---------------------------------------------------------------------------

using Violation = std::optional<std::string>;

Violation validate(const Point3& p);
Violation validate(const Quaternion& q);
Violation validate(const MarkerTrajectorySet& m);
Violation validate(const QuaternionStream& s);
Violation validate(const SkeletonSequence& s);
Violation validate(const AngleSeries& a);
Violation validate(const BiomarkerSet& b);
Violation validate(const TrialMeta& t);

template <class V>
Violation validate(const TimeSeries<V>& s) {
  if (!(s.rate > 0.0) || !std::isfinite(s.rate)) return "rate must be positive";
  if (!std::isfinite(s.start_time)) return "start_time not finite";
  return std::nullopt;
}

}  // namespace kinemetric
