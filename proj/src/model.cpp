#include "kinemetric/model.hpp"

#include "kinemetric/error.hpp"

namespace kinemetric {

namespace {

template <class E, std::size_t N>
using Table = std::array<std::pair<E, std::string_view>, N>;

constexpr Table<Side, 2> kSides{{{Side::Left, "left"}, {Side::Right, "right"}}};
constexpr Table<Joint, 3> kJoints{{{Joint::Knee, "knee"}, {Joint::Hip, "hip"}, {Joint::Ankle, "ankle"}}};
constexpr Table<Modality, 4> kModalities{{{Modality::Mocap, "mocap"},
                                          {Modality::Imu, "imu"},
                                          {Modality::Pose33, "pose33"},
                                          {Modality::Mesh49, "mesh49"}}};
constexpr Table<Segment, 6> kSegments{{{Segment::LeftThigh, "left_thigh"},
                                       {Segment::RightThigh, "right_thigh"},
                                       {Segment::LeftShank, "left_shank"},
                                       {Segment::RightShank, "right_shank"},
                                       {Segment::LeftFoot, "left_foot"},
                                       {Segment::RightFoot, "right_foot"}}};
constexpr Table<SkeletonSource, 2> kSources{{{SkeletonSource::Pose33, "pose33"},
                                             {SkeletonSource::Mesh49, "mesh49"}}};
constexpr Table<CameraView, 3> kViews{{{CameraView::Frontal, "frontal"},
                                       {CameraView::Sagittal, "sagittal"},
                                       {CameraView::Unknown, "unknown"}}};
constexpr Table<Action, 6> kActions{{{Action::Static, "static"},
                                     {Action::Squat, "squat"},
                                     {Action::Lunge, "lunge"},
                                     {Action::SingleLegBalance, "single_leg_balance"},
                                     {Action::SquatToBox, "squat_to_box"},
                                     {Action::SitToStand, "sit_to_stand"}}};
constexpr Table<Clothing, 2> kClothing{{{Clothing::Mocap, "mocap"}, {Clothing::Normal, "normal"}}};

template <class E, std::size_t N>
std::string_view name_of(const Table<E, N>& t, E v) {
  for (const auto& [e, s] : t)
    if (e == v) return s;
  return "?";
}

template <class E, std::size_t N>
std::optional<E> lookup(const Table<E, N>& t, std::string_view s) {
  for (const auto& [e, name] : t)
    if (name == s) return e;
  return std::nullopt;
}

bool finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

}  // namespace

Point3 midpoint(const Point3& a, const Point3& b) {
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y), 0.5 * (a.z + b.z)};
}

Quaternion Quaternion::from_axis_angle(const Point3& axis, double angle_rad) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw InputError("rotation axis has zero length");
  const double s = std::sin(0.5 * angle_rad) / n;
  return {std::cos(0.5 * angle_rad), axis.x * s, axis.y * s, axis.z * s};
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InputError("zero-norm quaternion");
  return {w / n, x / n, y / n, z / n};
}

std::array<std::array<double, 3>, 3> Quaternion::to_matrix() const {
  const double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
  const double xy = x * y, xz = x * z, yz = y * z, wx = w * x, wy = w * y, wz = w * z;
  return {{{ww + xx - yy - zz, 2.0 * (xy - wz), 2.0 * (xz + wy)},
           {2.0 * (xy + wz), ww - xx + yy - zz, 2.0 * (yz - wx)},
           {2.0 * (xz - wy), 2.0 * (yz + wx), ww - xx - yy + zz}}};
}

std::string_view to_string(Side v) { return name_of(kSides, v); }
std::string_view to_string(Joint v) { return name_of(kJoints, v); }
std::string_view to_string(Modality v) { return name_of(kModalities, v); }
std::string_view to_string(Segment v) { return name_of(kSegments, v); }
std::string_view to_string(SkeletonSource v) { return name_of(kSources, v); }
std::string_view to_string(CameraView v) { return name_of(kViews, v); }
std::string_view to_string(Action v) { return name_of(kActions, v); }
std::string_view to_string(Clothing v) { return name_of(kClothing, v); }

std::optional<Side> parse_side(std::string_view s) { return lookup(kSides, s); }
std::optional<Joint> parse_joint(std::string_view s) { return lookup(kJoints, s); }
std::optional<Modality> parse_modality(std::string_view s) { return lookup(kModalities, s); }
std::optional<Segment> parse_segment(std::string_view s) { return lookup(kSegments, s); }
std::optional<SkeletonSource> parse_skeleton_source(std::string_view s) { return lookup(kSources, s); }
std::optional<CameraView> parse_camera_view(std::string_view s) { return lookup(kViews, s); }
std::optional<Action> parse_action(std::string_view s) { return lookup(kActions, s); }
std::optional<Clothing> parse_clothing(std::string_view s) { return lookup(kClothing, s); }

Modality modality_of(SkeletonSource s) {
  return s == SkeletonSource::Pose33 ? Modality::Pose33 : Modality::Mesh49;
}

Segment thigh_segment(Side side) {
  return side == Side::Left ? Segment::LeftThigh : Segment::RightThigh;
}

Segment shank_segment(Side side) {
  return side == Side::Left ? Segment::LeftShank : Segment::RightShank;
}

const std::vector<std::string>& standard_marker_names() {
  static const std::vector<std::string> names{
      "LASIS", "RASIS", "LPSIS", "RPSIS", "LGT",  "RGT",  "LLFE", "LMFE",
      "RLFE",  "RMFE",  "LLM",   "LMM",   "RLM",  "RMM",  "LMT1", "LMT5",
      "RMT1",  "RMT5",  "LTH",   "RTH",   "LSK",  "RSK"};
  return names;
}

std::string landmark_name(Side side, Joint joint) {
  return std::string(to_string(side)) + "_" + std::string(to_string(joint));
}

std::size_t MarkerTrajectorySet::frame_count() const {
  return markers.empty() ? 0 : markers.begin()->second.size();
}

BiomarkerSet BiomarkerSet::from_extremes(double min_angle, double max_angle) {
  BiomarkerSet b;
  b.min_angle = min_angle;
  b.max_angle = max_angle;
  b.rom = max_angle - min_angle;
  return b;
}

Violation validate(const Point3& p) {
  if (!finite(p)) return "non-finite coordinate";
  return std::nullopt;
}

Violation validate(const Quaternion& q) {
  if (!std::isfinite(q.w) || !std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z))
    return "non-finite component";
  if (std::abs(q.norm() - 1.0) > kUnitNormTolerance) return "non-unit norm";
  return std::nullopt;
}

Violation validate(const MarkerTrajectorySet& m) {
  if (!(m.rate > 0.0)) return "rate must be positive";
  std::optional<std::size_t> length;
  for (const auto& [name, series] : m.markers) {
    if (series.rate != m.rate) return "marker " + name + " rate differs from set rate";
    if (length && series.size() != *length) return "marker " + name + " length differs";
    length = series.size();
    for (const auto& p : series.samples)
      if (auto v = validate(p)) return "marker " + name + ": " + *v;
  }
  return std::nullopt;
}

Violation validate(const QuaternionStream& s) {
  if (!(s.rate > 0.0)) return "rate must be positive";
  if (auto v = validate(s.samples)) return v;
  for (std::size_t i = 0; i < s.samples.size(); ++i)
    if (auto v = validate(s.samples.samples[i])) return "sample " + std::to_string(i) + ": " + *v;
  return std::nullopt;
}

Violation validate(const SkeletonSequence& s) {
  if (!(s.rate > 0.0)) return "rate must be positive";
  const std::size_t limit = s.source == SkeletonSource::Pose33 ? 33 : 49;
  for (std::size_t f = 0; f < s.frames.size(); ++f) {
    const auto& frame = s.frames[f];
    if (frame.size() > limit)
      return "frame " + std::to_string(f) + " carries " + std::to_string(frame.size()) +
             " landmarks, limit " + std::to_string(limit);
    for (Side side : {Side::Left, Side::Right})
      for (Joint j : {Joint::Hip, Joint::Knee, Joint::Ankle})
        if (!frame.count(landmark_name(side, j)))
          return "frame " + std::to_string(f) + " missing " + landmark_name(side, j);
    for (const auto& [name, p] : frame)
      if (auto v = validate(p)) return "frame " + std::to_string(f) + " " + name + ": " + *v;
  }
  return std::nullopt;
}

Violation validate(const AngleSeries& a) {
  if (auto v = validate(a.series)) return v;
  for (std::size_t i = 0; i < a.series.size(); ++i) {
    const double d = a.series.samples[i];
    if (!std::isfinite(d) || d < 0.0 || d > 180.0)
      return "sample " + std::to_string(i) + " outside [0, 180] degrees";
  }
  return std::nullopt;
}

Violation validate(const BiomarkerSet& b) {
  if (!(b.min_angle <= b.max_angle)) return "min_angle exceeds max_angle";
  if (b.rom != b.max_angle - b.min_angle) return "rom != max_angle - min_angle";
  return std::nullopt;
}

Violation validate(const TrialMeta& t) {
  if (t.participant_id.empty()) return "empty participant_id";
  if (t.repetition_index < 1) return "repetition_index must be >= 1";
  return std::nullopt;
}

}  // namespace kinemetric
