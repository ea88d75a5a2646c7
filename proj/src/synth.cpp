#include "kinemetric/synth.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "kinemetric/error.hpp"
#include "text.hpp"

namespace kinemetric {

namespace {

using json = nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

constexpr std::uint64_t kMarkerStream = 1;
constexpr std::uint64_t kImuStream = 2;
constexpr std::uint64_t kPoseStream = 3;
constexpr std::uint64_t kPlanStream = 4;

std::size_t sample_count(double duration, double rate) {
  return static_cast<std::size_t>(std::floor(duration * rate + 1e-9)) + 1;
}

double lateral_sign(Side s) { return s == Side::Left ? 1.0 : -1.0; }

Point3 jitter(const Point3& p, double sd, NormalSource& rng) {
  if (sd == 0.0) return p;
  const double dx = rng.normal() * sd;
  const double dy = rng.normal() * sd;
  const double dz = rng.normal() * sd;
  return {p.x + dx, p.y + dy, p.z + dz};
}

Quaternion perturb(const Quaternion& q, double sd_deg, NormalSource& rng) {
  if (sd_deg == 0.0) return q;
  Point3 axis{rng.normal(), rng.normal(), rng.normal()};
  const double angle = rng.normal() * sd_deg * kDegToRad;
  if (!(axis.norm() > 0.0)) axis = {1.0, 0.0, 0.0};
  return (q * Quaternion::from_axis_angle(axis, angle)).normalized();
}

std::string generator_comment(const NoiseSpec& n) {
  return "generator=mt19937_64+splitmix64+box_muller,seed=" + std::to_string(n.seed);
}

// Upper-body landmarks are static; only the legs carry signal.
const std::vector<std::pair<std::string, Point3>>& pose33_static() {
  static const std::vector<std::pair<std::string, Point3>> v{
      {"nose", {0.0, 0.1, 0.62}},           {"left_eye_inner", {0.015, 0.09, 0.66}},
      {"left_eye", {0.03, 0.09, 0.66}},     {"left_eye_outer", {0.045, 0.085, 0.66}},
      {"right_eye_inner", {-0.015, 0.09, 0.66}}, {"right_eye", {-0.03, 0.09, 0.66}},
      {"right_eye_outer", {-0.045, 0.085, 0.66}}, {"left_ear", {0.075, 0.02, 0.65}},
      {"right_ear", {-0.075, 0.02, 0.65}},  {"mouth_left", {0.025, 0.09, 0.58}},
      {"mouth_right", {-0.025, 0.09, 0.58}}, {"left_shoulder", {0.18, 0.0, 0.45}},
      {"right_shoulder", {-0.18, 0.0, 0.45}}, {"left_elbow", {0.22, 0.0, 0.18}},
      {"right_elbow", {-0.22, 0.0, 0.18}},  {"left_wrist", {0.24, 0.05, -0.05}},
      {"right_wrist", {-0.24, 0.05, -0.05}}, {"left_pinky", {0.25, 0.06, -0.12}},
      {"right_pinky", {-0.25, 0.06, -0.12}}, {"left_index", {0.24, 0.07, -0.12}},
      {"right_index", {-0.24, 0.07, -0.12}}, {"left_thumb", {0.23, 0.08, -0.09}},
      {"right_thumb", {-0.23, 0.08, -0.09}}};
  return v;
}

const std::vector<std::pair<std::string, Point3>>& mesh49_static() {
  static const std::vector<std::pair<std::string, Point3>> v{
      {"OP Nose", {0.0, 0.1, 0.62}},          {"OP Neck", {0.0, 0.0, 0.47}},
      {"OP RShoulder", {-0.18, 0.0, 0.45}},   {"OP RElbow", {-0.22, 0.0, 0.18}},
      {"OP RWrist", {-0.24, 0.05, -0.05}},    {"OP LShoulder", {0.18, 0.0, 0.45}},
      {"OP LElbow", {0.22, 0.0, 0.18}},       {"OP LWrist", {0.24, 0.05, -0.05}},
      {"OP MidHip", {0.0, 0.0, 0.0}},         {"OP REye", {-0.03, 0.09, 0.66}},
      {"OP LEye", {0.03, 0.09, 0.66}},        {"OP REar", {-0.075, 0.02, 0.65}},
      {"OP LEar", {0.075, 0.02, 0.65}},       {"Right Wrist", {-0.24, 0.05, -0.05}},
      {"Right Elbow", {-0.22, 0.0, 0.18}},    {"Right Shoulder", {-0.18, 0.0, 0.45}},
      {"Left Shoulder", {0.18, 0.0, 0.45}},   {"Left Elbow", {0.22, 0.0, 0.18}},
      {"Left Wrist", {0.24, 0.05, -0.05}},    {"Neck (LSP)", {0.0, 0.0, 0.5}},
      {"Top of Head (LSP)", {0.0, 0.02, 0.75}}, {"Pelvis (MPII)", {0.0, 0.0, 0.0}},
      {"Thorax (MPII)", {0.0, 0.0, 0.4}},     {"Spine (H36M)", {0.0, 0.0, 0.2}},
      {"Jaw (H36M)", {0.0, 0.08, 0.57}},      {"Head (H36M)", {0.0, 0.03, 0.65}},
      {"Nose", {0.0, 0.1, 0.62}},             {"Left Eye", {0.03, 0.09, 0.66}},
      {"Right Eye", {-0.03, 0.09, 0.66}},     {"Left Ear", {0.075, 0.02, 0.65}},
      {"Right Ear", {-0.075, 0.02, 0.65}}};
  return v;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

NormalSource::NormalSource(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(seed ^ stream)) {}

double NormalSource::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalSource::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Violation validate(const MotionProfile& p) {
  if (!(p.duration > 0.0) || !std::isfinite(p.duration)) return "duration must be positive";
  if (!(p.min_angle < p.max_angle)) return "min_angle must be below max_angle";
  if (p.min_angle < 0.0 || p.max_angle > 180.0) return "angles must lie in [0, 180]";
  if (p.repetitions < 1) return "repetitions must be >= 1";
  return std::nullopt;
}

Violation validate(const NoiseSpec& n) {
  if (!(n.marker_noise_sd >= 0.0) || !(n.quat_noise_sd >= 0.0) || !(n.pose_noise_sd >= 0.0))
    return "noise standard deviations must be >= 0";
  return std::nullopt;
}

NoiseSpec default_noise(std::uint64_t seed) {
  NoiseSpec n;
  n.marker_noise_sd = 0.001;
  n.quat_noise_sd = 0.5;
  n.pose_noise_sd = 0.01;
  n.seed = seed;
  return n;
}

double flexion_curve(const MotionProfile& profile, double t) {
  if (auto v = validate(profile)) throw InputError("motion profile: " + *v);
  if (!(t >= -1e-9 && t <= profile.duration + 1e-9))
    throw InputError("flexion_curve: t = " + std::to_string(t) + " outside [0, " + std::to_string(profile.duration) +
                     "]");
  const double period = profile.duration / profile.repetitions;
  double phase = std::fmod(std::max(t, 0.0), period) / period;
  const double shape = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
  const double span = profile.max_angle - profile.min_angle;
  return profile.action == Action::SitToStand ? profile.max_angle - span * shape : profile.min_angle + span * shape;
}

LegPose leg_pose(const LegModel& leg, Side side, double flexion_deg) {
  const double theta = flexion_deg * kDegToRad;
  const double thigh_pitch = 0.5 * theta;
  const double shank_pitch = thigh_pitch - theta;
  LegPose p;
  p.hip = {lateral_sign(side) * leg.hip_half_width, 0.0, leg.pelvis_height};
  p.knee = p.hip + leg.thigh_length * Point3{0.0, std::sin(thigh_pitch), -std::cos(thigh_pitch)};
  p.ankle = p.knee + leg.shank_length * Point3{0.0, std::sin(shank_pitch), -std::cos(shank_pitch)};
  return p;
}

MarkerTrajectorySet synth_markers(const MotionProfile& p, const NoiseSpec& n, double rate, const LegModel& leg) {
  if (auto v = validate(n)) throw InputError("noise: " + *v);
  const std::size_t frames = sample_count(p.duration, rate);
  NormalSource rng(n.seed, kMarkerStream);
  MarkerTrajectorySet set;
  set.rate = rate;
  set.order = standard_marker_names();
  for (const auto& name : set.order) set.markers[name] = TimeSeries<Point3>{0.0, rate, std::vector<Point3>(frames)};

  // Column index of every marker name, resolved once.
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < set.order.size(); ++i) column[set.order[i]] = i;
  std::vector<std::vector<Point3>*> tracks;
  for (const auto& name : set.order) tracks.push_back(&set.markers[name].samples);
  constexpr std::array<const char*, 11> kSuffixes{"ASIS", "PSIS", "GT", "LFE", "MFE", "LM", "MM", "MT1", "MT5", "TH", "SK"};
  std::array<std::array<std::size_t, 11>, 2> idx{};
  for (int side = 0; side < 2; ++side)
    for (std::size_t k = 0; k < kSuffixes.size(); ++k)
      idx[side][k] = column.at((side == 0 ? "L" : "R") + std::string(kSuffixes[k]));

  const Point3 pelvis{0.0, 0.0, leg.pelvis_height};
  std::vector<Point3> truth(set.order.size());
  for (std::size_t f = 0; f < frames; ++f) {
    const double theta = flexion_curve(p, static_cast<double>(f) / rate);
    for (Side side : {Side::Left, Side::Right}) {
      const auto pose = leg_pose(leg, side, theta);
      const double s = lateral_sign(side);
      const auto& at = idx[side == Side::Left ? 0 : 1];
      const Point3 lat{s, 0.0, 0.0};
      const Point3 thigh_dir = (1.0 / leg.thigh_length) * (pose.knee - pose.hip);
      const Point3 shank_dir = (1.0 / leg.shank_length) * (pose.ankle - pose.knee);
      truth[at[0]] = pelvis + Point3{s * 0.12, 0.08, 0.05};
      truth[at[1]] = pelvis + Point3{s * 0.05, -0.10, 0.07};
      truth[at[2]] = pose.hip;
      truth[at[3]] = pose.knee + leg.epicondyle_offset * lat;
      truth[at[4]] = pose.knee - leg.epicondyle_offset * lat;
      truth[at[5]] = pose.ankle + leg.malleolus_offset * lat;
      truth[at[6]] = pose.ankle - leg.malleolus_offset * lat;
      truth[at[7]] = pose.ankle + Point3{-s * 0.03, 0.15, -0.05};
      truth[at[8]] = pose.ankle + Point3{s * 0.04, 0.13, -0.05};
      truth[at[9]] = pose.hip + (0.5 * leg.thigh_length) * thigh_dir + 0.07 * lat;
      truth[at[10]] = pose.knee + (0.5 * leg.shank_length) * shank_dir + 0.06 * lat;
    }
    // Noise is drawn in file column order so the stream is reproducible.
    for (std::size_t i = 0; i < tracks.size(); ++i) (*tracks[i])[f] = jitter(truth[i], n.marker_noise_sd, rng);
  }
  return set;
}

std::vector<QuaternionStream> synth_imu(const MotionProfile& p, const NoiseSpec& n, double rate) {
  if (auto v = validate(n)) throw InputError("noise: " + *v);
  const std::size_t frames = sample_count(p.duration, rate);
  NormalSource rng(n.seed, kImuStream);
  const std::array<Segment, 6> segments{Segment::LeftThigh, Segment::LeftShank, Segment::LeftFoot,
                                        Segment::RightThigh, Segment::RightShank, Segment::RightFoot};
  std::vector<QuaternionStream> streams;
  for (Segment s : segments) {
    QuaternionStream qs;
    qs.segment = s;
    qs.rate = rate;
    qs.samples = TimeSeries<Quaternion>{0.0, rate, std::vector<Quaternion>(frames)};
    streams.push_back(std::move(qs));
  }
  const Point3 mediolateral{1.0, 0.0, 0.0};
  for (std::size_t f = 0; f < frames; ++f) {
    const double theta = flexion_curve(p, static_cast<double>(f) / rate);
    // Shank rotates by -flexion so the default decomposition (first XYZ angle, negated) reads +flexion.
    const auto shank = theta == 0.0 ? Quaternion::identity()
                                    : Quaternion::from_axis_angle(mediolateral, -theta * kDegToRad);
    for (auto& qs : streams) {
      const bool is_shank = qs.segment == Segment::LeftShank || qs.segment == Segment::RightShank;
      qs.samples.samples[f] = perturb(is_shank ? shank : Quaternion::identity(), n.quat_noise_sd, rng);
    }
  }
  return streams;
}

SkeletonSequence synth_pose(const MotionProfile& p, const NoiseSpec& n, double rate, SkeletonSource source,
                            CameraView view, const LegModel& leg) {
  if (auto v = validate(n)) throw InputError("noise: " + *v);
  const std::size_t frames = sample_count(p.duration, rate);
  NormalSource rng(n.seed, kPoseStream);
  SkeletonSequence seq;
  seq.source = source;
  seq.rate = rate;
  seq.camera_view = view;
  seq.frames.resize(frames);
  const Point3 root{0.0, 0.0, leg.pelvis_height};
  const auto& statics = source == SkeletonSource::Pose33 ? pose33_static() : mesh49_static();

  for (std::size_t f = 0; f < frames; ++f) {
    const double theta = flexion_curve(p, static_cast<double>(f) / rate);
    std::vector<std::pair<std::string, Point3>> lm(statics.begin(), statics.end());
    for (Side side : {Side::Left, Side::Right}) {
      const auto pose = leg_pose(leg, side, theta);
      const double s = lateral_sign(side);
      const Point3 hip = pose.hip - root, knee = pose.knee - root, ankle = pose.ankle - root;
      const Point3 heel = ankle + Point3{0.0, -0.05, -0.05};
      const Point3 toe = ankle + Point3{s * 0.01, 0.17, -0.06};
      if (source == SkeletonSource::Pose33) {
        const std::string pre = side == Side::Left ? "left_" : "right_";
        lm.insert(lm.end(), {{pre + "hip", hip}, {pre + "knee", knee}, {pre + "ankle", ankle},
                             {pre + "heel", heel}, {pre + "foot_index", toe}});
      } else {
        const std::string word = side == Side::Left ? "Left " : "Right ";
        const std::string op = side == Side::Left ? "OP L" : "OP R";
        lm.insert(lm.end(), {{word + "Hip", hip}, {word + "Knee", knee}, {word + "Ankle", ankle},
                             {op + "Hip", hip}, {op + "Knee", knee}, {op + "Ankle", ankle},
                             {op + "BigToe", toe}, {op + "SmallToe", toe + Point3{s * 0.04, -0.02, 0.0}},
                             {op + "Heel", heel}});
      }
    }
    const NameAliases* aliases = source == SkeletonSource::Mesh49 ? &default_mesh49_aliases() : nullptr;
    auto& frame = seq.frames[f];
    for (const auto& [name, pt] : lm) {
      std::string key = name;
      if (aliases)
        if (const auto it = aliases->find(name); it != aliases->end()) key = it->second;
      frame[key] = jitter(pt, n.pose_noise_sd, rng);
    }
  }
  return seq;
}

std::string render_markers(const MotionProfile& p, const NoiseSpec& n, double rate) {
  return serialize_marker_csv(synth_markers(p, n, rate), LengthUnit::Millimeters, generator_comment(n));
}

std::string render_imu(const MotionProfile& p, const NoiseSpec& n, double rate) {
  return serialize_imu_csv(synth_imu(p, n, rate), generator_comment(n));
}

std::string render_pose(const MotionProfile& p, const NoiseSpec& n, double rate, SkeletonSource source,
                        CameraView view) {
  auto seq = synth_pose(p, n, rate, source, view);
  if (source == SkeletonSource::Mesh49) {
    // Files carry vendor names; canonical keys are restored on parse.
    std::map<std::string, std::string> reverse;
    for (const auto& [vendor, canon] : default_mesh49_aliases()) reverse[canon] = vendor;
    for (auto& frame : seq.frames) {
      SkeletonFrame renamed;
      for (auto& [name, pt] : frame) {
        const auto it = reverse.find(name);
        renamed[it == reverse.end() ? name : it->second] = pt;
      }
      frame = std::move(renamed);
    }
  }
  return serialize_pose_json(seq);
}

std::string render_truth(const MotionProfile& p, const NoiseSpec& n, double rate) {
  const std::size_t count = sample_count(p.duration, rate);
  std::ostringstream samples;
  double lo = p.max_angle, hi = p.min_angle;
  samples << '[';
  for (std::size_t i = 0; i < count; ++i) {
    const double v = flexion_curve(p, static_cast<double>(i) / rate);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    samples << (i ? "," : "") << text::format_double(v);
  }
  samples << ']';
  const auto truth = BiomarkerSet::from_extremes(lo, hi);
  std::ostringstream out;
  out << "{\"profile\":{\"action\":\"" << to_string(p.action) << "\",\"duration\":" << text::format_double(p.duration)
      << ",\"min_angle\":" << text::format_double(p.min_angle) << ",\"max_angle\":" << text::format_double(p.max_angle)
      << ",\"repetitions\":" << p.repetitions << "},\"noise\":{\"marker_noise_sd\":"
      << text::format_double(n.marker_noise_sd) << ",\"quat_noise_sd\":" << text::format_double(n.quat_noise_sd)
      << ",\"pose_noise_sd\":" << text::format_double(n.pose_noise_sd) << ",\"seed\":" << n.seed
      << ",\"generator\":\"mt19937_64+splitmix64+box_muller\"},\"curve\":{\"rate\":" << text::format_double(rate)
      << ",\"start_time\":0,\"degrees\":" << samples.str() << "},\"biomarkers\":{\"min\":"
      << text::format_double(truth.min_angle) << ",\"max\":" << text::format_double(truth.max_angle)
      << ",\"rom\":" << text::format_double(truth.rom) << "}}\n";
  return out.str();
}

int default_repetitions(Action a) {
  switch (a) {
    case Action::Squat: return 5;
    case Action::Lunge: return 3;
    case Action::SquatToBox: return 5;
    case Action::SitToStand: return 3;
    case Action::Static:
    case Action::SingleLegBalance: return 1;
  }
  return 1;
}

std::vector<SynthTrial> plan_population(const PopulationSpec& spec) {
  if (spec.participants < 1) throw InputError("population: need at least one participant");
  if (auto v = validate(spec.noise)) throw InputError("noise: " + *v);
  NormalSource plan(spec.seed, kPlanStream);
  std::vector<SynthTrial> out;
  for (int p = 1; p <= spec.participants; ++p) {
    char pid[16];
    std::snprintf(pid, sizeof pid, "P%02d", p);
    for (Action action : spec.actions) {
      // Participant-level movement characteristics.
      MotionProfile base;
      base.action = action;
      base.min_angle = 5.0 + 10.0 * plan.uniform();
      base.max_angle = base.min_angle + 75.0 + 20.0 * plan.uniform();
      // Cycle length k/15 s keeps the peak on a sample at 30, 150 and 300 Hz.
      base.duration = (40.0 + std::floor(16.0 * plan.uniform())) / 15.0;
      if (action == Action::Static) base.max_angle = base.min_angle + 1.0;

      const auto it = spec.repetitions.find(action);
      const int reps = it != spec.repetitions.end() ? it->second : default_repetitions(action);
      for (int r = 1; r <= reps; ++r) {
        SynthTrial t;
        t.meta = {pid, action, spec.clothing, r};
        t.trial_id = std::string(pid) + "_" + std::string(to_string(action)) + "_" +
                     std::string(to_string(spec.clothing)) + "_r" + std::to_string(r);
        t.profile = base;
        t.profile.min_angle = base.min_angle + (plan.uniform() - 0.5) * 2.0;
        t.profile.max_angle = base.max_angle + (plan.uniform() - 0.5) * 4.0;
        t.noise = spec.noise;
        t.noise.seed = splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(out.size()) + 1));
        t.marker_profile = t.imu_profile = t.pose_profile = t.profile;
        if (spec.rom_inflation) {
          const auto [modality, deg] = *spec.rom_inflation;
          MotionProfile* target = modality == Modality::Mocap ? &t.marker_profile
                                  : modality == Modality::Imu ? &t.imu_profile
                                                              : &t.pose_profile;
          target->max_angle += deg;
        }
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

}  // namespace kinemetric
