#pragma once

// Ground-truth knee flexion profiles rendered into the three capture formats.
//
// Leg model: a planar two-segment chain in the sagittal (y-z) plane, x points
// to the subject's left, z up. The thigh pitches forward by half the knee
// flexion and the shank backward by the other half, so the angle between the
// segments is exactly the generated flexion.
//
// Randomness: std::mt19937_64 (fully specified by the C++ standard) seeded
// per modality stream with splitmix64(seed ^ stream_tag); uniforms use the top
// 53 bits, normals use the Box-Muller cosine branch. Any implementation of
// those three pieces reproduces the fixtures bit for bit.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kinemetric/ingest.hpp"
#include "kinemetric/model.hpp"

namespace kinemetric {

struct MotionProfile {
  Action action = Action::SitToStand;
  double duration = 3.0;  // seconds
  double min_angle = 10.0;
  double max_angle = 95.0;
  int repetitions = 1;
};

Violation validate(const MotionProfile& p);

/// Raised-cosine cycles between min_angle and max_angle; sit-to-stand starts
/// flexed (seated), every other action starts extended.
double flexion_curve(const MotionProfile& profile, double t);

struct NoiseSpec {
  double marker_noise_sd = 0.0;  // meters
  double quat_noise_sd = 0.0;    // degrees
  double pose_noise_sd = 0.0;    // meters
  std::uint64_t seed = 0;
};

Violation validate(const NoiseSpec& n);

/// Defaults used by the CLI and the noisy population study.
NoiseSpec default_noise(std::uint64_t seed);

struct LegModel {
  double thigh_length = 0.45;
  double shank_length = 0.43;
  double hip_half_width = 0.09;
  double epicondyle_offset = 0.05;
  double malleolus_offset = 0.05;
  double pelvis_height = 0.95;
};

inline constexpr double kMarkerRate = 150.0;
inline constexpr double kImuRate = 300.0;
inline constexpr double kPoseRate = 30.0;

/// Deterministic normal deviates (see header comment).
class NormalSource {
public:
  NormalSource(std::uint64_t seed, std::uint64_t stream);
  double uniform();
  double normal();

private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Sagittal-plane joint centers at time t for one side, in the lab frame.
struct LegPose {
  Point3 hip, knee, ankle;
};
LegPose leg_pose(const LegModel& leg, Side side, double flexion_deg);

// In-memory renders (the byte renders serialize these).
MarkerTrajectorySet synth_markers(const MotionProfile& p, const NoiseSpec& n, double rate = kMarkerRate,
                                  const LegModel& leg = {});
std::vector<QuaternionStream> synth_imu(const MotionProfile& p, const NoiseSpec& n, double rate = kImuRate);
SkeletonSequence synth_pose(const MotionProfile& p, const NoiseSpec& n, double rate = kPoseRate,
                            SkeletonSource source = SkeletonSource::Pose33,
                            CameraView view = CameraView::Sagittal, const LegModel& leg = {});

std::string render_markers(const MotionProfile& p, const NoiseSpec& n, double rate = kMarkerRate);
std::string render_imu(const MotionProfile& p, const NoiseSpec& n, double rate = kImuRate);
std::string render_pose(const MotionProfile& p, const NoiseSpec& n, double rate = kPoseRate,
                        SkeletonSource source = SkeletonSource::Pose33, CameraView view = CameraView::Sagittal);

/// Ground truth document: profile, noise, curve samples at `rate` and true biomarkers.
std::string render_truth(const MotionProfile& p, const NoiseSpec& n, double rate = kMarkerRate);

// ---------------------------------------------------------------------------
// Populations
// ---------------------------------------------------------------------------

struct PopulationSpec {
  int participants = 10;
  std::vector<Action> actions{Action::SitToStand, Action::SquatToBox};
  /// Repetitions per action; when empty the study's counts are used
  /// (squat 5, lunge 3, squat-to-box 5, sit-to-stand 3, others 1).
  std::map<Action, int> repetitions;
  Clothing clothing = Clothing::Mocap;
  std::uint64_t seed = 0;
  NoiseSpec noise;  // seed field ignored; per-trial seeds derive from `seed`
  SkeletonSource skeleton = SkeletonSource::Pose33;
  CameraView camera_view = CameraView::Sagittal;
  /// Extra degrees added to the peak flexion seen by one modality.
  std::optional<std::pair<Modality, double>> rom_inflation;
};

int default_repetitions(Action a);

struct SynthTrial {
  TrialMeta meta;
  std::string trial_id;
  MotionProfile profile;
  NoiseSpec noise;
  /// Profile seen by each modality (differs from `profile` only under inflation).
  MotionProfile marker_profile, imu_profile, pose_profile;
};

/// Participant/trial plan; rendering is left to the caller.
std::vector<SynthTrial> plan_population(const PopulationSpec& spec);

}  // namespace kinemetric
