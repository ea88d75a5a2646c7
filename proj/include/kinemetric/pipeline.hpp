#pragma once

// Batch pipeline behind the `angles`, `compare`, `population` and `synth`
// commands. Everything here is deterministic: the same config and inputs
// give byte-identical JSON/CSV output.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinemetric/biomarkers.hpp"
#include "kinemetric/ingest.hpp"
#include "kinemetric/kinematics.hpp"
#include "kinemetric/signal.hpp"
#include "kinemetric/synth.hpp"

namespace kinemetric {

enum class AlignMode { Auto, Manual };
enum class SmoothTarget { Coordinates, Angles };

struct RunConfig {
  double target_rate = 10.0;
  std::optional<SgParams> marker_sg = SgParams{15, 3};
  std::optional<SgParams> pose_sg = SgParams{5, 1};
  std::optional<SgParams> imu_sg;
  SmoothTarget smooth_target = SmoothTarget::Coordinates;
  EulerConfig euler;
  double imu_offset_deg = 0.0;
  AlignMode align_mode = AlignMode::Auto;
  int manual_lag = 0;
  double max_lag_seconds = 5.0;
  std::vector<ModalityPair> pairs{{Modality::Pose33, Modality::Imu},
                                  {Modality::Pose33, Modality::Mocap},
                                  {Modality::Mocap, Modality::Imu}};
  std::set<std::string> formats{"csv", "json", "svg"};
  Metric metric = Metric::Rom;
  NameAliases marker_aliases;
  JointCenterConfig joint_centers;
  std::string mesh49_alias_file;  // empty: built-in table
};

nlohmann::json to_json(const RunConfig& c);
/// Missing keys keep their defaults. Throws InputError on bad values.
RunConfig config_from_json(const nlohmann::json& j);
Violation validate(const RunConfig& c);

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct ManifestEntry {
  TrialMeta meta;
  std::string trial_id;
  std::optional<std::string> markers, imu, pose;  // paths as written in the manifest
  std::optional<int> lag;                          // manual alignment override
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> trials;
};

Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::string_view bytes, const std::filesystem::path& base_dir);
std::string serialize_manifest(const Manifest& m);
std::string default_trial_id(const TrialMeta& meta);

// ---------------------------------------------------------------------------
// Per-trial processing
// ---------------------------------------------------------------------------

struct TrialInputs {
  TrialMeta meta;
  std::string trial_id;
  std::optional<MarkerTrajectorySet> markers;
  std::optional<std::vector<QuaternionStream>> imu;
  std::optional<SkeletonSequence> pose;
  std::optional<int> lag;
};

TrialInputs load_trial(const ManifestEntry& entry, const std::filesystem::path& base_dir, const RunConfig& config);

struct TrialAngles {
  TrialMeta meta;
  std::string trial_id;
  std::optional<CameraView> camera_view;
  std::optional<int> lag;
  std::map<std::pair<Modality, Side>, AngleSeries> series;  // native rate
  std::size_t imu_warnings = 0;
  std::size_t gimbal_warnings = 0;
};

/// Smoothing, joint angles and convention normalization for every modality
/// present, on both sides unless `only` is given.
TrialAngles compute_angles(const TrialInputs& in, const RunConfig& config, std::optional<Side> only = std::nullopt);

/// Resamples to the target rate, aligns each configured pair and collects
/// biomarkers plus agreement statistics.
TrialComparison compare_trial(const TrialAngles& angles, const RunConfig& config);

struct PopulationRow {
  Action action = Action::Static;
  Joint joint = Joint::Knee;
  Side side = Side::Left;
  Metric metric = Metric::Rom;
  ModalityPair pair{Modality::Pose33, Modality::Imu};
  Clothing clothing = Clothing::Mocap;
  std::optional<CameraView> camera_view;
  std::size_t n = 0;
  std::optional<TTestResult> ttest;
  std::optional<double> r;
  std::string status = "ok";
};

/// One row per (pair, action, clothing, camera view, side) cell; cells that
/// cannot be tested carry a status instead of being dropped.
std::vector<PopulationRow> population_rows(const std::vector<TrialComparison>& trials, const RunConfig& config);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string serialize_angle_csv(const AngleSeries& s);
AngleSeries parse_angle_csv(std::string_view bytes);
std::string angle_file_name(const std::string& trial_id, Modality m, Side s);

nlohmann::json report_json(const RunConfig& config, const std::vector<TrialComparison>& trials,
                           const std::vector<PopulationRow>& population);
std::string trials_csv(const std::vector<TrialComparison>& trials);
std::string population_csv(const std::vector<PopulationRow>& rows);
nlohmann::json population_json(const RunConfig& config, const std::vector<PopulationRow>& rows);

/// Bland-Altman plot with a solid bias line and dashed limits of agreement.
std::string bland_altman_svg(const BlandAltman& ba, const std::string& title, const std::string& x_label);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct CommandSummary {
  std::vector<std::filesystem::path> written;
  std::size_t trials = 0;
};

CommandSummary run_angles(const RunConfig& config, const std::filesystem::path& manifest,
                          const std::filesystem::path& out_dir);

/// When `angles_dir` is empty the angles are computed from the manifest's files.
CommandSummary run_compare(const RunConfig& config, const std::filesystem::path& manifest,
                           const std::filesystem::path& out_dir, const std::filesystem::path& angles_dir = {});

CommandSummary run_population(const RunConfig& config, const std::filesystem::path& manifest,
                              const std::filesystem::path& out_dir, const std::filesystem::path& angles_dir = {});

struct SynthRequest {
  std::optional<MotionProfile> profile;  // single trial when set
  PopulationSpec population;
};

CommandSummary run_synth(const SynthRequest& request, const std::filesystem::path& out_dir);

/// Renders a planned trial straight into memory (no files).
TrialInputs synth_inputs(const SynthTrial& trial, const PopulationSpec& spec);

}  // namespace kinemetric
