#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "kinemetric/error.hpp"
#include "kinemetric/pipeline.hpp"
#include "text.hpp"

namespace kinemetric {

namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, n) on a few worker threads. Results are written by
// index, so output order never depends on scheduling; the error reported is
// the one from the lowest failing index.
template <class F>
void parallel_for(std::size_t n, F fn) {
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 8);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1 || n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Manifest checked_manifest(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("missing file " + path.string());
  auto m = load_manifest(path);
  if (m.trials.empty()) throw InputError("no trials");
  return m;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
}

// The angle CSV header may carry the skeleton camera view as an extra key.
std::string with_camera_view(std::string csv, const std::optional<CameraView>& view) {
  if (!view) return csv;
  csv.insert(csv.find('\n'), ",camera_view=" + std::string(to_string(*view)));
  return csv;
}

std::optional<CameraView> camera_view_of(std::string_view csv) {
  const auto first = csv.substr(0, csv.find('\n'));
  const auto pos = first.find("camera_view=");
  if (pos == std::string_view::npos) return std::nullopt;
  auto value = first.substr(pos + 12);
  value = value.substr(0, value.find(','));
  return parse_camera_view(text::trim(value));
}

std::vector<TrialAngles> angles_from_inputs(const RunConfig& config, const Manifest& m) {
  std::vector<TrialAngles> out(m.trials.size());
  parallel_for(m.trials.size(), [&](std::size_t i) {
    out[i] = compute_angles(load_trial(m.trials[i], m.base_dir, config), config);
  });
  return out;
}

std::vector<TrialAngles> angles_from_dir(const Manifest& m, const fs::path& dir) {
  std::vector<TrialAngles> out(m.trials.size());
  parallel_for(m.trials.size(), [&](std::size_t i) {
    const auto& e = m.trials[i];
    TrialAngles t;
    t.meta = e.meta;
    t.trial_id = e.trial_id;
    t.lag = e.lag;
    for (const auto mod : {Modality::Mocap, Modality::Imu, Modality::Pose33, Modality::Mesh49})
      for (const auto side : {Side::Left, Side::Right}) {
        const auto path = dir / angle_file_name(e.trial_id, mod, side);
        if (!fs::exists(path)) continue;
        const auto bytes = read_file(path);
        try {
          t.series[{mod, side}] = parse_angle_csv(bytes);
        } catch (const InputError& ex) {
          throw InputError(path.string() + ": " + ex.what());
        }
        if (auto v = camera_view_of(bytes)) t.camera_view = v;
      }
    if (t.series.empty()) throw InputError("trial " + e.trial_id + ": no angle files in " + dir.string());
    out[i] = std::move(t);
  });
  return out;
}

std::vector<TrialComparison> compare_all(const RunConfig& config, const std::vector<TrialAngles>& angles) {
  std::vector<TrialComparison> out(angles.size());
  parallel_for(angles.size(), [&](std::size_t i) { out[i] = compare_trial(angles[i], config); });
  return out;
}

std::vector<TrialComparison> comparisons(const RunConfig& config, const Manifest& m, const fs::path& angles_dir) {
  return compare_all(config, angles_dir.empty() ? angles_from_inputs(config, m) : angles_from_dir(m, angles_dir));
}

void emit(CommandSummary& s, const fs::path& path, std::string_view content) {
  write_file_atomic(path, content);
  s.written.push_back(path);
}

}  // namespace

CommandSummary run_angles(const RunConfig& config, const fs::path& manifest, const fs::path& out_dir) {
  const auto m = checked_manifest(manifest);
  const auto angles = angles_from_inputs(config, m);
  ensure_dir(out_dir);
  CommandSummary s;
  s.trials = angles.size();
  for (const auto& t : angles)
    for (const auto& [key, series] : t.series) {
      const bool skeleton = key.first == Modality::Pose33 || key.first == Modality::Mesh49;
      emit(s, out_dir / angle_file_name(t.trial_id, key.first, key.second),
           with_camera_view(serialize_angle_csv(series), skeleton ? t.camera_view : std::nullopt));
    }
  return s;
}

CommandSummary run_compare(const RunConfig& config, const fs::path& manifest, const fs::path& out_dir,
                           const fs::path& angles_dir) {
  const auto m = checked_manifest(manifest);
  const auto trials = comparisons(config, m, angles_dir);
  const auto rows = population_rows(trials, config);
  ensure_dir(out_dir);
  CommandSummary s;
  s.trials = trials.size();
  if (config.formats.count("json")) emit(s, out_dir / "report.json", report_json(config, trials, rows).dump(2) + "\n");
  if (config.formats.count("csv")) emit(s, out_dir / "trials.csv", trials_csv(trials));
  if (config.formats.count("svg")) {
    for (const auto& pair : config.pairs)
      for (const auto side : {Side::Left, Side::Right}) {
        std::vector<double> a, b;
        const AgreementReport* only = nullptr;
        for (const auto& t : trials)
          for (const auto& p : t.pairs)
            if (p.a == pair.a && p.b == pair.b && p.side == side) {
              a.push_back(metric_value(t.biomarkers.at({p.a, side}), config.metric));
              b.push_back(metric_value(t.biomarkers.at({p.b, side}), config.metric));
              only = &p;
            }
        if (a.empty()) continue;
        const std::string an(to_string(pair.a)), bn(to_string(pair.b)), sn(to_string(side));
        const auto name = "bland_altman_" + an + "_" + bn + "_" + sn + ".svg";
        if (a.size() >= 2) {
          const std::string metric(to_string(config.metric));
          emit(s, out_dir / name,
               bland_altman_svg(bland_altman(a, b), sn + " knee " + metric + ": " + an + " - " + bn,
                                "mean " + metric + " (deg)"));
        } else {
          emit(s, out_dir / name,
               bland_altman_svg(only->bland_altman, sn + " knee angle: " + an + " - " + bn, "mean angle (deg)"));
        }
      }
  }
  return s;
}

CommandSummary run_population(const RunConfig& config, const fs::path& manifest, const fs::path& out_dir,
                              const fs::path& angles_dir) {
  const auto m = checked_manifest(manifest);
  const auto trials = comparisons(config, m, angles_dir);
  const auto rows = population_rows(trials, config);
  ensure_dir(out_dir);
  CommandSummary s;
  s.trials = trials.size();
  if (config.formats.count("csv")) emit(s, out_dir / "population.csv", population_csv(rows));
  if (config.formats.count("json"))
    emit(s, out_dir / "population.json", population_json(config, rows).dump(2) + "\n");
  return s;
}

TrialInputs synth_inputs(const SynthTrial& trial, const PopulationSpec& spec) {
  TrialInputs in;
  in.meta = trial.meta;
  in.trial_id = trial.trial_id;
  in.markers = synth_markers(trial.marker_profile, trial.noise);
  in.markers->trial_id = trial.trial_id;
  in.imu = synth_imu(trial.imu_profile, trial.noise);
  for (auto& q : *in.imu) q.trial_id = trial.trial_id;
  in.pose = synth_pose(trial.pose_profile, trial.noise, kPoseRate, spec.skeleton, spec.camera_view);
  in.pose->trial_id = trial.trial_id;
  return in;
}

CommandSummary run_synth(const SynthRequest& request, const fs::path& out_dir) {
  std::vector<SynthTrial> plan;
  const auto& spec = request.population;
  if (request.profile) {
    if (auto v = validate(*request.profile)) throw InputError("profile: " + *v);
    SynthTrial t;
    t.meta = {"P01", request.profile->action, spec.clothing, 1};
    t.trial_id = default_trial_id(t.meta);
    t.profile = t.marker_profile = t.imu_profile = t.pose_profile = *request.profile;
    if (spec.rom_inflation) {
      auto& target = spec.rom_inflation->first == Modality::Mocap ? t.marker_profile
                     : spec.rom_inflation->first == Modality::Imu ? t.imu_profile
                                                                  : t.pose_profile;
      target.max_angle += spec.rom_inflation->second;
    }
    t.noise = spec.noise;
    t.noise.seed = spec.seed;
    if (auto v = validate(t.noise)) throw InputError("noise: " + *v);
    plan.push_back(t);
  } else {
    plan = plan_population(spec);
  }
  ensure_dir(out_dir);
  CommandSummary s;
  s.trials = plan.size();
  Manifest manifest;
  manifest.base_dir = out_dir;
  for (const auto& t : plan) {
    ManifestEntry e;
    e.meta = t.meta;
    e.trial_id = t.trial_id;
    e.markers = t.trial_id + "_markers.csv";
    e.imu = t.trial_id + "_imu.csv";
    e.pose = t.trial_id + "_pose.json";
    emit(s, out_dir / *e.markers, render_markers(t.marker_profile, t.noise));
    emit(s, out_dir / *e.imu, render_imu(t.imu_profile, t.noise));
    emit(s, out_dir / *e.pose, render_pose(t.pose_profile, t.noise, kPoseRate, spec.skeleton, spec.camera_view));
    emit(s, out_dir / (t.trial_id + "_truth.json"), render_truth(t.profile, t.noise));
    manifest.trials.push_back(std::move(e));
  }
  emit(s, out_dir / "manifest.json", serialize_manifest(manifest));
  return s;
}

}  // namespace kinemetric
