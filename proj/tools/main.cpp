// kinemetric command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kinemetric/kinemetric.h"

using nlohmann::json;

namespace {

constexpr int kExitDegenerate = 1;
constexpr int kExitInput = 2;

int exit_code(km_status s) {
  if (s == KM_OK) return 0;
  return s == KM_ERR_DEGENERATE ? kExitDegenerate : kExitInput;
}

int report(km_status s, const char* command) {
  if (s != KM_OK) std::cerr << "kinemetric " << command << ": " << km_last_error() << "\n";
  return exit_code(s);
}

struct RunOptions {
  std::string manifest;
  std::string out_dir;
  std::string config_file;
  std::string angles_dir;
  std::optional<double> target_rate;
  std::string align;
  std::vector<std::string> pairs;
  std::vector<std::string> formats;
  std::string euler;
  std::optional<double> imu_offset;
  std::string sg_mocap, sg_pose, sg_imu;
  std::string smooth_target;
  std::string metric;
  std::string mesh49_aliases;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_angles_dir) {
  cmd->add_option("-m,--manifest", o.manifest, "Trial manifest (JSON)")->required();
  cmd->add_option("-o,--out", o.out_dir, "Output directory")->required();
  cmd->add_option("-c,--config", o.config_file, "Run configuration (JSON); flags override it");
  if (with_angles_dir) cmd->add_option("--angles-dir", o.angles_dir, "Read angle CSVs from here instead of capture files");
  cmd->add_option("--target-rate", o.target_rate, "Common resampling rate in Hz (default 10)");
  cmd->add_option("--align", o.align, "auto | manual:<lag>");
  cmd->add_option("--pairs", o.pairs, "Modality pairs a:b (default pose33:imu pose33:mocap mocap:imu)")->delimiter(',');
  cmd->add_option("--formats", o.formats, "Report formats among json,csv,svg")->delimiter(',');
  cmd->add_option("--euler", o.euler, "IMU Euler config SEQ:index:sign (default XYZ:1:-1)");
  cmd->add_option("--imu-offset", o.imu_offset, "Static offset in degrees subtracted from IMU flexion");
  cmd->add_option("--sg-mocap", o.sg_mocap, "Marker smoothing window/order or 'none' (default 15/3)");
  cmd->add_option("--sg-pose", o.sg_pose, "Skeleton smoothing window/order or 'none' (default 5/1)");
  cmd->add_option("--sg-imu", o.sg_imu, "IMU angle smoothing window/order or 'none' (default none)");
  cmd->add_option("--smooth", o.smooth_target, "Smooth 'coordinates' (default) or 'angles'");
  cmd->add_option("--metric", o.metric, "Population metric: min, max or rom (default rom)");
  cmd->add_option("--mesh49-aliases", o.mesh49_aliases, "Alias table for 49-joint skeleton names");
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json sg_value(const std::string& s) {
  if (s == "none" || s == "off") return nullptr;
  const auto slash = s.find('/');
  if (slash == std::string::npos) throw std::runtime_error("smoothing must be window/order or none, got '" + s + "'");
  return {{"window", std::stoi(s.substr(0, slash))}, {"order", std::stoi(s.substr(slash + 1))}};
}

json config_json(const RunOptions& o) {
  json j = o.config_file.empty() ? json::object() : json::parse(slurp(o.config_file));
  if (o.target_rate) j["target_rate"] = *o.target_rate;
  if (!o.align.empty()) {
    if (o.align == "auto") {
      j["alignment"]["mode"] = "auto";
    } else if (o.align.rfind("manual:", 0) == 0) {
      j["alignment"]["mode"] = "manual";
      j["alignment"]["lag"] = std::stoi(o.align.substr(7));
    } else {
      throw std::runtime_error("--align must be auto or manual:<lag>");
    }
  }
  if (!o.pairs.empty()) {
    json pairs = json::array();
    for (const auto& p : o.pairs) {
      const auto colon = p.find(':');
      if (colon == std::string::npos) throw std::runtime_error("pair must be a:b, got '" + p + "'");
      pairs.push_back({p.substr(0, colon), p.substr(colon + 1)});
    }
    j["pairs"] = pairs;
  }
  if (!o.formats.empty()) j["formats"] = o.formats;
  if (!o.euler.empty()) {
    const auto a = o.euler.find(':'), b = o.euler.rfind(':');
    if (a == std::string::npos || a == b) throw std::runtime_error("--euler must be SEQ:index:sign");
    j["euler"] = {{"sequence", o.euler.substr(0, a)},
                  {"flexion_index", std::stoi(o.euler.substr(a + 1, b - a - 1))},
                  {"sign", std::stoi(o.euler.substr(b + 1))}};
  }
  if (o.imu_offset) j["imu_offset_deg"] = *o.imu_offset;
  if (!o.sg_mocap.empty()) j["smoothing"]["mocap"] = sg_value(o.sg_mocap);
  if (!o.sg_pose.empty()) j["smoothing"]["pose"] = sg_value(o.sg_pose);
  if (!o.sg_imu.empty()) j["smoothing"]["imu"] = sg_value(o.sg_imu);
  if (!o.smooth_target.empty()) j["smoothing"]["target"] = o.smooth_target;
  if (!o.metric.empty()) j["metric"] = o.metric;
  if (!o.mesh49_aliases.empty()) j["mesh49_alias_file"] = o.mesh49_aliases;
  return j;
}

struct ConfigDeleter {
  void operator()(km_config* c) const { km_config_free(c); }
};
using ConfigPtr = std::unique_ptr<km_config, ConfigDeleter>;

km_status make_config(const RunOptions& o, ConfigPtr& out) {
  json j;
  try {
    j = config_json(o);
  } catch (const std::exception& e) {
    std::cerr << "kinemetric: " << e.what() << "\n";
    return KM_ERR_INPUT;
  }
  km_config* raw = nullptr;
  const auto s = km_config_from_json(j.dump().c_str(), &raw);
  out.reset(raw);
  return s;
}

struct SynthOptions {
  std::string out_dir;
  std::string action = "sit_to_stand";
  double duration = 3.0;
  double min_angle = 10.0;
  double max_angle = 95.0;
  int repetitions = 1;
  std::optional<int> participants;
  std::vector<std::string> actions;
  std::string clothing = "mocap";
  std::uint64_t seed = 0;
  std::optional<double> marker_noise, quat_noise, pose_noise;
  bool no_noise = false;
  std::string skeleton = "pose33";
  std::string camera_view = "sagittal";
  std::string inflate;
};

int run_synth(SynthOptions o) {
  if (const char* env = std::getenv("KINEMETRIC_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      o.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument(env);
    } catch (const std::exception&) {
      std::cerr << "kinemetric synth: KINEMETRIC_SEED must be an unsigned integer\n";
      return kExitInput;
    }
  }
  json pop;
  pop["seed"] = o.seed;
  pop["clothing"] = o.clothing;
  pop["skeleton"] = o.skeleton;
  pop["camera_view"] = o.camera_view;
  json noise = json::object();
  if (o.no_noise) noise = {{"marker_noise_sd", 0.0}, {"quat_noise_sd", 0.0}, {"pose_noise_sd", 0.0}};
  if (o.marker_noise) noise["marker_noise_sd"] = *o.marker_noise;
  if (o.quat_noise) noise["quat_noise_sd"] = *o.quat_noise;
  if (o.pose_noise) noise["pose_noise_sd"] = *o.pose_noise;
  pop["noise"] = noise;
  if (!o.inflate.empty()) {
    const auto colon = o.inflate.find(':');
    if (colon == std::string::npos) {
      std::cerr << "kinemetric synth: --inflate must be modality:degrees\n";
      return kExitInput;
    }
    try {
      pop["rom_inflation"] = {{"modality", o.inflate.substr(0, colon)}, {"degrees", std::stod(o.inflate.substr(colon + 1))}};
    } catch (const std::exception&) {
      std::cerr << "kinemetric synth: --inflate degrees must be a number\n";
      return kExitInput;
    }
  }
  json request;
  if (o.participants) {
    pop["participants"] = *o.participants;
    if (!o.actions.empty()) pop["actions"] = o.actions;
    request["profile"] = nullptr;
  } else {
    request["profile"] = {{"action", o.action},
                          {"duration", o.duration},
                          {"min_angle", o.min_angle},
                          {"max_angle", o.max_angle},
                          {"repetitions", o.repetitions}};
  }
  request["population"] = pop;
  km_summary summary{};
  const auto s = km_cmd_synth(request.dump().c_str(), o.out_dir.c_str(), &summary);
  if (s == KM_OK) std::cout << "wrote " << summary.files_written << " files for " << summary.trials << " trial(s)\n";
  return report(s, "synth");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knee kinematics from markers, IMUs and pose skeletons, with modality agreement statistics"};
  app.set_version_flag("--version", std::string(km_version()));
  app.require_subcommand(1);

  RunOptions angles_opts, compare_opts, population_opts;
  auto* angles = app.add_subcommand("angles", "Write one knee-angle CSV per trial, modality and side");
  add_run_options(angles, angles_opts, false);
  auto* compare = app.add_subcommand("compare", "Agreement report (JSON), tables (CSV) and Bland-Altman plots (SVG)");
  add_run_options(compare, compare_opts, true);
  auto* population = app.add_subcommand("population", "Paired t-test and Pearson table across participants");
  add_run_options(population, population_opts, true);

  SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Render a synthetic trial or population to disk");
  synth->add_option("-o,--out", synth_opts.out_dir, "Output directory")->required();
  synth->add_option("--action", synth_opts.action, "Action of a single trial");
  synth->add_option("--duration", synth_opts.duration, "Seconds per trial");
  synth->add_option("--min", synth_opts.min_angle, "Minimum flexion (deg)");
  synth->add_option("--max", synth_opts.max_angle, "Maximum flexion (deg)");
  synth->add_option("--repetitions", synth_opts.repetitions, "Movement cycles within the trial");
  synth->add_option("--participants", synth_opts.participants, "Render a population of this many participants");
  synth->add_option("--actions", synth_opts.actions, "Population actions")->delimiter(',');
  synth->add_option("--clothing", synth_opts.clothing, "mocap or normal");
  synth->add_option("--seed", synth_opts.seed, "Noise seed (KINEMETRIC_SEED overrides)");
  synth->add_option("--marker-noise", synth_opts.marker_noise, "Marker noise SD (m)");
  synth->add_option("--quat-noise", synth_opts.quat_noise, "IMU orientation noise SD (deg)");
  synth->add_option("--pose-noise", synth_opts.pose_noise, "Skeleton landmark noise SD (m)");
  synth->add_flag("--no-noise", synth_opts.no_noise, "Zero all noise");
  synth->add_option("--skeleton", synth_opts.skeleton, "pose33 or mesh49");
  synth->add_option("--camera-view", synth_opts.camera_view, "frontal, sagittal or unknown");
  synth->add_option("--inflate", synth_opts.inflate, "modality:degrees added to that modality's peak flexion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (*synth) return run_synth(synth_opts);

  ConfigPtr config;
  km_summary summary{};
  if (*angles) {
    if (auto s = make_config(angles_opts, config); s != KM_OK) return report(s, "angles");
    const auto s = km_cmd_angles(config.get(), angles_opts.manifest.c_str(), angles_opts.out_dir.c_str(), &summary);
    if (s == KM_OK) std::cout << "wrote " << summary.files_written << " angle files for " << summary.trials << " trial(s)\n";
    return report(s, "angles");
  }
  if (*compare) {
    if (auto s = make_config(compare_opts, config); s != KM_OK) return report(s, "compare");
    const auto s = km_cmd_compare(config.get(), compare_opts.manifest.c_str(), compare_opts.out_dir.c_str(),
                                  compare_opts.angles_dir.c_str(), &summary);
    if (s == KM_OK) std::cout << "compared " << summary.trials << " trial(s), wrote " << summary.files_written << " files\n";
    return report(s, "compare");
  }
  if (auto s = make_config(population_opts, config); s != KM_OK) return report(s, "population");
  const auto s = km_cmd_population(config.get(), population_opts.manifest.c_str(), population_opts.out_dir.c_str(),
                                   population_opts.angles_dir.c_str(), &summary);
  if (s == KM_OK) std::cout << "population table over " << summary.trials << " trial(s)\n";
  return report(s, "population");
}
