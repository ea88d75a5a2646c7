#include "kinemetric/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "kinemetric/error.hpp"

namespace kinemetric {

using nlohmann::json;

namespace {

template <class T, class F>
T parse_enum(const json& j, std::string_view key, F parse) {
  if (!j.is_string()) throw InputError("config: " + std::string(key) + " must be a string");
  const auto s = j.get<std::string>();
  auto v = parse(s);
  if (!v) throw InputError("config: unknown " + std::string(key) + " '" + s + "'");
  return *v;
}

json sg_json(const std::optional<SgParams>& p) {
  if (!p) return nullptr;
  return {{"window", p->window}, {"order", p->order}};
}

std::optional<SgParams> sg_from(const json& j, std::string_view what) {
  if (j.is_null()) return std::nullopt;
  if (j.is_boolean() && !j.get<bool>()) return std::nullopt;
  if (!j.is_object()) throw InputError("config: smoothing." + std::string(what) + " must be an object or null");
  SgParams p;
  p.window = j.value("window", p.window);
  p.order = j.value("order", p.order);
  return p;
}

json recipe_json(const JointCenterRecipe& r) {
  if (const auto* m = std::get_if<MarkerRecipe>(&r)) return {{"marker", m->marker}};
  const auto& mid = std::get<MidpointRecipe>(r);
  return {{"midpoint", {mid.first, mid.second}}};
}

JointCenterRecipe recipe_from(const json& j) {
  if (j.is_string()) return MarkerRecipe{j.get<std::string>()};
  if (j.is_object() && j.contains("marker")) return MarkerRecipe{j.at("marker").get<std::string>()};
  if (j.is_object() && j.contains("midpoint") && j.at("midpoint").is_array() && j.at("midpoint").size() == 2)
    return MidpointRecipe{j.at("midpoint")[0].get<std::string>(), j.at("midpoint")[1].get<std::string>()};
  throw InputError("config: joint center recipe must be a marker name or {\"midpoint\": [a, b]}");
}

json side_json(const SideRecipes& s) {
  return {{"hip", recipe_json(s.hip)}, {"knee", recipe_json(s.knee)}, {"ankle", recipe_json(s.ankle)}};
}

void side_from(const json& j, SideRecipes& s) {
  if (j.contains("hip")) s.hip = recipe_from(j.at("hip"));
  if (j.contains("knee")) s.knee = recipe_from(j.at("knee"));
  if (j.contains("ankle")) s.ankle = recipe_from(j.at("ankle"));
}

std::string with_context(const std::string& trial_id, const std::string& what) {
  return "trial " + trial_id + ": " + what;
}

[[noreturn]] void rethrow_with(const std::string& trial_id, const Error& e) {
  if (e.kind() == ErrorKind::Degenerate) throw DegenerateError(with_context(trial_id, e.what()));
  throw InputError(with_context(trial_id, e.what()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

json to_json(const RunConfig& c) {
  json pairs = json::array();
  for (const auto& p : c.pairs) pairs.push_back({to_string(p.a), to_string(p.b)});
  json formats = json::array();
  for (const auto& f : c.formats) formats.push_back(f);
  json aliases = json::object();
  for (const auto& [k, v] : c.marker_aliases) aliases[k] = v;
  json out;
  out["target_rate"] = c.target_rate;
  out["smoothing"] = {{"mocap", sg_json(c.marker_sg)},
                      {"pose", sg_json(c.pose_sg)},
                      {"imu", sg_json(c.imu_sg)},
                      {"target", c.smooth_target == SmoothTarget::Coordinates ? "coordinates" : "angles"}};
  out["euler"] = {{"sequence", to_string(c.euler.sequence)},
                  {"flexion_index", c.euler.flexion_index},
                  {"sign", c.euler.sign}};
  out["imu_offset_deg"] = c.imu_offset_deg;
  out["alignment"] = {{"mode", c.align_mode == AlignMode::Auto ? "auto" : "manual"},
                      {"lag", c.manual_lag},
                      {"max_lag_seconds", c.max_lag_seconds}};
  out["pairs"] = pairs;
  out["formats"] = formats;
  out["metric"] = to_string(c.metric);
  out["marker_aliases"] = aliases;
  out["joint_centers"] = {{"left", side_json(c.joint_centers.left)}, {"right", side_json(c.joint_centers.right)}};
  out["mesh49_alias_file"] = c.mesh49_alias_file;
  out["bland_altman_difference"] = "a - b";
  out["angle_convention"] = "flexion_zero_extension";
  return out;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  RunConfig c;
  try {
    if (j.contains("target_rate")) c.target_rate = j.at("target_rate").get<double>();
    if (j.contains("smoothing")) {
      const auto& s = j.at("smoothing");
      if (s.contains("mocap")) c.marker_sg = sg_from(s.at("mocap"), "mocap");
      if (s.contains("pose")) c.pose_sg = sg_from(s.at("pose"), "pose");
      if (s.contains("imu")) c.imu_sg = sg_from(s.at("imu"), "imu");
      if (s.contains("target")) {
        const auto t = s.at("target").get<std::string>();
        if (t == "coordinates") c.smooth_target = SmoothTarget::Coordinates;
        else if (t == "angles") c.smooth_target = SmoothTarget::Angles;
        else throw InputError("config: unknown smoothing target '" + t + "'");
      }
    }
    if (j.contains("euler")) {
      const auto& e = j.at("euler");
      if (e.contains("sequence")) c.euler.sequence = parse_enum<EulerSequence>(e.at("sequence"), "euler sequence", parse_euler_sequence);
      c.euler.flexion_index = e.value("flexion_index", c.euler.flexion_index);
      c.euler.sign = e.value("sign", c.euler.sign);
    }
    c.imu_offset_deg = j.value("imu_offset_deg", c.imu_offset_deg);
    if (j.contains("alignment")) {
      const auto& a = j.at("alignment");
      if (a.contains("mode")) {
        const auto m = a.at("mode").get<std::string>();
        if (m == "auto") c.align_mode = AlignMode::Auto;
        else if (m == "manual") c.align_mode = AlignMode::Manual;
        else throw InputError("config: unknown alignment mode '" + m + "'");
      }
      c.manual_lag = a.value("lag", c.manual_lag);
      c.max_lag_seconds = a.value("max_lag_seconds", c.max_lag_seconds);
    }
    if (j.contains("pairs")) {
      c.pairs.clear();
      for (const auto& p : j.at("pairs")) {
        if (!p.is_array() || p.size() != 2) throw InputError("config: each pair must be [a, b]");
        c.pairs.push_back({parse_enum<Modality>(p[0], "modality", parse_modality),
                           parse_enum<Modality>(p[1], "modality", parse_modality)});
      }
    }
    if (j.contains("formats")) {
      c.formats.clear();
      for (const auto& f : j.at("formats")) c.formats.insert(f.get<std::string>());
    }
    if (j.contains("metric")) c.metric = parse_enum<Metric>(j.at("metric"), "metric", parse_metric);
    if (j.contains("marker_aliases")) c.marker_aliases = j.at("marker_aliases").get<NameAliases>();
    if (j.contains("joint_centers")) {
      const auto& jc = j.at("joint_centers");
      if (jc.contains("left")) side_from(jc.at("left"), c.joint_centers.left);
      if (jc.contains("right")) side_from(jc.at("right"), c.joint_centers.right);
    }
    c.mesh49_alias_file = j.value("mesh49_alias_file", c.mesh49_alias_file);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (auto v = validate(c)) throw InputError("config: " + *v);
  return c;
}

Violation validate(const RunConfig& c) {
  if (!(c.target_rate > 0.0) || !std::isfinite(c.target_rate)) return "target_rate must be positive";
  for (const auto& sg : {c.marker_sg, c.pose_sg, c.imu_sg})
    if (sg)
      if (auto v = validate(*sg)) return v;
  if (auto v = validate(c.euler)) return v;
  if (!std::isfinite(c.imu_offset_deg)) return "imu_offset_deg must be finite";
  if (!(c.max_lag_seconds >= 0.0) || !std::isfinite(c.max_lag_seconds)) return "max_lag_seconds must be >= 0";
  for (const auto& p : c.pairs)
    if (p.a == p.b) return "pair compares " + std::string(to_string(p.a)) + " with itself";
  for (const auto& f : c.formats)
    if (f != "csv" && f != "json" && f != "svg") return "unknown report format '" + f + "'";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

std::string default_trial_id(const TrialMeta& meta) {
  return meta.participant_id + "_" + std::string(to_string(meta.action)) + "_" +
         std::string(to_string(meta.clothing)) + "_r" + std::to_string(meta.repetition_index);
}

Manifest parse_manifest(std::string_view bytes, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::exception& e) {
    throw InputError(std::string("manifest: ") + e.what());
  }
  if (!j.is_object() || !j.contains("trials") || !j.at("trials").is_array())
    throw InputError("manifest: expected {\"trials\": [...]}");
  Manifest m;
  m.base_dir = base_dir;
  std::size_t index = 0;
  for (const auto& t : j.at("trials")) {
    const auto where = "manifest trial " + std::to_string(index++);
    if (!t.is_object()) throw InputError(where + ": expected an object");
    ManifestEntry e;
    try {
      e.meta.participant_id = t.at("participant_id").get<std::string>();
      e.meta.action = parse_enum<Action>(t.at("action"), "action", parse_action);
      e.meta.clothing = parse_enum<Clothing>(t.at("clothing"), "clothing", parse_clothing);
      e.meta.repetition_index = t.at("repetition_index").get<int>();
      for (auto [key, slot] : {std::pair{"markers", &e.markers}, {"imu", &e.imu}, {"pose", &e.pose}})
        if (t.contains(key) && !t.at(key).is_null()) *slot = t.at(key).get<std::string>();
      if (t.contains("lag") && !t.at("lag").is_null()) e.lag = t.at("lag").get<int>();
      e.trial_id = t.contains("trial_id") ? t.at("trial_id").get<std::string>() : default_trial_id(e.meta);
    } catch (const json::exception& ex) {
      throw InputError(where + ": " + ex.what());
    } catch (const InputError& ex) {
      throw InputError(where + ": " + ex.what());
    }
    if (auto v = validate(e.meta)) throw InputError(where + ": " + *v);
    m.trials.push_back(std::move(e));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

std::string serialize_manifest(const Manifest& m) {
  json trials = json::array();
  for (const auto& e : m.trials) {
    json t;
    t["trial_id"] = e.trial_id;
    t["participant_id"] = e.meta.participant_id;
    t["action"] = to_string(e.meta.action);
    t["clothing"] = to_string(e.meta.clothing);
    t["repetition_index"] = e.meta.repetition_index;
    if (e.markers) t["markers"] = *e.markers;
    if (e.imu) t["imu"] = *e.imu;
    if (e.pose) t["pose"] = *e.pose;
    if (e.lag) t["lag"] = *e.lag;
    trials.push_back(std::move(t));
  }
  return json{{"trials", trials}}.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Per-trial processing
// ---------------------------------------------------------------------------

TrialInputs load_trial(const ManifestEntry& entry, const std::filesystem::path& base_dir, const RunConfig& config) {
  TrialInputs in;
  in.meta = entry.meta;
  in.trial_id = entry.trial_id;
  in.lag = entry.lag;
  auto resolve = [&](const std::string& p) { return std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base_dir / p; };
  auto read = [&](const std::string& p) {
    const auto path = resolve(p);
    try {
      return read_file(path);
    } catch (const InputError&) {
      throw InputError(with_context(entry.trial_id, "missing file " + path.string()));
    }
  };
  try {
    if (entry.markers)
      in.markers = parse_marker_csv(read(*entry.markers), config.marker_aliases, entry.trial_id);
    if (entry.imu) in.imu = parse_imu_csv(read(*entry.imu), entry.trial_id).streams;
    if (entry.pose) {
      const auto bytes = read(*entry.pose);
      if (config.mesh49_alias_file.empty()) {
        in.pose = parse_pose_json(bytes);
      } else {
        const auto alias_path = std::filesystem::path(config.mesh49_alias_file);
        in.pose = parse_pose_json(bytes, load_alias_file(alias_path.string()));
      }
      in.pose->trial_id = entry.trial_id;
    }
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with("trial ")) throw;
    rethrow_with(entry.trial_id, e);
  }
  return in;
}

namespace {

JointCenterSeries smooth(const JointCenterSeries& j, const SgParams& p) {
  return {savitzky_golay(j.hip, p), savitzky_golay(j.knee, p), savitzky_golay(j.ankle, p)};
}

AngleSeries positional(const JointCenterSeries& joints, const std::optional<SgParams>& sg, SmoothTarget target,
                       AngleMethod method, Modality modality, Side side) {
  if (sg && target == SmoothTarget::Coordinates) return series_angles(smooth(joints, *sg), method, modality, side);
  auto a = series_angles(joints, method, modality, side);
  if (sg) a.series = savitzky_golay(a.series, *sg);
  return a;
}

const QuaternionStream* find_stream(const std::vector<QuaternionStream>& streams, Segment s) {
  for (const auto& q : streams)
    if (q.segment == s) return &q;
  return nullptr;
}

}  // namespace

TrialAngles compute_angles(const TrialInputs& in, const RunConfig& config, std::optional<Side> only) {
  TrialAngles out;
  out.meta = in.meta;
  out.trial_id = in.trial_id;
  out.lag = in.lag;
  try {
    for (const Side side : {Side::Left, Side::Right}) {
      if (only && side != *only) continue;
      if (in.markers) {
        const auto joints = joint_centers(*in.markers, config.joint_centers, side);
        out.series[{Modality::Mocap, side}] =
            positional(joints, config.marker_sg, config.smooth_target, AngleMethod::Cross, Modality::Mocap, side);
      }
      if (in.pose) {
        const auto modality = modality_of(in.pose->source);
        const auto joints = skeleton_joints(*in.pose, side);
        out.series[{modality, side}] =
            positional(joints, config.pose_sg, config.smooth_target, AngleMethod::Cosine, modality, side);
      }
      if (in.imu) {
        const auto* thigh = find_stream(*in.imu, thigh_segment(side));
        const auto* shank = find_stream(*in.imu, shank_segment(side));
        if (thigh && shank) {
          auto r = series_angles(*thigh, *shank, config.euler, side, config.imu_offset_deg);
          out.gimbal_warnings += r.gimbal_frames.size();
          // IMU streams are smoothed on the angle series: quaternion
          // components are not a linear space.
          if (config.imu_sg) r.angles.series = savitzky_golay(r.angles.series, *config.imu_sg);
          out.series[{Modality::Imu, side}] = std::move(r.angles);
        }
      }
    }
  } catch (const Error& e) {
    rethrow_with(in.trial_id, e);
  }
  if (in.pose) out.camera_view = in.pose->camera_view;
  return out;
}

namespace {

bool is_skeleton(Modality m) { return m == Modality::Pose33 || m == Modality::Mesh49; }

}  // namespace

TrialComparison compare_trial(const TrialAngles& angles, const RunConfig& config) {
  TrialComparison out;
  out.meta = angles.meta;
  out.trial_id = angles.trial_id;
  out.camera_view = angles.camera_view;
  try {
    std::map<std::pair<Modality, Side>, AngleSeries> resampled;
    for (const auto& [key, s] : angles.series) {
      AngleSeries r = s;
      r.series = resample(s.series, config.target_rate);
      out.biomarkers[key] = extract_biomarkers(r, angles.meta);
      resampled.emplace(key, std::move(r));
    }
    for (const auto& pair : config.pairs) {
      for (const Side side : {Side::Left, Side::Right}) {
        const auto ia = resampled.find({pair.a, side});
        const auto ib = resampled.find({pair.b, side});
        if (ia == resampled.end() || ib == resampled.end()) continue;
        const auto& ref = ia->second;
        const auto& tgt = ib->second;
        int lag = 0;
        if (angles.lag) {
          lag = *angles.lag;
        } else if (config.align_mode == AlignMode::Manual) {
          lag = config.manual_lag;
        } else {
          const auto min_len = static_cast<long long>(std::min(ref.series.size(), tgt.series.size()));
          const auto by_time = std::llround(config.max_lag_seconds * config.target_rate);
          const auto max_lag = static_cast<int>(std::max(0LL, std::min(by_time, min_len / 2)));
          lag = align(ref.series, tgt.series, max_lag).lag;
        }
        AngleSeries shifted = tgt;
        shifted.series = apply_lag(tgt.series, -lag);
        auto report = compare_pair(ref, shifted);
        report.lag = lag;
        out.pairs.push_back(std::move(report));
      }
    }
  } catch (const Error& e) {
    rethrow_with(angles.trial_id, e);
  }
  return out;
}

std::vector<PopulationRow> population_rows(const std::vector<TrialComparison>& trials, const RunConfig& config) {
  struct CellKey {
    std::size_t pair;
    Action action;
    Clothing clothing;
    std::optional<CameraView> view;
    Side side;
    auto operator<=>(const CellKey&) const = default;
  };
  std::set<CellKey> cells;
  for (const auto& t : trials)
    for (std::size_t p = 0; p < config.pairs.size(); ++p) {
      const auto& pair = config.pairs[p];
      const bool view_matters = is_skeleton(pair.a) || is_skeleton(pair.b);
      for (const Side side : {Side::Left, Side::Right})
        if (t.biomarkers.count({pair.a, side}) && t.biomarkers.count({pair.b, side}))
          cells.insert({p, t.meta.action, t.meta.clothing, view_matters ? t.camera_view : std::nullopt, side});
    }

  std::vector<PopulationRow> rows;
  for (const auto& cell : cells) {
    const auto& pair = config.pairs[cell.pair];
    std::vector<TrialComparison> subset;
    for (const auto& t : trials) {
      if (t.meta.clothing != cell.clothing) continue;
      if (cell.view && t.camera_view != cell.view) continue;
      subset.push_back(t);
    }
    PopulationRow row;
    row.action = cell.action;
    row.side = cell.side;
    row.metric = config.metric;
    row.pair = pair;
    row.clothing = cell.clothing;
    row.camera_view = cell.view;
    const auto v = population_vectors(subset, cell.action, Joint::Knee, cell.side, config.metric, pair);
    row.n = v.a.size();
    if (row.n < 2) {
      row.status = "insufficient data";
    } else {
      try {
        const auto r = population_tests(subset, cell.action, Joint::Knee, cell.side, config.metric, pair);
        row.ttest = r.ttest;
        row.r = r.pearson;
      } catch (const DegenerateError&) {
        row.status = "degenerate: zero-variance differences";
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kinemetric
