#include "kinemetric/kinemetric.h"

#include <cstdlib>
#include <cstring>
#include <variant>

#include "kinemetric/error.hpp"
#include "kinemetric/pipeline.hpp"

using namespace kinemetric;
using nlohmann::json;

struct km_config {
  RunConfig config;
};

struct km_capture {
  std::variant<MarkerTrajectorySet, std::vector<QuaternionStream>, SkeletonSequence> data;
};

namespace {

thread_local std::string g_last_error;

km_status fail(km_status s, std::string msg) {
  g_last_error = std::move(msg);
  return s;
}

struct InvalidArgument : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
km_status checked(F fn) {
  try {
    g_last_error.clear();
    fn();
    return KM_OK;
  } catch (const InvalidArgument& e) {
    return fail(KM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const DegenerateError& e) {
    return fail(KM_ERR_DEGENERATE, e.what());
  } catch (const Error& e) {
    return fail(KM_ERR_INPUT, e.what());
  } catch (const json::exception& e) {
    return fail(KM_ERR_INPUT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KM_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (!p) throw InvalidArgument(std::string(name) + " is null");
}

Point3 pt(const double* v) { return {v[0], v[1], v[2]}; }
Quaternion quat(const double* v, const char* name) {
  const Quaternion q{v[0], v[1], v[2], v[3]};
  if (auto bad = validate(q)) throw InvalidArgument(std::string(name) + ": " + *bad);
  return q;
}

Side side_of(int side) {
  if (side == 0) return Side::Left;
  if (side == 1) return Side::Right;
  throw InvalidArgument("side must be 0 (left) or 1 (right)");
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void copy_out(const std::vector<double>& v, double* out, std::size_t capacity, std::size_t* out_n) {
  need(out_n, "out_n");
  *out_n = v.size();
  if (capacity < v.size()) throw InvalidArgument("buffer too small: need " + std::to_string(v.size()));
  if (!v.empty()) need(out, "out");
  std::copy(v.begin(), v.end(), out);
}

void fill(km_summary* s, const CommandSummary& c) {
  if (s) *s = {c.trials, c.written.size()};
}

std::filesystem::path opt_path(const char* p) { return (p && *p) ? std::filesystem::path(p) : std::filesystem::path(); }

template <class T, class F>
T enum_field(const json& j, const char* key, F parse, T fallback) {
  if (!j.contains(key)) return fallback;
  const auto s = j.at(key).get<std::string>();
  auto v = parse(s);
  if (!v) throw InputError(std::string("synth: unknown ") + key + " '" + s + "'");
  return *v;
}

SynthRequest synth_request_from_json(const json& j) {
  SynthRequest r;
  const json pop = j.value("population", json::object());
  auto& spec = r.population;
  spec.participants = pop.value("participants", spec.participants);
  if (pop.contains("actions")) {
    spec.actions.clear();
    for (const auto& a : pop.at("actions")) {
      auto v = parse_action(a.get<std::string>());
      if (!v) throw InputError("synth: unknown action '" + a.get<std::string>() + "'");
      spec.actions.push_back(*v);
    }
  }
  if (pop.contains("repetitions"))
    for (const auto& [k, v] : pop.at("repetitions").items()) {
      auto a = parse_action(k);
      if (!a) throw InputError("synth: unknown action '" + k + "'");
      spec.repetitions[*a] = v.get<int>();
    }
  spec.clothing = enum_field(pop, "clothing", parse_clothing, spec.clothing);
  spec.seed = pop.value("seed", spec.seed);
  spec.skeleton = enum_field(pop, "skeleton", parse_skeleton_source, spec.skeleton);
  spec.camera_view = enum_field(pop, "camera_view", parse_camera_view, spec.camera_view);
  spec.noise = default_noise(spec.seed);
  if (pop.contains("noise")) {
    const auto& n = pop.at("noise");
    spec.noise.marker_noise_sd = n.value("marker_noise_sd", spec.noise.marker_noise_sd);
    spec.noise.quat_noise_sd = n.value("quat_noise_sd", spec.noise.quat_noise_sd);
    spec.noise.pose_noise_sd = n.value("pose_noise_sd", spec.noise.pose_noise_sd);
  }
  if (pop.contains("rom_inflation") && !pop.at("rom_inflation").is_null()) {
    const auto& inf = pop.at("rom_inflation");
    spec.rom_inflation = std::pair{enum_field(inf, "modality", parse_modality, Modality::Imu),
                                   inf.at("degrees").get<double>()};
  }
  if (j.contains("profile") && !j.at("profile").is_null()) {
    const auto& p = j.at("profile");
    MotionProfile m;
    m.action = enum_field(p, "action", parse_action, m.action);
    m.duration = p.value("duration", m.duration);
    m.min_angle = p.value("min_angle", m.min_angle);
    m.max_angle = p.value("max_angle", m.max_angle);
    m.repetitions = p.value("repetitions", m.repetitions);
    r.profile = m;
  }
  return r;
}

}  // namespace

extern "C" {

const char* km_version(void) { return "0.1.0"; }
const char* km_last_error(void) { return g_last_error.c_str(); }
void km_free_string(char* s) { std::free(s); }

km_status km_angle_cross(const double hip[3], const double knee[3], const double ankle[3], double* out_deg) {
  return checked([&] {
    need(hip, "hip"), need(knee, "knee"), need(ankle, "ankle"), need(out_deg, "out_deg");
    *out_deg = angle_cross(pt(hip), pt(knee), pt(ankle));
  });
}

km_status km_angle_cosine(const double hip[3], const double knee[3], const double ankle[3], double* out_deg) {
  return checked([&] {
    need(hip, "hip"), need(knee, "knee"), need(ankle, "ankle"), need(out_deg, "out_deg");
    *out_deg = angle_cosine(pt(hip), pt(knee), pt(ankle));
  });
}

km_status km_to_canonical(double raw_deg, km_angle_method method, double* out_deg) {
  return checked([&] {
    need(out_deg, "out_deg");
    if (method != KM_METHOD_CROSS && method != KM_METHOD_COSINE) throw InvalidArgument("unknown angle method");
    *out_deg = to_canonical(raw_deg, method == KM_METHOD_CROSS ? AngleMethod::Cross : AngleMethod::Cosine);
  });
}

km_status km_relative_quaternion(const double thigh[4], const double shank[4], double out[4]) {
  return checked([&] {
    need(thigh, "thigh"), need(shank, "shank"), need(out, "out");
    const auto q = relative_quaternion(quat(thigh, "thigh"), quat(shank, "shank"));
    out[0] = q.w, out[1] = q.x, out[2] = q.y, out[3] = q.z;
  });
}

km_status km_quat_to_flexion(const double q[4], const char* sequence, int flexion_index, int sign, double* out_deg,
                             int* gimbal_warning) {
  return checked([&] {
    need(q, "q"), need(out_deg, "out_deg");
    EulerConfig cfg;
    if (sequence) {
      auto s = parse_euler_sequence(sequence);
      if (!s) throw InvalidArgument(std::string("unknown Euler sequence '") + sequence + "'");
      cfg.sequence = *s;
    }
    cfg.flexion_index = flexion_index;
    cfg.sign = sign;
    if (auto v = validate(cfg)) throw InvalidArgument(*v);
    const auto f = quat_to_flexion(quat(q, "q"), cfg);
    *out_deg = f.degrees;
    if (gimbal_warning) *gimbal_warning = f.gimbal_warning ? 1 : 0;
  });
}

km_status km_savgol(const double* values, size_t n, int window, int order, double* out) {
  return checked([&] {
    need(values, "values"), need(out, "out");
    const auto r = savitzky_golay(std::span<const double>(values, n), SgParams{window, order});
    std::copy(r.begin(), r.end(), out);
  });
}

km_status km_resample(const double* values, size_t n, double rate, double target_rate, double* out, size_t capacity,
                      size_t* out_n) {
  return checked([&] {
    need(values, "values");
    ScalarSeries s{0.0, rate, std::vector<double>(values, values + n)};
    if (auto v = validate(s)) throw InputError(*v);
    copy_out(resample(s, target_rate).samples, out, capacity, out_n);
  });
}

km_status km_align(const double* reference, size_t n_reference, const double* target, size_t n_target, int max_lag,
                   int* lag, double* peak_correlation) {
  return checked([&] {
    need(reference, "reference"), need(target, "target"), need(lag, "lag");
    const ScalarSeries r{0.0, 1.0, std::vector<double>(reference, reference + n_reference)};
    const ScalarSeries t{0.0, 1.0, std::vector<double>(target, target + n_target)};
    const auto a = align(r, t, max_lag);
    *lag = a.lag;
    if (peak_correlation) *peak_correlation = a.peak_correlation;
  });
}

km_status km_bland_altman_stats(const double* a, const double* b, size_t n, km_bland_altman* out) {
  return checked([&] {
    need(a, "a"), need(b, "b"), need(out, "out");
    const auto r = bland_altman(std::span<const double>(a, n), std::span<const double>(b, n));
    *out = {r.bias, r.sd_diff, r.loa_low, r.loa_high, r.n};
  });
}

km_status km_mae(const double* y, const double* y_hat, size_t n, double* out) {
  return checked([&] {
    need(y, "y"), need(y_hat, "y_hat"), need(out, "out");
    *out = mae(std::span<const double>(y, n), std::span<const double>(y_hat, n));
  });
}

km_status km_mse_signed(const double* y, const double* y_hat, size_t n, double* out) {
  return checked([&] {
    need(y, "y"), need(y_hat, "y_hat"), need(out, "out");
    *out = mse_signed(std::span<const double>(y, n), std::span<const double>(y_hat, n));
  });
}

km_status km_pearson(const double* x, const double* y, size_t n, double* out) {
  return checked([&] {
    need(x, "x"), need(y, "y"), need(out, "out");
    *out = pearson(std::span<const double>(x, n), std::span<const double>(y, n));
  });
}

km_status km_paired_t_test(const double* x, const double* y, size_t n, double* t, int* df, double* p) {
  return checked([&] {
    need(x, "x"), need(y, "y"), need(t, "t"), need(df, "df"), need(p, "p");
    const auto r = paired_t_test(std::span<const double>(x, n), std::span<const double>(y, n));
    *t = r.t, *df = r.df, *p = r.p;
  });
}

km_status km_t_cdf(double t, int df, double* out) {
  return checked([&] {
    need(out, "out");
    *out = t_cdf(t, df);
  });
}

km_status km_config_new(km_config** out) {
  return checked([&] {
    need(out, "out");
    *out = new km_config{};
  });
}

km_status km_config_from_json(const char* text, km_config** out) {
  return checked([&] {
    need(text, "json"), need(out, "out");
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw InputError(std::string("config: ") + e.what());
    }
    *out = new km_config{config_from_json(j)};
  });
}

km_status km_config_to_json(const km_config* config, char** out_json) {
  return checked([&] {
    need(config, "config"), need(out_json, "out_json");
    *out_json = dup(to_json(config->config).dump(2));
  });
}

void km_config_free(km_config* config) { delete config; }

km_status km_capture_parse_markers(const char* bytes, size_t len, const km_config* config, km_capture** out) {
  return checked([&] {
    need(bytes, "bytes"), need(out, "out");
    const NameAliases aliases = config ? config->config.marker_aliases : NameAliases{};
    *out = new km_capture{parse_marker_csv(std::string_view(bytes, len), aliases)};
  });
}

km_status km_capture_parse_imu(const char* bytes, size_t len, km_capture** out) {
  return checked([&] {
    need(bytes, "bytes"), need(out, "out");
    *out = new km_capture{parse_imu_csv(std::string_view(bytes, len)).streams};
  });
}

km_status km_capture_parse_pose(const char* bytes, size_t len, const km_config* config, km_capture** out) {
  return checked([&] {
    need(bytes, "bytes"), need(out, "out");
    const std::string_view view(bytes, len);
    if (config && !config->config.mesh49_alias_file.empty())
      *out = new km_capture{parse_pose_json(view, load_alias_file(config->config.mesh49_alias_file))};
    else
      *out = new km_capture{parse_pose_json(view)};
  });
}

km_status km_capture_rate(const km_capture* capture, double* out_rate) {
  return checked([&] {
    need(capture, "capture"), need(out_rate, "out_rate");
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, std::vector<QuaternionStream>>)
            *out_rate = d.empty() ? 0.0 : d.front().rate;
          else
            *out_rate = d.rate;
        },
        capture->data);
  });
}

km_status km_capture_frames(const km_capture* capture, size_t* out_frames) {
  return checked([&] {
    need(capture, "capture"), need(out_frames, "out_frames");
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, MarkerTrajectorySet>)
            *out_frames = d.frame_count();
          else if constexpr (std::is_same_v<T, SkeletonSequence>)
            *out_frames = d.frames.size();
          else
            *out_frames = d.empty() ? 0 : d.front().samples.size();
        },
        capture->data);
  });
}

km_status km_capture_knee_angles(const km_capture* capture, const km_config* config, int side, double* out,
                                 size_t capacity, size_t* out_n) {
  return checked([&] {
    need(capture, "capture");
    const RunConfig cfg = config ? config->config : RunConfig{};
    const Side s = side_of(side);
    TrialInputs in;
    in.trial_id = "capture";
    Modality m = Modality::Mocap;
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, MarkerTrajectorySet>) {
            in.markers = d;
          } else if constexpr (std::is_same_v<T, SkeletonSequence>) {
            in.pose = d;
            m = modality_of(d.source);
          } else {
            in.imu = d;
            m = Modality::Imu;
          }
        },
        capture->data);
    const auto angles = compute_angles(in, cfg, s);
    const auto it = angles.series.find({m, s});
    if (it == angles.series.end()) throw InputError("capture has no " + std::string(to_string(s)) + " knee data");
    copy_out(it->second.series.samples, out, capacity, out_n);
  });
}

void km_capture_free(km_capture* capture) { delete capture; }

km_status km_cmd_angles(const km_config* config, const char* manifest, const char* out_dir, km_summary* summary) {
  return checked([&] {
    need(config, "config"), need(manifest, "manifest"), need(out_dir, "out_dir");
    fill(summary, run_angles(config->config, manifest, out_dir));
  });
}

km_status km_cmd_compare(const km_config* config, const char* manifest, const char* out_dir, const char* angles_dir,
                         km_summary* summary) {
  return checked([&] {
    need(config, "config"), need(manifest, "manifest"), need(out_dir, "out_dir");
    fill(summary, run_compare(config->config, manifest, out_dir, opt_path(angles_dir)));
  });
}

km_status km_cmd_population(const km_config* config, const char* manifest, const char* out_dir,
                            const char* angles_dir, km_summary* summary) {
  return checked([&] {
    need(config, "config"), need(manifest, "manifest"), need(out_dir, "out_dir");
    fill(summary, run_population(config->config, manifest, out_dir, opt_path(angles_dir)));
  });
}

km_status km_cmd_synth(const char* request_json, const char* out_dir, km_summary* summary) {
  return checked([&] {
    need(request_json, "request_json"), need(out_dir, "out_dir");
    json j;
    try {
      j = json::parse(request_json);
    } catch (const json::exception& e) {
      throw InputError(std::string("synth request: ") + e.what());
    }
    fill(summary, run_synth(synth_request_from_json(j), out_dir));
  });
}

}  // extern "C"
