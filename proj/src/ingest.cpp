#include "kinemetric/ingest.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kinemetric/error.hpp"
#include "text.hpp"

namespace kinemetric {

namespace {

using json = nlohmann::json;

std::map<std::string, std::string> parse_header_line(std::string_view line, const char* what) {
  if (line.empty() || line.front() != '#') throw InputError(std::string(what) + ": malformed header, expected '#rate=...'");
  line.remove_prefix(1);
  std::map<std::string, std::string> kv;
  for (auto item : text::split(line, ',')) {
    item = text::trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw InputError(std::string(what) + ": malformed header entry '" + std::string(item) + "'");
    kv.emplace(std::string(text::trim(item.substr(0, eq))), std::string(text::trim(item.substr(eq + 1))));
  }
  return kv;
}

double header_rate(const std::map<std::string, std::string>& kv, const char* what) {
  const auto it = kv.find("rate");
  if (it == kv.end()) throw InputError(std::string(what) + ": malformed header, missing rate");
  const auto rate = text::parse_double(it->second);
  if (!rate || !(*rate > 0.0) || !std::isfinite(*rate))
    throw InputError(std::string(what) + ": malformed header, rate must be a positive number");
  return *rate;
}

std::string row_error(const char* what, std::size_t row, const std::string& msg) {
  return std::string(what) + ": row " + std::to_string(row) + ": " + msg;
}

// Fills runs of NaN by linear interpolation between the bracketing samples;
// runs touching either end hold the nearest observed value.
void fill_gaps(std::vector<double>& col, const std::string& label) {
  const std::size_t n = col.size();
  std::size_t i = 0;
  bool any = false;
  for (double v : col) any = any || !std::isnan(v);
  if (!any) throw InputError("marker CSV: column " + label + " has no samples");
  while (i < n) {
    if (!std::isnan(col[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && std::isnan(col[j])) ++j;
    const std::size_t len = j - i;
    if (len > kMaxGapFrames)
      throw InputError("marker CSV: gap exceeds limit: " + std::to_string(len) + " frames in " + label +
                       " starting at frame " + std::to_string(i));
    if (i == 0) {
      for (std::size_t k = i; k < j; ++k) col[k] = col[j];
    } else if (j == n) {
      for (std::size_t k = i; k < j; ++k) col[k] = col[i - 1];
    } else {
      const double a = col[i - 1], b = col[j];
      const double span = static_cast<double>(len + 1);
      for (std::size_t k = i; k < j; ++k) {
        const double t = static_cast<double>(k - i + 1) / span;
        col[k] = a + (b - a) * t;
      }
    }
    i = j;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Marker CSV
// ---------------------------------------------------------------------------

MarkerTrajectorySet parse_marker_csv(std::string_view bytes, const NameAliases& aliases,
                                     const std::string& trial_id) {
  const auto rows = text::lines(bytes);
  if (rows.size() < 2) throw InputError("marker CSV: malformed header, expected rate line and column line");

  const auto kv = parse_header_line(rows[0], "marker CSV");
  MarkerFileHeader header;
  header.rate = header_rate(kv, "marker CSV");
  const auto unit_it = kv.find("unit");
  if (unit_it == kv.end()) throw InputError("marker CSV: malformed header, missing unit");
  if (unit_it->second == "mm")
    header.unit = LengthUnit::Millimeters;
  else if (unit_it->second == "m")
    header.unit = LengthUnit::Meters;
  else
    throw InputError("marker CSV: unknown unit '" + unit_it->second + "'");

  const auto cols = text::split(rows[1], ',');
  if (cols.empty() || text::trim(cols[0]) != "time" || (cols.size() - 1) % 3 != 0)
    throw InputError("marker CSV: malformed header, expected time followed by x/y/z column triples");
  std::set<std::string> seen;
  for (std::size_t c = 1; c < cols.size(); c += 3) {
    const auto cx = text::trim(cols[c]);
    if (cx.size() < 3 || cx.substr(cx.size() - 2) != "_x")
      throw InputError("marker CSV: malformed header column '" + std::string(cx) + "'");
    std::string label(cx.substr(0, cx.size() - 2));
    if (text::trim(cols[c + 1]) != label + "_y" || text::trim(cols[c + 2]) != label + "_z")
      throw InputError("marker CSV: malformed header, columns for " + label + " must be _x,_y,_z");
    if (const auto it = aliases.find(label); it != aliases.end()) label = it->second;
    if (!seen.insert(label).second) throw InputError("marker CSV: malformed header, duplicate marker " + label);
    header.marker_names.push_back(label);
  }

  const std::size_t n_markers = header.marker_names.size();
  const std::size_t n_frames = rows.size() - 2;
  if (n_frames == 0) throw InputError("marker CSV: no frames");
  std::vector<std::vector<double>> columns(3 * n_markers, std::vector<double>(n_frames));
  double start_time = 0.0;
  const double scale = header.unit == LengthUnit::Millimeters ? 1e-3 : 1.0;

  for (std::size_t r = 0; r < n_frames; ++r) {
    const auto cells = text::split(rows[r + 2], ',');
    if (cells.size() != cols.size())
      throw InputError(row_error("marker CSV", r, "non-uniform row count: expected " +
                                                      std::to_string(cols.size()) + " cells, got " +
                                                      std::to_string(cells.size())));
    const auto t = text::parse_double(cells[0]);
    if (!t) throw InputError(row_error("marker CSV", r, "bad time value"));
    if (r == 0) start_time = *t;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (text::trim(cells[c]).empty()) {
        columns[c - 1][r] = std::nan("");
        continue;
      }
      const auto v = text::parse_double(cells[c]);
      if (!v || !std::isfinite(*v))
        throw InputError(row_error("marker CSV", r, "bad value '" + std::string(cells[c]) + "'"));
      columns[c - 1][r] = *v;
    }
  }
  for (std::size_t c = 0; c < columns.size(); ++c)
    fill_gaps(columns[c], header.marker_names[c / 3] + "_" + "xyz"[c % 3]);

  MarkerTrajectorySet set;
  set.trial_id = trial_id;
  set.rate = header.rate;
  set.order = header.marker_names;
  for (std::size_t m = 0; m < n_markers; ++m) {
    TimeSeries<Point3> s;
    s.start_time = start_time;
    s.rate = header.rate;
    s.samples.resize(n_frames);
    for (std::size_t r = 0; r < n_frames; ++r)
      s.samples[r] = {columns[3 * m][r] * scale, columns[3 * m + 1][r] * scale, columns[3 * m + 2][r] * scale};
    set.markers.emplace(header.marker_names[m], std::move(s));
  }
  return set;
}

std::string serialize_marker_csv(const MarkerTrajectorySet& set, LengthUnit unit, const std::string& comment) {
  const double scale = unit == LengthUnit::Millimeters ? 1e3 : 1.0;
  std::vector<std::string> order = set.order;
  if (order.empty())
    for (const auto& [name, _] : set.markers) order.push_back(name);

  std::ostringstream out;
  out << "#rate=" << text::format_double(set.rate) << ",unit=" << (unit == LengthUnit::Millimeters ? "mm" : "m");
  if (!comment.empty()) out << ',' << comment;
  out << "\ntime";
  for (const auto& name : order) out << ',' << name << "_x," << name << "_y," << name << "_z";
  out << '\n';

  const std::size_t n = set.frame_count();
  const double start = n ? set.markers.at(order.front()).start_time : 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    out << text::format_double(start + static_cast<double>(r) / set.rate);
    for (const auto& name : order) {
      const auto& p = set.markers.at(name).samples[r];
      out << ',' << text::format_double(p.x * scale) << ',' << text::format_double(p.y * scale) << ','
          << text::format_double(p.z * scale);
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// IMU CSV
// ---------------------------------------------------------------------------

ImuParseResult parse_imu_csv(std::string_view bytes, const std::string& trial_id) {
  const auto rows = text::lines(bytes);
  if (rows.size() < 2) throw InputError("IMU CSV: malformed header, expected rate line and column line");
  const double rate = header_rate(parse_header_line(rows[0], "IMU CSV"), "IMU CSV");

  const auto cols = text::split(rows[1], ',');
  if (cols.empty() || text::trim(cols[0]) != "time" || (cols.size() - 1) % 4 != 0)
    throw InputError("IMU CSV: malformed header, expected time followed by qw/qx/qy/qz column groups");
  std::vector<Segment> segments;
  for (std::size_t c = 1; c < cols.size(); c += 4) {
    const auto cw = text::trim(cols[c]);
    if (cw.size() < 4 || cw.substr(cw.size() - 3) != "_qw")
      throw InputError("IMU CSV: malformed header column '" + std::string(cw) + "'");
    const std::string label(cw.substr(0, cw.size() - 3));
    const auto seg = parse_segment(label);
    if (!seg) throw InputError("IMU CSV: unknown segment label '" + label + "'");
    for (int k = 1; k < 4; ++k)
      if (text::trim(cols[c + k]) != label + "_q" + "wxyz"[k])
        throw InputError("IMU CSV: malformed header, columns for " + label + " must be _qw,_qx,_qy,_qz");
    for (Segment s : segments)
      if (s == *seg) throw InputError("IMU CSV: duplicate segment " + label);
    segments.push_back(*seg);
  }

  const std::size_t n_rows = rows.size() - 2;
  if (n_rows == 0) throw InputError("IMU CSV: no samples");
  ImuParseResult result;
  for (Segment s : segments) {
    QuaternionStream qs;
    qs.trial_id = trial_id;
    qs.segment = s;
    qs.rate = rate;
    qs.samples.rate = rate;
    qs.samples.samples.reserve(n_rows);
    result.streams.push_back(std::move(qs));
  }

  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto cells = text::split(rows[r + 2], ',');
    if (cells.size() != cols.size())
      throw InputError(row_error("IMU CSV", r, "non-uniform row count"));
    const auto t = text::parse_double(cells[0]);
    if (!t) throw InputError(row_error("IMU CSV", r, "bad time value"));
    for (std::size_t g = 0; g < segments.size(); ++g) {
      double q[4];
      for (int k = 0; k < 4; ++k) {
        const auto v = text::parse_double(cells[1 + 4 * g + k]);
        if (!v || !std::isfinite(*v)) throw InputError(row_error("IMU CSV", r, "bad quaternion component"));
        q[k] = *v;
      }
      const Quaternion raw{q[0], q[1], q[2], q[3]};
      const double n = raw.norm();
      if (!(n > 0.0))
        throw InputError(row_error("IMU CSV", r, "zero-norm quaternion for " + std::string(to_string(segments[g]))));
      if (std::abs(n - 1.0) > 0.01) ++result.warning_count;
      auto& stream = result.streams[g];
      if (r == 0) stream.samples.start_time = *t;
      stream.samples.samples.push_back(raw.normalized());
    }
  }
  return result;
}

std::string serialize_imu_csv(const std::vector<QuaternionStream>& streams, const std::string& comment) {
  if (streams.empty()) throw InputError("IMU CSV: nothing to serialize");
  const double rate = streams.front().rate;
  const std::size_t n = streams.front().samples.size();
  for (const auto& s : streams)
    if (s.rate != rate || s.samples.size() != n)
      throw InputError("IMU CSV: streams must share rate and length");

  std::ostringstream out;
  out << "#rate=" << text::format_double(rate);
  if (!comment.empty()) out << ',' << comment;
  out << "\ntime";
  for (const auto& s : streams) {
    const auto label = to_string(s.segment);
    out << ',' << label << "_qw," << label << "_qx," << label << "_qy," << label << "_qz";
  }
  out << '\n';
  const double start = streams.front().samples.start_time;
  for (std::size_t r = 0; r < n; ++r) {
    out << text::format_double(start + static_cast<double>(r) / rate);
    for (const auto& s : streams) {
      const auto& q = s.samples.samples[r];
      out << ',' << text::format_double(q.w) << ',' << text::format_double(q.x) << ','
          << text::format_double(q.y) << ',' << text::format_double(q.z);
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Pose JSON
// ---------------------------------------------------------------------------

const NameAliases& default_mesh49_aliases() {
  // Keep in sync with data/mesh49_aliases.json.
  static const NameAliases table{
      {"Left Hip", "left_hip"},     {"Left Knee", "left_knee"},     {"Left Ankle", "left_ankle"},
      {"Right Hip", "right_hip"},   {"Right Knee", "right_knee"},   {"Right Ankle", "right_ankle"},
      {"Left Shoulder", "left_shoulder"}, {"Right Shoulder", "right_shoulder"},
      {"Left Elbow", "left_elbow"}, {"Right Elbow", "right_elbow"},
      {"Left Wrist", "left_wrist"}, {"Right Wrist", "right_wrist"},
      {"OP LBigToe", "left_foot_index"}, {"OP RBigToe", "right_foot_index"},
      {"OP LHeel", "left_heel"},    {"OP RHeel", "right_heel"},
      {"Pelvis (MPII)", "pelvis"}};
  return table;
}

NameAliases load_alias_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open alias file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("alias file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw InputError("alias file " + path + ": expected a JSON object");
  NameAliases out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key().rfind("_", 0) == 0) continue;  // "_comment" style keys
    if (!it.value().is_string()) throw InputError("alias file " + path + ": value for " + it.key() + " is not a string");
    out.emplace(it.key(), it.value().get<std::string>());
  }
  return out;
}

SkeletonSequence parse_pose_json(std::string_view bytes, const NameAliases& mesh49_aliases) {
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw InputError(std::string("pose JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("pose JSON: expected an object");

  SkeletonSequence seq;
  try {
    if (j.contains("trial_id")) seq.trial_id = j.at("trial_id").get<std::string>();
    const auto source_tag = j.at("source").get<std::string>();
    const auto source = parse_skeleton_source(source_tag);
    if (!source) throw InputError("pose JSON: unknown source tag '" + source_tag + "'");
    seq.source = *source;
    seq.rate = j.at("rate").get<double>();
    if (!(seq.rate > 0.0) || !std::isfinite(seq.rate)) throw InputError("pose JSON: rate must be positive");
    seq.start_time = j.value("start_time", 0.0);
    const auto view_tag = j.value("camera_view", std::string("unknown"));
    const auto view = parse_camera_view(view_tag);
    if (!view) throw InputError("pose JSON: unknown camera_view '" + view_tag + "'");
    seq.camera_view = *view;

    const auto& frames = j.at("frames");
    if (!frames.is_array() || frames.empty()) throw InputError("pose JSON: frames must be a non-empty array");
    const std::size_t limit = seq.source == SkeletonSource::Pose33 ? 33 : 49;
    const NameAliases* aliases = seq.source == SkeletonSource::Mesh49 ? &mesh49_aliases : nullptr;
    seq.frames.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const auto& jf = frames[f];
      if (!jf.is_object()) throw InputError("pose JSON: frame " + std::to_string(f) + " is not an object");
      if (jf.size() > limit)
        throw InputError("pose JSON: frame " + std::to_string(f) + " has " + std::to_string(jf.size()) +
                         " landmarks, more than " + std::to_string(limit) + " allowed for " + source_tag);
      SkeletonFrame frame;
      for (auto it = jf.begin(); it != jf.end(); ++it) {
        const auto& v = it.value();
        if (!v.is_array() || v.size() != 3)
          throw InputError("pose JSON: frame " + std::to_string(f) + " landmark " + it.key() + " must be [x,y,z]");
        const Point3 p{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        if (validate(p))
          throw InputError("pose JSON: frame " + std::to_string(f) + " landmark " + it.key() + " not finite");
        std::string name = it.key();
        if (aliases) {
          if (const auto a = aliases->find(name); a != aliases->end()) name = a->second;
        }
        if (!frame.emplace(name, p).second)
          throw InputError("pose JSON: frame " + std::to_string(f) + " maps two landmarks onto " + name);
      }
      for (Side side : {Side::Left, Side::Right})
        for (Joint jt : {Joint::Hip, Joint::Knee, Joint::Ankle})
          if (!frame.count(landmark_name(side, jt)))
            throw InputError("pose JSON: missing required landmark " + landmark_name(side, jt) + " in frame " +
                             std::to_string(f));
      seq.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("pose JSON: ") + e.what());
  }
  return seq;
}

std::string serialize_pose_json(const SkeletonSequence& seq) {
  // Written by hand so landmark order and number formatting are stable.
  std::ostringstream out;
  out << "{\"trial_id\":" << json(seq.trial_id).dump() << ",\"source\":\"" << to_string(seq.source)
      << "\",\"rate\":" << text::format_double(seq.rate) << ",\"start_time\":" << text::format_double(seq.start_time)
      << ",\"camera_view\":\"" << to_string(seq.camera_view) << "\",\"frames\":[";
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    if (f) out << ',';
    out << "\n{";
    bool first = true;
    for (const auto& [name, p] : seq.frames[f]) {
      if (!first) out << ',';
      first = false;
      out << json(name).dump() << ":[" << text::format_double(p.x) << ',' << text::format_double(p.y) << ','
          << text::format_double(p.z) << ']';
    }
    out << '}';
  }
  out << "\n]}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Joint centers
// ---------------------------------------------------------------------------

namespace {

const TimeSeries<Point3>& require_marker(const MarkerTrajectorySet& set, const std::string& name) {
  const auto it = set.markers.find(name);
  if (it == set.markers.end()) throw InputError("missing marker " + name);
  return it->second;
}

TimeSeries<Point3> evaluate(const MarkerTrajectorySet& set, const JointCenterRecipe& recipe) {
  if (const auto* m = std::get_if<MarkerRecipe>(&recipe)) return require_marker(set, m->marker);
  const auto& mid = std::get<MidpointRecipe>(recipe);
  const auto& a = require_marker(set, mid.first);
  const auto& b = require_marker(set, mid.second);
  TimeSeries<Point3> out;
  out.start_time = a.start_time;
  out.rate = a.rate;
  out.samples.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.samples[i] = midpoint(a.samples[i], b.samples[i]);
  return out;
}

}  // namespace

JointCenterSeries joint_centers(const MarkerTrajectorySet& set, const JointCenterConfig& config, Side side) {
  const auto& r = config.for_side(side);
  return {evaluate(set, r.hip), evaluate(set, r.knee), evaluate(set, r.ankle)};
}

JointCenterSeries skeleton_joints(const SkeletonSequence& seq, Side side) {
  JointCenterSeries out;
  for (auto* s : {&out.hip, &out.knee, &out.ankle}) {
    s->start_time = seq.start_time;
    s->rate = seq.rate;
    s->samples.reserve(seq.frames.size());
  }
  const auto hip = landmark_name(side, Joint::Hip);
  const auto knee = landmark_name(side, Joint::Knee);
  const auto ankle = landmark_name(side, Joint::Ankle);
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& frame = seq.frames[f];
    const auto get = [&](const std::string& name) {
      const auto it = frame.find(name);
      if (it == frame.end()) throw InputError("frame " + std::to_string(f) + " missing landmark " + name);
      return it->second;
    };
    out.hip.samples.push_back(get(hip));
    out.knee.samples.push_back(get(knee));
    out.ankle.samples.push_back(get(ankle));
  }
  return out;
}

}  // namespace kinemetric
