#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kinemetric/error.hpp"
#include "kinemetric/pipeline.hpp"
#include "text.hpp"

namespace kinemetric {

using nlohmann::json;

namespace {

std::string fmt(double v) { return text::format_double(v); }

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string view_name(const std::optional<CameraView>& v) {
  return v ? std::string(to_string(*v)) : std::string();
}

json meta_json(const TrialMeta& m) {
  return {{"participant_id", m.participant_id},
          {"action", to_string(m.action)},
          {"clothing", to_string(m.clothing)},
          {"repetition_index", m.repetition_index}};
}

json ba_json(const BlandAltman& ba) {
  return {{"bias", ba.bias}, {"sd_diff", ba.sd_diff}, {"loa_low", ba.loa_low}, {"loa_high", ba.loa_high}, {"n", ba.n}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Angle files
// ---------------------------------------------------------------------------

std::string angle_file_name(const std::string& trial_id, Modality m, Side s) {
  return trial_id + "_" + std::string(to_string(m)) + "_" + std::string(to_string(s)) + "_knee.csv";
}

std::string serialize_angle_csv(const AngleSeries& s) {
  std::string out = "#rate=" + fmt(s.series.rate) + ",start_time=" + fmt(s.series.start_time) +
                    ",joint=" + std::string(to_string(s.joint)) + ",side=" + std::string(to_string(s.side)) +
                    ",modality=" + std::string(to_string(s.modality)) + ",convention=flexion_zero_extension\n";
  out += "time,angle_deg\n";
  for (std::size_t i = 0; i < s.series.size(); ++i)
    out += fmt(s.series.time_at(i)) + "," + fmt(s.series.samples[i]) + "\n";
  return out;
}

AngleSeries parse_angle_csv(std::string_view bytes) {
  const auto rows = text::lines(bytes);
  if (rows.size() < 2 || !rows[0].starts_with("#")) throw InputError("angle csv: malformed header");
  AngleSeries s;
  bool have_rate = false, have_side = false, have_modality = false;
  for (auto kv : text::split(rows[0].substr(1), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw InputError("angle csv: malformed header");
    const auto key = text::trim(kv.substr(0, eq));
    const auto value = text::trim(kv.substr(eq + 1));
    if (key == "rate") {
      auto r = text::parse_double(value);
      if (!r || !(*r > 0.0)) throw InputError("angle csv: bad rate");
      s.series.rate = *r;
      have_rate = true;
    } else if (key == "start_time") {
      auto t = text::parse_double(value);
      if (!t) throw InputError("angle csv: bad start_time");
      s.series.start_time = *t;
    } else if (key == "joint") {
      auto j = parse_joint(value);
      if (!j) throw InputError("angle csv: unknown joint");
      s.joint = *j;
    } else if (key == "side") {
      auto v = parse_side(value);
      if (!v) throw InputError("angle csv: unknown side");
      s.side = *v;
      have_side = true;
    } else if (key == "modality") {
      auto m = parse_modality(value);
      if (!m) throw InputError("angle csv: unknown modality");
      s.modality = *m;
      have_modality = true;
    } else if (key == "convention" && value != "flexion_zero_extension") {
      throw InputError("angle csv: unsupported convention");
    }
  }
  if (!have_rate || !have_side || !have_modality) throw InputError("angle csv: header needs rate, side and modality");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const auto cells = text::split(rows[i], ',');
    if (cells.size() != 2) throw InputError("angle csv: row " + std::to_string(i + 1) + " needs 2 cells");
    auto v = text::parse_double(cells[1]);
    if (!v) throw InputError("angle csv: bad value on row " + std::to_string(i + 1));
    s.series.samples.push_back(*v);
  }
  if (auto v = validate(s)) throw InputError("angle csv: " + *v);
  return s;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

json report_json(const RunConfig& config, const std::vector<TrialComparison>& trials,
                 const std::vector<PopulationRow>& population) {
  json jt = json::array();
  for (const auto& t : trials) {
    for (const Side side : {Side::Left, Side::Right}) {
      json bio = json::object();
      for (const auto& [key, b] : t.biomarkers)
        if (key.second == side)
          bio[std::string(to_string(key.first))] = {{"min", b.min_angle}, {"max", b.max_angle}, {"rom", b.rom}};
      if (bio.empty()) continue;
      json pairs = json::array();
      for (const auto& p : t.pairs) {
        if (p.side != side) continue;
        pairs.push_back({{"a", to_string(p.a)},
                         {"b", to_string(p.b)},
                         {"lag", p.lag},
                         {"bland_altman", ba_json(p.bland_altman)},
                         {"mae", p.mae},
                         {"mse_signed", p.mse_signed},
                         {"pearson", opt_json(p.pearson)},
                         {"deltas", {{"min", p.deltas.min}, {"max", p.deltas.max}, {"rom", p.deltas.rom}}}});
      }
      jt.push_back({{"trial_id", t.trial_id},
                    {"side", to_string(side)},
                    {"joint", "knee"},
                    {"meta", meta_json(t.meta)},
                    {"camera_view", t.camera_view ? json(to_string(*t.camera_view)) : json(nullptr)},
                    {"biomarkers", bio},
                    {"pairs", pairs}});
    }
  }
  return {{"config", to_json(config)}, {"trials", jt}, {"population", population_json(config, population)["population"]}};
}

std::string trials_csv(const std::vector<TrialComparison>& trials) {
  std::string out =
      "trial_id,participant_id,action,clothing,repetition_index,camera_view,side,a,b,lag,n,bias,sd_diff,loa_low,"
      "loa_high,mae,mse_signed,pearson,a_min,a_max,a_rom,b_min,b_max,b_rom\n";
  for (const auto& t : trials)
    for (const auto& p : t.pairs) {
      const auto& ba = t.biomarkers.at({p.a, p.side});
      const auto& bb = t.biomarkers.at({p.b, p.side});
      out += t.trial_id + "," + t.meta.participant_id + "," + std::string(to_string(t.meta.action)) + "," +
             std::string(to_string(t.meta.clothing)) + "," + std::to_string(t.meta.repetition_index) + "," +
             view_name(t.camera_view) + "," + std::string(to_string(p.side)) + "," + std::string(to_string(p.a)) +
             "," + std::string(to_string(p.b)) + "," + std::to_string(p.lag) + "," +
             std::to_string(p.bland_altman.n) + "," + fmt(p.bland_altman.bias) + "," + fmt(p.bland_altman.sd_diff) +
             "," + fmt(p.bland_altman.loa_low) + "," + fmt(p.bland_altman.loa_high) + "," + fmt(p.mae) + "," +
             fmt(p.mse_signed) + "," + fmt_opt(p.pearson) + "," + fmt(ba.min_angle) + "," + fmt(ba.max_angle) + "," +
             fmt(ba.rom) + "," + fmt(bb.min_angle) + "," + fmt(bb.max_angle) + "," + fmt(bb.rom) + "\n";
    }
  return out;
}

std::string population_csv(const std::vector<PopulationRow>& rows) {
  std::string out = "action,joint,side,metric,a,b,clothing,camera_view,n,t,df,p,r,status\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.action)) + "," + std::string(to_string(r.joint)) + "," +
           std::string(to_string(r.side)) + "," + std::string(to_string(r.metric)) + "," +
           std::string(to_string(r.pair.a)) + "," + std::string(to_string(r.pair.b)) + "," +
           std::string(to_string(r.clothing)) + "," + view_name(r.camera_view) + "," + std::to_string(r.n) + ",";
    if (r.ttest)
      out += fmt(r.ttest->t) + "," + std::to_string(r.ttest->df) + "," + fmt(r.ttest->p);
    else
      out += ",,";
    out += "," + fmt_opt(r.r) + "," + r.status + "\n";
  }
  return out;
}

json population_json(const RunConfig& config, const std::vector<PopulationRow>& rows) {
  json jr = json::array();
  for (const auto& r : rows) {
    jr.push_back({{"action", to_string(r.action)},
                  {"joint", to_string(r.joint)},
                  {"side", to_string(r.side)},
                  {"metric", to_string(r.metric)},
                  {"a", to_string(r.pair.a)},
                  {"b", to_string(r.pair.b)},
                  {"clothing", to_string(r.clothing)},
                  {"camera_view", r.camera_view ? json(to_string(*r.camera_view)) : json(nullptr)},
                  {"n", r.n},
                  {"t", r.ttest ? json(r.ttest->t) : json(nullptr)},
                  {"df", r.ttest ? json(r.ttest->df) : json(nullptr)},
                  {"p", r.ttest ? json(r.ttest->p) : json(nullptr)},
                  {"r", opt_json(r.r)},
                  {"status", r.status}});
  }
  return {{"config", to_json(config)}, {"population", jr}};
}

// ---------------------------------------------------------------------------
// Bland-Altman plot
// ---------------------------------------------------------------------------

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo, hi;
};

Range padded(double lo, double hi, double frac) {
  if (!(hi - lo > 1e-9)) return {lo - 1.0, hi + 1.0};
  const double pad = (hi - lo) * frac;
  return {lo - pad, hi + pad};
}

}  // namespace

std::string bland_altman_svg(const BlandAltman& ba, const std::string& title, const std::string& x_label) {
  constexpr double kW = 640, kH = 480, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  double xlo = 0, xhi = 0, ylo = std::min(ba.loa_low, ba.bias), yhi = std::max(ba.loa_high, ba.bias);
  if (!ba.points.empty()) xlo = xhi = ba.points.front().first;
  for (const auto& [m, d] : ba.points) {
    xlo = std::min(xlo, m);
    xhi = std::max(xhi, m);
    ylo = std::min(ylo, d);
    yhi = std::max(yhi, d);
  }
  const auto xr = padded(xlo, xhi, 0.05);
  const auto yr = padded(ylo, yhi, 0.1);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  o << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << xml_escape(title) << "</text>\n";
  o << "<rect x=\"" << fixed(kLeft, 2) << "\" y=\"" << fixed(kTop, 2) << "\" width=\"" << fixed(pw, 2)
    << "\" height=\"" << fixed(ph, 2) << "\" fill=\"none\" stroke=\"black\"/>\n";
  // Axis ticks: 5 intervals on each axis.
  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    o << "<text x=\"" << fixed(px(xv), 2) << "\" y=\"" << fixed(kH - kBottom + 18, 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(xv, 1) << "</text>\n";
    o << "<text x=\"" << fixed(kLeft - 6, 2) << "\" y=\"" << fixed(py(yv) + 4, 2)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fixed(yv, 1) << "</text>\n";
  }
  o << "<text x=\"" << fixed(kLeft + pw / 2, 2) << "\" y=\"" << fixed(kH - 16, 2)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << fixed(kTop + ph / 2, 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"13\" transform=\"rotate(-90 18 " << fixed(kTop + ph / 2, 2) << ")\">Difference (deg)</text>\n";
  for (const auto& [m, d] : ba.points)
    o << "<circle cx=\"" << fixed(px(m), 2) << "\" cy=\"" << fixed(py(d), 2)
      << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
  auto hline = [&](double y, const char* id, const char* extra, const std::string& label) {
    o << "<line id=\"" << id << "\" x1=\"" << fixed(kLeft, 2) << "\" y1=\"" << fixed(py(y), 2) << "\" x2=\""
      << fixed(kLeft + pw, 2) << "\" y2=\"" << fixed(py(y), 2) << "\" stroke=\"black\" stroke-width=\"1.5\"" << extra
      << "/>\n";
    o << "<text x=\"" << fixed(kLeft + pw - 4, 2) << "\" y=\"" << fixed(py(y) - 4, 2)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
  };
  hline(ba.bias, "bias", "", "bias " + fixed(ba.bias, 2));
  hline(ba.loa_high, "loa_high", " stroke-dasharray=\"6,4\"", "+1.96 SD " + fixed(ba.loa_high, 2));
  hline(ba.loa_low, "loa_low", " stroke-dasharray=\"6,4\"", "-1.96 SD " + fixed(ba.loa_low, 2));
  o << "</svg>\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw InputError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f || std::filesystem::is_directory(path)) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace kinemetric
