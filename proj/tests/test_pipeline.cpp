#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "kinemetric/biomarkers.hpp"
#include "kinemetric/error.hpp"
#include "kinemetric/pipeline.hpp"
#include "kinemetric/synth.hpp"

using namespace kinemetric;
namespace fs = std::filesystem;

namespace {

AngleSeries angles(std::vector<double> v, Modality m = Modality::Mocap, double rate = 10.0, double t0 = 0.0) {
  AngleSeries s;
  s.modality = m;
  s.series = {t0, rate, std::move(v)};
  return s;
}

TrialComparison trial_with_rom(const std::string& participant, int rep, double rom_a, double rom_b) {
  TrialComparison t;
  t.meta = {participant, Action::Squat, Clothing::Mocap, rep};
  t.trial_id = participant + "_" + std::to_string(rep);
  auto a = BiomarkerSet::from_extremes(0, rom_a);
  a.modality = Modality::Pose33;
  auto b = BiomarkerSet::from_extremes(0, rom_b);
  b.modality = Modality::Imu;
  t.biomarkers[{Modality::Pose33, Side::Left}] = a;
  t.biomarkers[{Modality::Imu, Side::Left}] = b;
  return t;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("kinemetric_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

MotionProfile squat_profile() { return {Action::Squat, 4.0, 10.0, 95.0, 2}; }

}  // namespace

// ---- biomarkers ----

TEST(Biomarkers, Examples) {
  auto b = extract_biomarkers(angles({10, 95, 40}), {"P", Action::Squat});
  EXPECT_EQ(b.min_angle, 10);
  EXPECT_EQ(b.max_angle, 95);
  EXPECT_EQ(b.rom, 85);
  EXPECT_EQ(b.action, Action::Squat);
  auto c = extract_biomarkers(angles({30, 30, 30}), {"P"});
  EXPECT_EQ(c.rom, 0);
  EXPECT_THROW(extract_biomarkers(angles({}), {"P"}), DegenerateError);
}

TEST(Biomarkers, PermutationInvariant) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0, 180);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> v(50);
    for (auto& x : v) x = u(rng);
    auto b1 = extract_biomarkers(angles(v), {"P"});
    std::shuffle(v.begin(), v.end(), rng);
    auto b2 = extract_biomarkers(angles(v), {"P"});
    EXPECT_EQ(b1.min_angle, b2.min_angle);
    EXPECT_EQ(b1.max_angle, b2.max_angle);
    EXPECT_EQ(b1.rom, b2.rom);
    EXPECT_EQ(b1.rom, b1.max_angle - b1.min_angle);
  }
}

TEST(Biomarkers, SampledSinusoidRom) {
  MotionProfile p{Action::Squat, 2.0, 10.0, 95.0, 1};
  std::vector<double> v;
  for (int i = 0; i <= 200; ++i) v.push_back(flexion_curve(p, i * 0.01));
  EXPECT_NEAR(extract_biomarkers(angles(v), {"P"}).rom, 85.0, 1e-6);
}

TEST(ComparePair, IdenticalSeries) {
  auto a = angles({1, 5, 9, 4, 2});
  auto r = compare_pair(a, a);
  EXPECT_EQ(r.mae, 0);
  EXPECT_EQ(r.mse_signed, 0);
  EXPECT_EQ(r.bland_altman.bias, 0);
  ASSERT_TRUE(r.pearson);
  EXPECT_NEAR(*r.pearson, 1.0, 1e-15);
}

TEST(ComparePair, ConstantOffset) {
  auto a = angles({1, 5, 9, 4, 2}, Modality::Pose33);
  auto b = a;
  b.modality = Modality::Imu;
  for (auto& v : b.series.samples) v += 5;
  auto r = compare_pair(a, b);
  EXPECT_NEAR(r.bland_altman.bias, -5, 1e-12);
  EXPECT_NEAR(r.mae, 5, 1e-12);
  EXPECT_NEAR(*r.pearson, 1.0, 1e-12);
  EXPECT_NEAR(r.deltas.rom, 0, 1e-12);
  EXPECT_NEAR(r.deltas.max, -5, 1e-12);
}

TEST(ComparePair, PairsOnSharedGrid) {
  auto a = angles({0, 1, 2, 3, 4}, Modality::Mocap, 10, 0.0);
  auto b = angles({1, 2, 3, 4, 5}, Modality::Imu, 10, 0.2);
  auto p = pair_samples(a.series, b.series);
  EXPECT_EQ(p.a, (std::vector<double>{2, 3, 4}));
  EXPECT_EQ(p.b, (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(pair_samples(a.series, angles({1, 2}, Modality::Imu, 10, 0.05).series), InputError);
  EXPECT_THROW(compare_pair(angles({1}), angles({1}, Modality::Imu)), DegenerateError);
}

TEST(ComparePair, NoisyPairWithinBounds) {
  // sigma 2 deg, n 200, over seeds
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    NormalSource ns(seed, 99);
    std::vector<double> a(200), b(200);
    for (int i = 0; i < 200; ++i) {
      a[i] = 50 + 40 * std::sin(0.05 * i);
      b[i] = a[i] + 2.0 * ns.normal();
    }
    auto r = compare_pair(angles(a), angles(b, Modality::Imu));
    EXPECT_LT(std::abs(r.bland_altman.bias), 1.0) << seed;
    EXPECT_LT(r.mae, 3.0) << seed;
  }
}

TEST(PopulationTests, AveragesRepetitions) {
  std::vector<TrialComparison> trials{trial_with_rom("P1", 1, 80, 81), trial_with_rom("P1", 2, 82, 79),
                                      trial_with_rom("P2", 1, 70, 72)};
  auto v = population_vectors(trials, Action::Squat, Joint::Knee, Side::Left, Metric::Rom,
                              {Modality::Pose33, Modality::Imu});
  EXPECT_EQ(v.a, (std::vector<double>{81, 70}));
  EXPECT_EQ(v.b, (std::vector<double>{80, 72}));
}

TEST(PopulationTests, Errors) {
  const ModalityPair pair{Modality::Pose33, Modality::Imu};
  std::vector<TrialComparison> one{trial_with_rom("P1", 1, 80, 81)};
  EXPECT_THROW(population_tests(one, Action::Squat, Joint::Knee, Side::Left, Metric::Rom, pair), DegenerateError);
  std::vector<TrialComparison> same{trial_with_rom("P1", 1, 80, 80), trial_with_rom("P2", 1, 70, 70)};
  EXPECT_THROW(population_tests(same, Action::Squat, Joint::Knee, Side::Left, Metric::Rom, pair), DegenerateError);
}

TEST(PopulationTests, RomIgnoresSeriesOffset) {
  // the same angle series shifted by a constant has the same ROM
  std::mt19937_64 rng(62);
  std::normal_distribution<double> g(0, 3);
  std::vector<TrialComparison> plain, shifted;
  for (int p = 0; p < 10; ++p) {
    std::vector<double> s(40), t(40);
    for (int i = 0; i < 40; ++i) {
      s[i] = 50 + 40 * std::sin(0.2 * i) + g(rng);
      t[i] = s[i] + g(rng);
    }
    for (int variant = 0; variant < 2; ++variant) {
      auto tt = t;
      if (variant) for (auto& v : tt) v += 25;
      TrialComparison tc;
      tc.meta = {"P" + std::to_string(p), Action::Squat, Clothing::Mocap, 1};
      tc.biomarkers[{Modality::Pose33, Side::Left}] =
          extract_biomarkers(angles(s, Modality::Pose33), tc.meta);
      tc.biomarkers[{Modality::Imu, Side::Left}] = extract_biomarkers(angles(tt, Modality::Imu), tc.meta);
      (variant ? shifted : plain).push_back(tc);
    }
  }
  const ModalityPair pair{Modality::Pose33, Modality::Imu};
  auto a = population_tests(plain, Action::Squat, Joint::Knee, Side::Left, Metric::Rom, pair);
  auto b = population_tests(shifted, Action::Squat, Joint::Knee, Side::Left, Metric::Rom, pair);
  EXPECT_NEAR(a.ttest.p, b.ttest.p, 1e-9);
  EXPECT_NEAR(a.ttest.t, b.ttest.t, 1e-9);
}

// ---- synth ----

TEST(Synth, CurveHitsExtremes) {
  auto p = squat_profile();
  EXPECT_DOUBLE_EQ(flexion_curve(p, 0.0), 10.0);
  EXPECT_DOUBLE_EQ(flexion_curve(p, 1.0), 95.0);
  EXPECT_DOUBLE_EQ(flexion_curve(p, 2.0), 10.0);
  MotionProfile sts{Action::SitToStand, 3.0, 10, 95, 1};
  EXPECT_DOUBLE_EQ(flexion_curve(sts, 0.0), 95.0);
  EXPECT_DOUBLE_EQ(flexion_curve(sts, 1.5), 10.0);
  EXPECT_THROW(flexion_curve(p, 4.5), InputError);
  EXPECT_THROW(flexion_curve({Action::Squat, 1.0, 90, 10, 1}, 0.5), InputError);
}

TEST(Synth, DenseRom) {
  auto p = squat_profile();
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i <= 400; ++i) {
    const double v = flexion_curve(p, i * p.duration / 400);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_NEAR(hi - lo, 85.0, 1e-6);
}

TEST(Synth, ProfileAndNoiseValidation) {
  EXPECT_TRUE(validate(MotionProfile{Action::Squat, 0.0, 10, 95, 1}));
  EXPECT_TRUE(validate(MotionProfile{Action::Squat, 1.0, 10, 95, 0}));
  EXPECT_FALSE(validate(squat_profile()));
  EXPECT_TRUE(validate(NoiseSpec{-1, 0, 0, 0}));
}

TEST(Synth, RandomStreamsDeterministic) {
  NormalSource a(5, 1), b(5, 1), c(5, 2);
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    EXPECT_NE(x, c.normal());
  }
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Synth, ClosedLoopMarkers) {
  auto p = squat_profile();
  auto set = parse_marker_csv(render_markers(p, {}));
  for (Side side : {Side::Left, Side::Right}) {
    auto s = series_angles(joint_centers(set, {}, side), AngleMethod::Cross, Modality::Mocap, side);
    ASSERT_EQ(s.series.size(), 601u);
    for (std::size_t i = 0; i < s.series.size(); ++i)
      ASSERT_NEAR(s.series.samples[i], flexion_curve(p, s.series.time_at(i)), 1e-6) << i;
  }
}

TEST(Synth, ClosedLoopImu) {
  auto p = squat_profile();
  auto r = parse_imu_csv(render_imu(p, {}));
  std::map<Segment, QuaternionStream> by;
  for (auto& s : r.streams) by[s.segment] = s;
  for (Side side : {Side::Left, Side::Right}) {
    auto out = series_angles(by.at(thigh_segment(side)), by.at(shank_segment(side)), {}, side);
    for (std::size_t i = 0; i < out.angles.series.size(); ++i)
      ASSERT_NEAR(out.angles.series.samples[i], flexion_curve(p, out.angles.series.time_at(i)), 1e-6) << i;
  }
}

TEST(Synth, ClosedLoopPose) {
  auto p = squat_profile();
  for (auto src : {SkeletonSource::Pose33, SkeletonSource::Mesh49}) {
    auto seq = parse_pose_json(render_pose(p, {}, kPoseRate, src));
    EXPECT_EQ(seq.source, src);
    for (Side side : {Side::Left, Side::Right}) {
      auto s = series_angles(skeleton_joints(seq, side), AngleMethod::Cosine, modality_of(src), side);
      for (std::size_t i = 0; i < s.series.size(); ++i)
        ASSERT_NEAR(s.series.samples[i], flexion_curve(p, s.series.time_at(i)), 1e-6) << i;
    }
  }
}

TEST(Synth, ZeroFlexionImuIsIdentity) {
  MotionProfile flat{Action::Static, 1.0, 0.0, 1e-12, 1};
  for (const auto& s : synth_imu(flat, {}))
    for (const auto& q : s.samples.samples) {
      EXPECT_NEAR(q.w, 1.0, 1e-12);
      EXPECT_NEAR(q.x, 0.0, 1e-12);
    }
}

TEST(Synth, RendersAreDeterministic) {
  auto p = squat_profile();
  NoiseSpec n = default_noise(77);
  EXPECT_EQ(render_markers(p, n), render_markers(p, n));
  EXPECT_EQ(render_imu(p, n), render_imu(p, n));
  EXPECT_EQ(render_pose(p, n), render_pose(p, n));
  EXPECT_EQ(render_truth(p, n), render_truth(p, n));
  NoiseSpec m = default_noise(78);
  EXPECT_NE(render_markers(p, n), render_markers(p, m));
}

TEST(Synth, TruthDocument) {
  auto j = nlohmann::json::parse(render_truth(squat_profile(), {}));
  EXPECT_DOUBLE_EQ(j["biomarkers"]["rom"].get<double>(), 85.0);
}

TEST(Synth, MarkerNoiseRomWithinTwoDegrees) {
  // ROM is a range statistic, so noise pushes it up; individual trials can
  // land just past 2 degrees. Checked as a rate over seeds.
  auto p = squat_profile();
  RunConfig cfg;
  int within = 0, total = 0;
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    TrialInputs in;
    in.meta = {"P01", p.action, Clothing::Mocap, 1};
    in.trial_id = "t";
    in.markers = synth_markers(p, {0.005, 0, 0, seed});
    auto a = compute_angles(in, cfg);
    for (Side side : {Side::Left, Side::Right}) {
      const double err = extract_biomarkers(a.series.at({Modality::Mocap, side}), in.meta).rom - 85.0;
      within += std::abs(err) <= 2.0;
      sum += err;
      ++total;
    }
  }
  EXPECT_GE(within, 0.95 * total);
  EXPECT_LT(std::abs(sum / total), 2.0);
  std::printf("marker noise 5 mm: %d/%d within 2 deg, mean ROM error %+.3f\n", within, total, sum / total);
}

TEST(Synth, PopulationPlan) {
  PopulationSpec spec;
  spec.participants = 3;
  auto plan = plan_population(spec);
  // sit-to-stand 3 reps, squat-to-box 5 reps
  EXPECT_EQ(plan.size(), 3u * (3 + 5));
  std::set<std::string> ids;
  for (const auto& t : plan) ids.insert(t.trial_id);
  EXPECT_EQ(ids.size(), plan.size());
  auto again = plan_population(spec);
  for (std::size_t i = 0; i < plan.size(); ++i) EXPECT_EQ(plan[i].noise.seed, again[i].noise.seed);
  spec.rom_inflation = {{Modality::Imu, 10.0}};
  for (const auto& t : plan_population(spec))
    EXPECT_NEAR(t.imu_profile.max_angle - t.profile.max_angle, 10.0, 1e-12);
}

// ---- pipeline ----

TEST(Pipeline, ZeroNoiseModalitiesAgreeAtTenHz) {
  PopulationSpec spec;
  spec.participants = 1;
  spec.noise = {};
  RunConfig cfg;
  for (const auto& t : plan_population(spec)) {
    auto cmp = compare_trial(compute_angles(synth_inputs(t, spec), cfg), cfg);
    ASSERT_EQ(cmp.pairs.size(), 6u);
    for (const auto& r : cmp.pairs) EXPECT_LT(r.mae, 0.5) << t.trial_id;
    EXPECT_FALSE(validate(cmp));
  }
}

TEST(Pipeline, OneParticipantIsInsufficient) {
  PopulationSpec spec;
  spec.participants = 1;
  RunConfig cfg;
  std::vector<TrialComparison> trials;
  for (const auto& t : plan_population(spec))
    trials.push_back(compare_trial(compute_angles(synth_inputs(t, spec), cfg), cfg));
  auto rows = population_rows(trials, cfg);
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "insufficient data");
    EXPECT_EQ(r.n, 1u);
    EXPECT_FALSE(r.ttest);
  }
}

TEST(Pipeline, IdenticalPopulationsAreDegenerate) {
  std::vector<TrialComparison> trials{trial_with_rom("P1", 1, 80, 80), trial_with_rom("P2", 1, 70, 70)};
  RunConfig cfg;
  cfg.pairs = {{Modality::Pose33, Modality::Imu}};
  auto rows = population_rows(trials, cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "degenerate: zero-variance differences");
  EXPECT_EQ(rows[0].n, 2u);
}

TEST(Pipeline, ManualLagOverride) {
  PopulationSpec spec;
  spec.participants = 1;
  spec.noise = {};
  auto t = plan_population(spec).front();
  RunConfig cfg;
  cfg.align_mode = AlignMode::Manual;
  cfg.manual_lag = 2;
  auto cmp = compare_trial(compute_angles(synth_inputs(t, spec), cfg), cfg);
  for (const auto& r : cmp.pairs) EXPECT_EQ(r.lag, 2);
  auto in = synth_inputs(t, spec);
  in.lag = -1;
  cmp = compare_trial(compute_angles(in, cfg), cfg);
  for (const auto& r : cmp.pairs) EXPECT_EQ(r.lag, -1);
}

TEST(Pipeline, ConfigRoundTrip) {
  RunConfig c;
  c.target_rate = 20;
  c.pose_sg.reset();
  c.imu_sg = SgParams{7, 2};
  c.smooth_target = SmoothTarget::Angles;
  c.euler = {EulerSequence::ZYX, 3, 1};
  c.imu_offset_deg = 1.5;
  c.align_mode = AlignMode::Manual;
  c.manual_lag = -4;
  c.pairs = {{Modality::Mesh49, Modality::Mocap}};
  c.formats = {"json"};
  c.metric = Metric::Max;
  c.marker_aliases = {{"L.Knee", "LLFE"}};
  c.joint_centers.left.hip = MidpointRecipe{"LASIS", "LPSIS"};
  const auto j = to_json(c);
  EXPECT_EQ(to_json(config_from_json(j)), j);
  EXPECT_EQ(to_json(config_from_json(nlohmann::json::object())), to_json(RunConfig{}));
}

TEST(Pipeline, ConfigErrors) {
  using nlohmann::json;
  EXPECT_THROW(config_from_json(json{{"target_rate", 0}}), InputError);
  EXPECT_THROW(config_from_json(json{{"pairs", {{"imu", "imu"}}}}), InputError);
  EXPECT_THROW(config_from_json(json{{"pairs", {{"imu", "kinect"}}}}), InputError);
  EXPECT_THROW(config_from_json(json{{"formats", {"pdf"}}}), InputError);
  EXPECT_THROW(config_from_json(json{{"smoothing", {{"mocap", {{"window", 4}, {"order", 1}}}}}}), InputError);
  EXPECT_THROW(config_from_json(json{{"euler", {{"flexion_index", 0}}}}), InputError);
  EXPECT_THROW(config_from_json(json::array()), InputError);
}

TEST(Pipeline, ManifestRoundTrip) {
  const std::string doc = R"({"trials":[
    {"participant_id":"P01","action":"squat","clothing":"normal","repetition_index":2,
     "markers":"m.csv","imu":"i.csv","pose":"p.json","lag":3},
    {"participant_id":"P02","action":"lunge","clothing":"mocap","repetition_index":1,"trial_id":"custom"}]})";
  auto m = parse_manifest(doc, "/base");
  ASSERT_EQ(m.trials.size(), 2u);
  EXPECT_EQ(m.trials[0].trial_id, "P01_squat_normal_r2");
  EXPECT_EQ(m.trials[0].lag, 3);
  EXPECT_EQ(m.trials[1].trial_id, "custom");
  EXPECT_FALSE(m.trials[1].markers);
  auto again = parse_manifest(serialize_manifest(m), "/base");
  EXPECT_EQ(serialize_manifest(again), serialize_manifest(m));
}

TEST(Pipeline, ManifestErrors) {
  EXPECT_THROW(parse_manifest("[]", "."), InputError);
  EXPECT_THROW(parse_manifest("{", "."), InputError);
  try {
    parse_manifest(R"({"trials":[{"participant_id":"P","action":"dance","clothing":"mocap","repetition_index":1}]})",
                   ".");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("trial 0"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, MissingFileNamesPath) {
  ManifestEntry e;
  e.meta = {"P01", Action::Squat, Clothing::Mocap, 1};
  e.trial_id = "P01_squat_mocap_r1";
  e.markers = "nowhere.csv";
  try {
    load_trial(e, "/definitely/not/here", RunConfig{});
    FAIL();
  } catch (const InputError& ex) {
    EXPECT_NE(std::string(ex.what()).find("/definitely/not/here/nowhere.csv"), std::string::npos) << ex.what();
  }
}

// ---- report ----

TEST(Report, AngleCsvRoundTrip) {
  auto s = angles({0.0, 12.5, 33.333333333333336, 90.0}, Modality::Pose33, 30.0, 0.1);
  s.side = Side::Right;
  auto back = parse_angle_csv(serialize_angle_csv(s));
  EXPECT_EQ(back.series.samples, s.series.samples);
  EXPECT_EQ(back.series.rate, 30.0);
  EXPECT_EQ(back.series.start_time, 0.1);
  EXPECT_EQ(back.side, Side::Right);
  EXPECT_EQ(back.modality, Modality::Pose33);
  EXPECT_EQ(angle_file_name("T1", Modality::Imu, Side::Left), "T1_imu_left_knee.csv");
  EXPECT_THROW(parse_angle_csv("time,angle_deg\n0,1\n"), InputError);
}

TEST(Report, SvgLines) {
  const std::vector<double> a{10, 20, 30, 40}, b{12, 18, 33, 41};
  auto svg = bland_altman_svg(bland_altman(a, b), "pose33 - imu", "mean");
  EXPECT_EQ(svg, bland_altman_svg(bland_altman(a, b), "pose33 - imu", "mean"));
  const auto line_of = [&](const std::string& id) {
    const auto at = svg.find("<line id=\"" + id + "\"");
    EXPECT_NE(at, std::string::npos) << id;
    return svg.substr(at, svg.find('>', at) - at);
  };
  EXPECT_EQ(line_of("bias").find("dasharray"), std::string::npos);
  EXPECT_NE(line_of("loa_high").find("stroke-dasharray"), std::string::npos);
  EXPECT_NE(line_of("loa_low").find("stroke-dasharray"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 0, true);
  std::size_t circles = 0;
  for (auto at = svg.find("<circle"); at != std::string::npos; at = svg.find("<circle", at + 1)) ++circles;
  EXPECT_EQ(circles, 4u);
}

TEST(Report, JsonEmbedsConfig) {
  RunConfig cfg;
  PopulationSpec spec;
  spec.participants = 2;
  spec.actions = {Action::SitToStand};
  std::vector<TrialComparison> trials;
  for (const auto& t : plan_population(spec))
    trials.push_back(compare_trial(compute_angles(synth_inputs(t, spec), cfg), cfg));
  auto rows = population_rows(trials, cfg);
  auto j = report_json(cfg, trials, rows);
  EXPECT_EQ(j["config"], to_json(cfg));
  EXPECT_EQ(j["trials"].size(), trials.size() * 2);
  EXPECT_EQ(j["population"].size(), rows.size());
  const auto& first = j["trials"][0];
  EXPECT_TRUE(first["biomarkers"].contains("pose33"));
  EXPECT_EQ(first["pairs"].size(), 3u);
  for (const auto& row : j["population"]) EXPECT_EQ(row["status"], "ok");
  EXPECT_EQ(population_json(cfg, rows)["population"], j["population"]);
  const auto csv = population_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "action,joint,side,metric,a,b,clothing,camera_view,n,t,df,p,r,status");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(rows.size() + 1));
  EXPECT_EQ(trials_csv(trials), trials_csv(trials));
}

TEST(Report, AtomicWrite) {
  auto dir = scratch("atomic");
  write_file_atomic(dir / "a.txt", "hello");
  EXPECT_EQ(read_file(dir / "a.txt"), "hello");
  EXPECT_FALSE(fs::exists(dir / "a.txt.tmp"));
  write_file_atomic(dir / "a.txt", "again");
  EXPECT_EQ(read_file(dir / "a.txt"), "again");
  EXPECT_THROW(read_file(dir / "missing.txt"), InputError);
  fs::remove_all(dir);
}

// ---- commands ----

TEST(Commands, SynthThenCompareAndPopulation) {
  auto dir = scratch("commands");
  SynthRequest req;
  req.population.participants = 2;
  req.population.actions = {Action::SitToStand};
  req.population.seed = 3;
  auto s = run_synth(req, dir / "data");
  EXPECT_EQ(s.trials, 6u);
  ASSERT_TRUE(fs::exists(dir / "data" / "manifest.json"));
  RunConfig cfg;
  auto angles_out = run_angles(cfg, dir / "data" / "manifest.json", dir / "angles");
  EXPECT_EQ(angles_out.written.size(), 6u * 3 * 2);
  auto a = run_compare(cfg, dir / "data" / "manifest.json", dir / "cmp");
  auto b = run_compare(cfg, dir / "data" / "manifest.json", dir / "cmp2", dir / "angles");
  EXPECT_EQ(read_file(dir / "cmp" / "report.json"), read_file(dir / "cmp2" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "cmp" / "trials.csv"));
  EXPECT_TRUE(fs::exists(dir / "cmp" / "bland_altman_pose33_imu_left.svg"));
  auto p = run_population(cfg, dir / "data" / "manifest.json", dir / "pop");
  EXPECT_TRUE(fs::exists(dir / "pop" / "population.csv"));
  EXPECT_TRUE(fs::exists(dir / "pop" / "population.json"));
  fs::remove_all(dir);
}

TEST(Commands, EmptyManifest) {
  auto dir = scratch("empty");
  write_file_atomic(dir / "manifest.json", R"({"trials":[]})");
  try {
    run_angles(RunConfig{}, dir / "manifest.json", dir / "out");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(std::string(e.what()), "no trials");
  }
  fs::remove_all(dir);
}
