#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "kinemetric/error.hpp"
#include "kinemetric/ingest.hpp"

using namespace kinemetric;

namespace {

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "<no InputError>";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::string six_landmarks(double knee_x = 0.0) {
  std::ostringstream o;
  o << R"({"left_hip":[0.1,0,0],"left_knee":[)" << knee_x
    << R"(,0,-0.45],"left_ankle":[0.1,0,-0.9],)"
    << R"("right_hip":[-0.1,0,0],"right_knee":[-0.1,0,-0.45],"right_ankle":[-0.1,0,-0.9]})";
  return o.str();
}

}  // namespace

TEST(MarkerCsv, MillimetersToMeters) {
  const std::string csv =
      "#rate=100,unit=mm\n"
      "time,A_x,A_y,A_z,B_x,B_y,B_z\n"
      "0,1000,1000,1000,1000,1000,1000\n"
      "0.01,1000,1000,1000,1000,1000,1000\n"
      "0.02,1000,1000,1000,1000,1000,1000\n";
  auto m = parse_marker_csv(csv);
  EXPECT_EQ(m.rate, 100);
  ASSERT_EQ(m.markers.size(), 2u);
  EXPECT_EQ(m.frame_count(), 3u);
  for (const auto& [name, s] : m.markers)
    for (const auto& p : s.samples) EXPECT_EQ(p, (Point3{1.0, 1.0, 1.0}));
  EXPECT_EQ(m.order, (std::vector<std::string>{"A", "B"}));
}

TEST(MarkerCsv, UnitScalingIsExactlyThousand) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2000, 2000);
  std::ostringstream body;
  body << "time,A_x,A_y,A_z\n";
  for (int i = 0; i < 50; ++i) body << i * 0.01 << ',' << u(rng) << ',' << u(rng) << ',' << u(rng) << '\n';
  auto mm = parse_marker_csv("#rate=100,unit=mm\n" + body.str());
  auto m = parse_marker_csv("#rate=100,unit=m\n" + body.str());
  const auto& a = mm.markers.at("A").samples;
  const auto& b = m.markers.at("A").samples;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_DOUBLE_EQ(a[i].x * 1000, b[i].x);
    EXPECT_DOUBLE_EQ(a[i].y * 1000, b[i].y);
    EXPECT_DOUBLE_EQ(a[i].z * 1000, b[i].z);
  }
}

TEST(MarkerCsv, InteriorGapInterpolated) {
  const std::string csv =
      "#rate=10,unit=m\n"
      "time,A_x,A_y,A_z\n"
      "0,0.5,0,0\n"
      "0.1,,0,0\n"
      "0.2,0.5,0,0\n";
  auto m = parse_marker_csv(csv);
  EXPECT_DOUBLE_EQ(m.markers.at("A").samples[1].x, 0.5);
}

TEST(MarkerCsv, LinearGapFill) {
  std::string csv = "#rate=10,unit=m\ntime,A_x,A_y,A_z\n0,0,0,0\n0.1,,0,0\n0.2,,0,0\n0.3,3,0,0\n";
  auto m = parse_marker_csv(csv);
  EXPECT_NEAR(m.markers.at("A").samples[1].x, 1.0, 1e-12);
  EXPECT_NEAR(m.markers.at("A").samples[2].x, 2.0, 1e-12);
}

TEST(MarkerCsv, EdgeGapsHoldNearest) {
  auto m = parse_marker_csv("#rate=10,unit=m\ntime,A_x,A_y,A_z\n0,,,\n0.1,2,3,4\n0.2,5,6,7\n0.3,,,\n");
  const auto& s = m.markers.at("A").samples;
  EXPECT_EQ(s[0], (Point3{2, 3, 4}));
  EXPECT_EQ(s[3], (Point3{5, 6, 7}));
}

TEST(MarkerCsv, GapLimit) {
  auto build = [](int gap) {
    std::ostringstream o;
    o << "#rate=10,unit=m\ntime,A_x,A_y,A_z\n0,1,1,1\n";
    for (int i = 1; i <= gap; ++i) o << i * 0.1 << ",,,\n";
    o << (gap + 1) * 0.1 << ",1,1,1\n";
    return o.str();
  };
  EXPECT_NO_THROW(parse_marker_csv(build(10)));
  const auto msg = message_of([&] { parse_marker_csv(build(11)); });
  EXPECT_TRUE(contains(msg, "gap exceeds limit")) << msg;
  EXPECT_TRUE(contains(msg, "A_x")) << msg;
}

TEST(MarkerCsv, HeaderErrors) {
  EXPECT_TRUE(contains(message_of([] { parse_marker_csv("time,A_x,A_y,A_z\n0,1,1,1\n"); }), "malformed header"));
  EXPECT_TRUE(contains(message_of([] { parse_marker_csv("#rate=10,unit=cm\ntime,A_x,A_y,A_z\n0,1,1,1\n"); }),
                       "unknown unit"));
  EXPECT_TRUE(contains(message_of([] { parse_marker_csv("#rate=10,unit=m\ntime,A_x,A_y\n0,1,1\n"); }),
                       "malformed header"));
  EXPECT_TRUE(contains(message_of([] { parse_marker_csv("#rate=-1,unit=m\ntime,A_x,A_y,A_z\n0,1,1,1\n"); }),
                       "rate"));
  EXPECT_TRUE(contains(
      message_of([] { parse_marker_csv("#rate=10,unit=m\ntime,A_x,A_y,A_z,A_x,A_y,A_z\n0,1,1,1,1,1,1\n"); }),
      "duplicate marker A"));
}

TEST(MarkerCsv, RaggedRows) {
  const auto msg = message_of([] { parse_marker_csv("#rate=10,unit=m\ntime,A_x,A_y,A_z\n0,1,1,1\n0.1,1,1\n"); });
  EXPECT_TRUE(contains(msg, "non-uniform row count")) << msg;
}

TEST(MarkerCsv, AliasesRenameColumns) {
  auto m = parse_marker_csv("#rate=10,unit=m\ntime,L.Knee.Lat_x,L.Knee.Lat_y,L.Knee.Lat_z\n0,1,2,3\n",
                            {{"L.Knee.Lat", "LLFE"}});
  EXPECT_TRUE(m.markers.count("LLFE"));
}

TEST(MarkerCsv, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  MarkerTrajectorySet set;
  set.rate = 150;
  set.order = {"LGT", "LLFE"};
  for (const auto& n : set.order) {
    TimeSeries<Point3> s{0, 150, {}};
    for (int i = 0; i < 40; ++i) s.samples.push_back({u(rng), u(rng), u(rng)});
    set.markers[n] = s;
  }
  auto once = parse_marker_csv(serialize_marker_csv(set));
  for (const auto& n : set.order) {
    ASSERT_EQ(once.markers.at(n).samples.size(), 40u);
    for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(once.markers.at(n).samples[i], set.markers.at(n).samples[i]);
  }
  EXPECT_EQ(serialize_marker_csv(parse_marker_csv(serialize_marker_csv(once))), serialize_marker_csv(once));
}

TEST(ImuCsv, IdentityAndNormalization) {
  auto r = parse_imu_csv(
      "#rate=300\n"
      "time,right_thigh_qw,right_thigh_qx,right_thigh_qy,right_thigh_qz,right_shank_qw,right_shank_qx,right_shank_qy,"
      "right_shank_qz\n"
      "0,1,0,0,0,0.7071,0.7071,0,0\n");
  ASSERT_EQ(r.streams.size(), 2u);
  EXPECT_EQ(r.streams[0].segment, Segment::RightThigh);
  EXPECT_EQ(r.streams[0].samples.samples[0], Quaternion::identity());
  EXPECT_NEAR(r.streams[1].samples.samples[0].norm(), 1.0, 1e-12);
  EXPECT_EQ(r.warning_count, 0u);
  EXPECT_EQ(r.streams[0].rate, 300);
}

TEST(ImuCsv, OffNormRowsCounted) {
  auto r = parse_imu_csv("#rate=100\ntime,left_foot_qw,left_foot_qx,left_foot_qy,left_foot_qz\n0,2,0,0,0\n0.01,1,0,0,0\n");
  EXPECT_EQ(r.warning_count, 1u);
  EXPECT_EQ(r.streams[0].samples.samples[0], Quaternion::identity());
}

TEST(ImuCsv, Errors) {
  EXPECT_TRUE(contains(message_of([] { parse_imu_csv("#rate=100\ntime,pelvis_qw,pelvis_qx,pelvis_qy,pelvis_qz\n0,1,0,0,0\n"); }),
                       "unknown segment label"));
  const auto zero = message_of([] {
    parse_imu_csv("#rate=100\ntime,left_thigh_qw,left_thigh_qx,left_thigh_qy,left_thigh_qz\n0,0,0,0,0\n");
  });
  EXPECT_TRUE(contains(zero, "zero-norm quaternion")) << zero;
  EXPECT_TRUE(contains(zero, "left_thigh")) << zero;
}

TEST(ImuCsv, RoundTrip) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<QuaternionStream> streams;
  for (auto seg : {Segment::LeftThigh, Segment::LeftShank}) {
    QuaternionStream s{"", seg, 300, {0, 300, {}}};
    for (int i = 0; i < 30; ++i) s.samples.samples.push_back(Quaternion{g(rng), g(rng), g(rng), g(rng)}.normalized());
    streams.push_back(s);
  }
  auto back = parse_imu_csv(serialize_imu_csv(streams));
  ASSERT_EQ(back.streams.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back.streams[k].segment, streams[k].segment);
    for (std::size_t i = 0; i < 30; ++i) {
      const auto& a = back.streams[k].samples.samples[i];
      const auto& b = streams[k].samples.samples[i];
      EXPECT_NEAR(a.w, b.w, 1e-15);
      EXPECT_NEAR(a.x, b.x, 1e-15);
      EXPECT_NEAR(a.y, b.y, 1e-15);
      EXPECT_NEAR(a.z, b.z, 1e-15);
    }
  }
}

TEST(PoseJson, MinimalFrame) {
  auto seq = parse_pose_json(R"({"trial_id":"t1","source":"pose33","rate":30,"camera_view":"frontal","frames":[)" +
                             six_landmarks() + "]}");
  EXPECT_EQ(seq.frames.size(), 1u);
  EXPECT_EQ(seq.source, SkeletonSource::Pose33);
  EXPECT_EQ(seq.camera_view, CameraView::Frontal);
  EXPECT_EQ(seq.trial_id, "t1");
}

TEST(PoseJson, ThirtyThreeLandmarksAccepted) {
  nlohmann::json frame = nlohmann::json::parse(six_landmarks());
  for (int i = 0; frame.size() < 33; ++i) frame["extra_" + std::to_string(i)] = {0.0, 0.0, 0.0};
  nlohmann::json doc{{"trial_id", "t"}, {"source", "pose33"}, {"rate", 30}, {"camera_view", "sagittal"},
                     {"frames", {frame}}};
  EXPECT_NO_THROW(parse_pose_json(doc.dump()));
  frame["one_too_many"] = {0.0, 0.0, 0.0};
  doc["frames"] = {frame};
  EXPECT_THROW(parse_pose_json(doc.dump()), InputError);
}

TEST(PoseJson, MissingLandmarkNamesFrame) {
  nlohmann::json ok = nlohmann::json::parse(six_landmarks());
  nlohmann::json bad = ok;
  bad.erase("left_knee");
  nlohmann::json doc{{"trial_id", "t"}, {"source", "pose33"}, {"rate", 30}, {"camera_view", "sagittal"},
                     {"frames", {ok, ok, ok, bad}}};
  const auto msg = message_of([&] { parse_pose_json(doc.dump()); });
  EXPECT_TRUE(contains(msg, "left_knee")) << msg;
  EXPECT_TRUE(contains(msg, "frame 3")) << msg;
}

TEST(PoseJson, UnknownSource) {
  const auto msg = message_of([] {
    parse_pose_json(R"({"trial_id":"t","source":"openpose","rate":30,"camera_view":"frontal","frames":[)" +
                    six_landmarks() + "]}");
  });
  EXPECT_TRUE(contains(msg, "unknown source tag")) << msg;
}

TEST(PoseJson, Mesh49AliasesApplied) {
  const std::string frame =
      R"({"Left Hip":[0.1,0,0],"Left Knee":[0.1,0,-0.45],"Left Ankle":[0.1,0,-0.9],)"
      R"("Right Hip":[-0.1,0,0],"Right Knee":[-0.1,0,-0.45],"Right Ankle":[-0.1,0,-0.9],"Nose":[0,0,0.6]})";
  auto seq =
      parse_pose_json(R"({"trial_id":"m","source":"mesh49","rate":25,"camera_view":"unknown","frames":[)" + frame + "]}");
  EXPECT_EQ(seq.source, SkeletonSource::Mesh49);
  EXPECT_TRUE(seq.frames[0].count("left_knee"));
  EXPECT_TRUE(seq.frames[0].count("Nose"));
}

TEST(PoseJson, RoundTrip) {
  std::string doc = R"({"trial_id":"t","source":"pose33","rate":30,"start_time":0.25,"camera_view":"sagittal","frames":[)" +
                    six_landmarks(0.1) + "," + six_landmarks(0.123456789012345) + "]}";
  auto a = parse_pose_json(doc);
  auto b = parse_pose_json(serialize_pose_json(a));
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.start_time, b.start_time);
  EXPECT_EQ(a.camera_view, b.camera_view);
  EXPECT_EQ(serialize_pose_json(a), serialize_pose_json(b));
}

TEST(Mesh49Aliases, ShippedFileMatchesBuiltIn) {
  EXPECT_EQ(load_alias_file(KINEMETRIC_DATA_DIR "/mesh49_aliases.json"), default_mesh49_aliases());
  EXPECT_THROW(load_alias_file(KINEMETRIC_DATA_DIR "/does_not_exist.json"), InputError);
}

TEST(JointCenters, Recipes) {
  MarkerTrajectorySet set;
  set.rate = 10;
  auto one = [](Point3 p) { return TimeSeries<Point3>{0, 10, {p}}; };
  set.markers["LGT"] = one({1, 2, 3});
  set.markers["LLFE"] = one({0, 0, 0});
  set.markers["LMFE"] = one({0.1, 0, 0});
  set.markers["LLM"] = one({0, 0, -1});
  set.markers["LMM"] = one({0.2, 0, -1});
  auto c = joint_centers(set, JointCenterConfig{}, Side::Left);
  EXPECT_EQ(c.hip.samples[0], (Point3{1, 2, 3}));
  EXPECT_NEAR(c.knee.samples[0].x, 0.05, 1e-15);
  EXPECT_EQ(c.knee.samples[0].y, 0);
  EXPECT_NEAR(c.ankle.samples[0].x, 0.1, 1e-15);

  const auto msg = message_of([&] { joint_centers(set, JointCenterConfig{}, Side::Right); });
  EXPECT_TRUE(contains(msg, "missing marker")) << msg;

  set.markers["RGT"] = one({0, 0, 0});
  set.markers["RLFE"] = one({0, 0, 0});
  set.markers["RMFE"] = one({0, 0, 0});
  set.markers["RLM"] = one({0, 0, 0});
  EXPECT_EQ(message_of([&] { joint_centers(set, JointCenterConfig{}, Side::Right); }), "missing marker RMM");
}

TEST(JointCenters, MidpointSymmetric) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 200; ++i) {
    Point3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    EXPECT_EQ(midpoint(a, b), midpoint(b, a));
  }
}
