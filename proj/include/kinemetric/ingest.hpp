#pragma once

// Readers and writers for the three capture formats:
//
//   marker CSV   line 1 "#rate=<Hz>,unit=<mm|m>[,key=value...]"
//                line 2 "time,<name>_x,<name>_y,<name>_z,..."
//                one row per frame, an empty cell is a gap
//   IMU CSV      line 1 "#rate=<Hz>[,key=value...]"
//                line 2 "time,<segment>_qw,<segment>_qx,<segment>_qy,<segment>_qz,..."
//   pose JSON    {trial_id, source, rate, camera_view, frames: [{landmark: [x,y,z]}, ...]}
//
// Parsers are pure functions of their input and throw InputError on
// malformed content.

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kinemetric/model.hpp"

namespace kinemetric {

/// Longest run of empty cells (per coordinate column) that is interpolated.
inline constexpr std::size_t kMaxGapFrames = 10;

enum class LengthUnit { Millimeters, Meters };

struct MarkerFileHeader {
  double rate = 0.0;
  LengthUnit unit = LengthUnit::Meters;
  std::vector<std::string> marker_names;
};

/// Column label -> canonical marker name.
using NameAliases = std::map<std::string, std::string>;

MarkerTrajectorySet parse_marker_csv(std::string_view bytes, const NameAliases& aliases = {},
                                     const std::string& trial_id = {});

/// `comment` is appended to the first line as extra key=value pairs.
std::string serialize_marker_csv(const MarkerTrajectorySet& set, LengthUnit unit = LengthUnit::Meters,
                                 const std::string& comment = {});

struct ImuParseResult {
  std::vector<QuaternionStream> streams;
  /// Samples whose norm deviated from 1 by more than 0.01 before normalization.
  std::size_t warning_count = 0;
};

ImuParseResult parse_imu_csv(std::string_view bytes, const std::string& trial_id = {});
std::string serialize_imu_csv(const std::vector<QuaternionStream>& streams,
                              const std::string& comment = {});

/// Default vendor-name -> canonical-name table for 49-joint mesh skeletons.
const NameAliases& default_mesh49_aliases();
/// Reads an alias table from a JSON object file ({"Right Hip": "right_hip", ...}).
NameAliases load_alias_file(const std::string& path);

SkeletonSequence parse_pose_json(std::string_view bytes,
                                 const NameAliases& mesh49_aliases = default_mesh49_aliases());
std::string serialize_pose_json(const SkeletonSequence& seq);

// ---------------------------------------------------------------------------
// Joint centers
// ---------------------------------------------------------------------------

struct MarkerRecipe {
  std::string marker;
};
struct MidpointRecipe {
  std::string first;
  std::string second;
};
using JointCenterRecipe = std::variant<MarkerRecipe, MidpointRecipe>;

struct SideRecipes {
  JointCenterRecipe hip;
  JointCenterRecipe knee;
  JointCenterRecipe ankle;
};

/// Hip: greater trochanter marker. Knee: epicondyle midpoint. Ankle: malleoli midpoint.
struct JointCenterConfig {
  SideRecipes left{MarkerRecipe{"LGT"}, MidpointRecipe{"LLFE", "LMFE"}, MidpointRecipe{"LLM", "LMM"}};
  SideRecipes right{MarkerRecipe{"RGT"}, MidpointRecipe{"RLFE", "RMFE"}, MidpointRecipe{"RLM", "RMM"}};

  const SideRecipes& for_side(Side s) const { return s == Side::Left ? left : right; }
};

struct JointCenterSeries {
  TimeSeries<Point3> hip;
  TimeSeries<Point3> knee;
  TimeSeries<Point3> ankle;
};

JointCenterSeries joint_centers(const MarkerTrajectorySet& set, const JointCenterConfig& config, Side side);

/// Hip/knee/ankle landmark tracks of one side of a skeleton sequence.
JointCenterSeries skeleton_joints(const SkeletonSequence& seq, Side side);

}  // namespace kinemetric
