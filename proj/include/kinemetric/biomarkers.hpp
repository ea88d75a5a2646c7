#pragma once

// Per-trial clinical metrics (min/max/ROM) and the modality agreement
// statistics built on top of them.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kinemetric/model.hpp"
#include "kinemetric/stats.hpp"

namespace kinemetric {

enum class Metric { Min, Max, Rom };

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view s);
double metric_value(const BiomarkerSet& b, Metric m);

BiomarkerSet extract_biomarkers(const AngleSeries& s, const TrialMeta& meta);

/// Samples of two same-rate series that fall on the same time instants.
struct PairedSamples {
  std::vector<double> a;
  std::vector<double> b;
};

PairedSamples pair_samples(const ScalarSeries& a, const ScalarSeries& b);

struct BiomarkerDeltas {
  double min = 0.0;  // a - b
  double max = 0.0;
  double rom = 0.0;
};

struct AgreementReport {
  Modality a = Modality::Mocap;
  Modality b = Modality::Imu;
  Side side = Side::Left;
  int lag = 0;
  BlandAltman bland_altman;  // differences a - b
  double mae = 0.0;
  double mse_signed = 0.0;
  std::optional<double> pearson;  // undefined for constant series
  BiomarkerDeltas deltas;
};

/// Agreement between two series already on a common rate and time base.
AgreementReport compare_pair(const AngleSeries& a, const AngleSeries& b);

struct ModalityPair {
  Modality a;
  Modality b;
  friend bool operator==(const ModalityPair&, const ModalityPair&) = default;
};

struct TrialComparison {
  TrialMeta meta;
  std::string trial_id;
  std::optional<CameraView> camera_view;  // from the skeleton modality, when present
  /// Keyed by (modality, side).
  std::map<std::pair<Modality, Side>, BiomarkerSet> biomarkers;
  std::vector<AgreementReport> pairs;
};

Violation validate(const TrialComparison& t);

struct PopulationResult {
  TTestResult ttest;
  std::optional<double> pearson;
  std::size_t participants = 0;
};

/// Paired comparison of `metric` between the two modalities of `pair` across
/// participants. Repetitions are averaged per participant first; only
/// participants with both modalities contribute.
PopulationResult population_tests(const std::vector<TrialComparison>& trials, Action action, Joint joint, Side side,
                                  Metric metric, ModalityPair pair);

/// Participant-averaged metric vectors used by population_tests, ordered by participant id.
PairedSamples population_vectors(const std::vector<TrialComparison>& trials, Action action, Joint joint, Side side,
                                 Metric metric, ModalityPair pair);

}  // namespace kinemetric
