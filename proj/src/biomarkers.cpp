#include "kinemetric/biomarkers.hpp"

#include <algorithm>
#include <cmath>

#include "kinemetric/error.hpp"

namespace kinemetric {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Min: return "min";
    case Metric::Max: return "max";
    case Metric::Rom: return "rom";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "min") return Metric::Min;
  if (s == "max") return Metric::Max;
  if (s == "rom") return Metric::Rom;
  return std::nullopt;
}

double metric_value(const BiomarkerSet& b, Metric m) {
  switch (m) {
    case Metric::Min: return b.min_angle;
    case Metric::Max: return b.max_angle;
    case Metric::Rom: return b.rom;
  }
  return b.rom;
}

BiomarkerSet extract_biomarkers(const AngleSeries& s, const TrialMeta& meta) {
  if (s.series.empty()) throw DegenerateError("biomarkers: empty angle series");
  const auto [lo, hi] = std::minmax_element(s.series.samples.begin(), s.series.samples.end());
  auto b = BiomarkerSet::from_extremes(*lo, *hi);
  b.joint = s.joint;
  b.side = s.side;
  b.modality = s.modality;
  b.action = meta.action;
  return b;
}

PairedSamples pair_samples(const ScalarSeries& a, const ScalarSeries& b) {
  if (a.rate != b.rate) throw InputError("pairing requires a common sampling rate");
  const double shift = (b.start_time - a.start_time) * a.rate;
  const double offset_d = std::round(shift);
  if (std::abs(shift - offset_d) > 1e-6) throw InputError("series do not share a time grid");
  const auto offset = static_cast<long long>(offset_d);  // b[j] sits at a index j + offset
  PairedSamples out;
  const auto na = static_cast<long long>(a.size());
  const auto nb = static_cast<long long>(b.size());
  for (long long i = std::max(0LL, offset); i < std::min(na, nb + offset); ++i) {
    out.a.push_back(a.samples[static_cast<std::size_t>(i)]);
    out.b.push_back(b.samples[static_cast<std::size_t>(i - offset)]);
  }
  return out;
}

AgreementReport compare_pair(const AngleSeries& a, const AngleSeries& b) {
  const auto paired = pair_samples(a.series, b.series);
  if (paired.a.size() < 2)
    throw DegenerateError("compare " + std::string(to_string(a.modality)) + "/" + std::string(to_string(b.modality)) +
                          ": fewer than 2 overlapping samples");
  AgreementReport r;
  r.a = a.modality;
  r.b = b.modality;
  r.side = a.side;
  r.bland_altman = bland_altman(paired.a, paired.b);
  r.mae = mae(paired.a, paired.b);
  r.mse_signed = mse_signed(paired.a, paired.b);
  try {
    r.pearson = pearson(paired.a, paired.b);
  } catch (const DegenerateError&) {
    r.pearson.reset();
  }
  const auto [alo, ahi] = std::minmax_element(paired.a.begin(), paired.a.end());
  const auto [blo, bhi] = std::minmax_element(paired.b.begin(), paired.b.end());
  const auto ba = BiomarkerSet::from_extremes(*alo, *ahi);
  const auto bb = BiomarkerSet::from_extremes(*blo, *bhi);
  r.deltas = {ba.min_angle - bb.min_angle, ba.max_angle - bb.max_angle, ba.rom - bb.rom};
  return r;
}

Violation validate(const TrialComparison& t) {
  if (auto v = validate(t.meta)) return v;
  for (const auto& p : t.pairs) {
    if (p.a == p.b) return "pair compares " + std::string(to_string(p.a)) + " with itself";
    if (!t.biomarkers.count({p.a, p.side}) || !t.biomarkers.count({p.b, p.side}))
      return "pair references a modality missing from the trial";
  }
  for (const auto& [key, b] : t.biomarkers)
    if (auto v = validate(b)) return v;
  return std::nullopt;
}

PairedSamples population_vectors(const std::vector<TrialComparison>& trials, Action action, Joint joint, Side side,
                                 Metric metric, ModalityPair pair) {
  struct Acc {
    double sum_a = 0.0, sum_b = 0.0;
    int n = 0;
  };
  std::map<std::string, Acc> by_participant;  // ordered by participant id
  for (const auto& t : trials) {
    if (t.meta.action != action) continue;
    const auto ia = t.biomarkers.find({pair.a, side});
    const auto ib = t.biomarkers.find({pair.b, side});
    if (ia == t.biomarkers.end() || ib == t.biomarkers.end()) continue;
    if (ia->second.joint != joint || ib->second.joint != joint) continue;
    auto& acc = by_participant[t.meta.participant_id];
    acc.sum_a += metric_value(ia->second, metric);
    acc.sum_b += metric_value(ib->second, metric);
    ++acc.n;
  }
  PairedSamples out;
  for (const auto& [id, acc] : by_participant) {
    out.a.push_back(acc.sum_a / acc.n);
    out.b.push_back(acc.sum_b / acc.n);
  }
  return out;
}

PopulationResult population_tests(const std::vector<TrialComparison>& trials, Action action, Joint joint, Side side,
                                  Metric metric, ModalityPair pair) {
  const auto v = population_vectors(trials, action, joint, side, metric, pair);
  if (v.a.size() < 2)
    throw DegenerateError("insufficient data: " + std::to_string(v.a.size()) + " participant(s) with both " +
                          std::string(to_string(pair.a)) + " and " + std::string(to_string(pair.b)));
  PopulationResult r;
  r.participants = v.a.size();
  r.ttest = paired_t_test(v.a, v.b);
  try {
    r.pearson = pearson(v.a, v.b);
  } catch (const DegenerateError&) {
    r.pearson.reset();
  }
  return r;
}

}  // namespace kinemetric
