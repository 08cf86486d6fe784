#ifndef MFPB_EVAL_HPP
#define MFPB_EVAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfpb/boost.hpp"
#include "mfpb/data.hpp"
#include "mfpb/errors.hpp"
#include "mfpb/metrics.hpp"

namespace mfpb {

struct EvalReport {
  double acc = 0.0;
  double wc_acc = 0.0;  // worst-class accuracy, min(TPR, TNR)
  double auc = 0.0;
  double gm = 0.0;  // sqrt(TPR * TNR)
  double tpr = 0.0;
  double tnr = 0.0;
  FairnessReport fairness;
};

/// Rank-statistic AUC: probability that a random positive outscores a random
/// negative, ties counted as one half.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ArgumentError("eval", "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  double n_pos = 0.0;
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k;
    while (end < n && scores[order[end]] == scores[order[k]]) ++end;
    // 1-based ranks k+1..end share their mean
    const double mid = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t q = k; q < end; ++q) {
      if (labels[order[q]] == 1) {
        pos_rank_sum += mid;
        n_pos += 1.0;
      }
    }
    k = end;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw DegenerateDataError("eval", "AUC needs both classes");
  return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

inline EvalReport evaluate_predictions(std::span<const int> predictions, std::span<const double> scores,
                                       const Dataset& ds) {
  if (predictions.size() != ds.size() || scores.size() != ds.size())
    throw ArgumentError("eval", "predictions are not aligned with the dataset");
  if (ds.positives() == 0 || ds.negatives() == 0)
    throw DegenerateDataError("eval", "evaluation set contains a single class");
  double correct = 0.0, tp = 0.0, tn = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const bool ok = predictions[i] == ds.label(i);
    correct += ok;
    if (ok) (ds.label(i) == 1 ? tp : tn) += 1.0;
  }
  EvalReport r;
  r.acc = correct / static_cast<double>(ds.size());
  r.tpr = tp / static_cast<double>(ds.positives());
  r.tnr = tn / static_cast<double>(ds.negatives());
  r.wc_acc = std::min(r.tpr, r.tnr);
  r.gm = std::sqrt(r.tpr * r.tnr);
  r.auc = auc(scores, ds.labels());
  r.fairness = evaluate_fairness(predictions, ds);
  return r;
}

inline EvalReport evaluate(const Ensemble& ensemble, const Dataset& ds,
                           std::size_t prefix = std::numeric_limits<std::size_t>::max()) {
  if (ensemble.empty()) throw ArgumentError("eval", "cannot evaluate an empty ensemble");
  std::vector<int> labels(ds.size());
  std::vector<double> scores(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto p = predict(ensemble, ds.row(i), prefix);
    labels[i] = p.label;
    scores[i] = p.score;
  }
  return evaluate_predictions(labels, scores, ds);
}

inline nlohmann::json to_json(const EvalReport& r) {
  auto fair = to_json(r.fairness);
  return {{"acc", r.acc},   {"wc_acc", r.wc_acc}, {"auc", r.auc},
          {"gm", r.gm},     {"tpr", r.tpr},       {"tnr", r.tnr},
          {"mmm", r.fairness.mmm}, {"per_attribute", fair["per_attribute"]}};
}

// ---------------------------------------------------------------------------
// Toy example: four hypothetical classifiers with fixed group error rates.

/// Groups are ordered [M, F, W, B]; F and B are the protected groups of the
/// Sex and Race attributes.
struct ToyClassifier {
  std::string name;
  std::array<double, 4> fnr;
  std::array<double, 4> fpr;

  GroupRates sex() const { return GroupRates::of(fpr[1], fnr[1], fpr[0], fnr[0]); }
  GroupRates race() const { return GroupRates::of(fpr[3], fnr[3], fpr[2], fnr[2]); }
};

inline std::vector<ToyClassifier> toy_classifiers() {
  return {
      {"Cf1", {0.6, 0.6, 0.4, 1.0}, {0.1, 0.1, 0.3, 0.0}},
      {"Cf2", {0.8, 0.8, 0.8, 0.8}, {0.1, 0.1, 0.1, 0.1}},
      {"Cf3", {0.2, 0.4, 0.2, 0.4}, {0.2, 0.2, 0.2, 0.2}},
      {"Cf4", {0.3, 0.2, 0.3, 0.2}, {0.3, 0.2, 0.2, 0.3}},
  };
}

struct ToyRow {
  std::string classifier;
  FairnessReport report;  // attributes: Sex, Race
};

struct ToyReport {
  std::vector<ToyRow> rows;
  std::vector<std::string> failures;  // violated ordering assertions

  bool ok() const { return failures.empty(); }
};

inline constexpr double kToyTolerance = 1e-12;

inline ToyReport toy_report() {
  ToyReport out;
  const std::vector<std::string> names{"Sex", "Race"};
  for (const auto& cf : toy_classifiers()) {
    const std::vector<GroupRates> rates{cf.sex(), cf.race()};
    out.rows.push_back({cf.name, fairness_from_rates(names, rates)});
  }

  auto fail = [&](const std::string& what) { out.failures.push_back(what); };
  const auto& r = out.rows;  // Cf1..Cf4
  const std::array<double, 4> expected_mmm{0.6, 0.0, 0.2, 0.1};
  for (std::size_t c = 0; c < 4; ++c) {
    if (std::abs(r[c].report.mmm - expected_mmm[c]) > kToyTolerance)
      fail("MMM(" + r[c].classifier + ") = " + std::to_string(r[c].report.mmm) + ", expected " +
           std::to_string(expected_mmm[c]));
  }
  // Cf2 is fairest under every measure.
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& cf2 = r[1].report.per_attribute[j];
    for (std::size_t c = 0; c < 4; ++c) {
      if (c == 1) continue;
      const auto& other = r[c].report.per_attribute[j];
      if (cf2.dm > other.dm + kToyTolerance || cf2.cdm > other.cdm + kToyTolerance)
        fail("Cf2 is not the fairest on " + cf2.attribute + " against " + r[c].classifier);
    }
  }
  for (std::size_t c = 0; c < 4; ++c)
    if (c != 1 && r[1].report.mmm > r[c].report.mmm + kToyTolerance) fail("MMM(Cf2) exceeds MMM(" + r[c].classifier + ")");
  // DM cannot tell Cf3 from Cf4; CDM can.
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& cf3 = r[2].report.per_attribute[j];
    const auto& cf4 = r[3].report.per_attribute[j];
    if (std::abs(cf3.dm - cf4.dm) > kToyTolerance) fail("DM(Cf3) != DM(Cf4) on " + cf3.attribute);
    if (!(cf4.cdm < cf3.cdm - kToyTolerance)) fail("CDM(Cf4) is not below CDM(Cf3) on " + cf3.attribute);
  }
  if (!(r[3].report.mmm < r[0].report.mmm)) fail("MMM(Cf4) is not below MMM(Cf1)");
  if (!(r[3].report.mmm < r[2].report.mmm)) fail("MMM(Cf4) is not below MMM(Cf3)");
  return out;
}

inline nlohmann::json to_json(const ToyReport& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    auto j = to_json(row.report);
    j["classifier"] = row.classifier;
    rows.push_back(j);
  }
  return {{"rows", rows}, {"failures", t.failures}, {"ok", t.ok()}};
}

// ---------------------------------------------------------------------------
// Synthetic biased data.

struct SynthParams {
  std::size_t n = 2000;
  double imbalance_ratio = 0.25;  // positives : negatives
  double bias_strength = 0.4;
  int k_attrs = 2;
  std::uint64_t seed = 1;
};

namespace detail {

struct SynthDesign {
  // Class-conditional probability of belonging to a protected group.
  static constexpr double p_protected_pos = 0.35;
  static constexpr double p_protected_neg = 0.45;
  // Relative bias of each attribute; the first one dominates.
  static constexpr std::array<double, 4> attribute_share{1.0, 0.5, 0.35, 0.25};
  static constexpr std::array<double, 3> class_means{1.6, 1.2, 0.8};
  // Quantization step of the continuous features.
  static constexpr double grid = 0.5;
  // The auxiliary feature is N(0,1) except for affected positives and a
  // fraction of "decoy" negatives, where it is N(aux_mean, aux_sd).
  static constexpr double aux_mean = 3.0;
  static constexpr double aux_sd = 0.5;
  static constexpr double decoy_rate = 0.08;
};

inline double quantize(double v) { return std::round(v / SynthDesign::grid) * SynthDesign::grid; }

}  // namespace detail

/// Imbalanced two-class data with k binary protected attributes.
///
/// Positives of protected group j are "affected" with probability
/// bias_strength * share_j: their informative features come from the
/// negative cluster, so a plain classifier misses them and shows a
/// false-negative gap of roughly the bias strength on the first attribute.
/// Affected positives also stand out on an auxiliary feature `z`, which they
/// share with a small fraction of negatives; `z` is therefore not worth using
/// for accuracy alone but lets a fairness-driven learner recover the affected
/// group. Group membership columns are appended as 0/1 features.
///
/// Any group/class cell left empty triggers regeneration with a derived seed.
inline Dataset synth_biased(const SynthParams& p) {
  if (p.n < 100) throw ArgumentError("eval", "synth_biased needs n >= 100");
  if (p.k_attrs < 1 || p.k_attrs > 4) throw ArgumentError("eval", "k_attrs must lie in 1..4");
  if (!(p.bias_strength >= 0.0 && p.bias_strength <= 1.0))
    throw ArgumentError("eval", "bias_strength must lie in [0,1]");
  if (!(p.imbalance_ratio > 0.0 && p.imbalance_ratio <= 1.0))
    throw ArgumentError("eval", "imbalance_ratio must lie in (0,1]");

  using D = detail::SynthDesign;
  const std::size_t k = static_cast<std::size_t>(p.k_attrs);
  const std::size_t informative = D::class_means.size();
  const std::size_t aux = informative;
  const std::size_t dims = informative + 1 + k;
  const auto n_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(p.n) * p.imbalance_ratio / (1.0 + p.imbalance_ratio)));

  std::vector<std::string> feature_names;
  for (std::size_t f = 0; f < informative; ++f) feature_names.push_back("x" + std::to_string(f));
  feature_names.push_back("z");
  std::vector<std::string> attribute_names;
  for (std::size_t j = 0; j < k; ++j) {
    attribute_names.push_back("S" + std::to_string(j + 1));
    feature_names.push_back("in_S" + std::to_string(j + 1));
  }

  std::string diagnostics;
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::mt19937_64 rng(p.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<int> labels(p.n, -1);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
    std::shuffle(labels.begin(), labels.end(), rng);

    std::vector<double> features(p.n * dims);
    std::vector<std::vector<std::uint8_t>> masks(k, std::vector<std::uint8_t>(p.n));
    for (std::size_t i = 0; i < p.n; ++i) {
      const int y = labels[i];
      bool affected = false;
      for (std::size_t j = 0; j < k; ++j) {
        masks[j][i] = unit(rng) < (y == 1 ? D::p_protected_pos : D::p_protected_neg) ? 1 : 0;
        const bool hit = unit(rng) < p.bias_strength * D::attribute_share[j];
        if (y == 1 && masks[j][i] && hit) affected = true;
      }
      const double side = affected ? -1.0 : static_cast<double>(y);
      double* row = features.data() + i * dims;
      for (std::size_t f = 0; f < informative; ++f) row[f] = detail::quantize(side * D::class_means[f] + gauss(rng));
      const bool decoy = y == -1 && unit(rng) < D::decoy_rate;
      row[aux] = detail::quantize((affected || decoy) ? D::aux_mean + D::aux_sd * gauss(rng) : gauss(rng));
      for (std::size_t j = 0; j < k; ++j) row[aux + 1 + j] = masks[j][i];
    }

    auto ds = Dataset::create(std::move(features), dims, std::move(labels), std::move(masks), feature_names,
                              attribute_names);
    bool empty_cell = false;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& c = ds.counts(j);
      if (c.protected_pos == 0 || c.unprotected_pos == 0 || c.protected_neg == 0 || c.unprotected_neg == 0) {
        empty_cell = true;
        diagnostics += "attempt " + std::to_string(attempt) + ": attribute " + attribute_names[j] +
                       " has an empty group/class cell; ";
      }
    }
    if (!empty_cell) return ds;
  }
  throw DegenerateDataError("eval", "synth_biased could not fill every group/class cell: " + diagnostics);
}

}  // namespace mfpb

#endif  // MFPB_EVAL_HPP
