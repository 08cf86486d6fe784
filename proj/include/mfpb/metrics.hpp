#ifndef MFPB_METRICS_HPP
#define MFPB_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfpb/data.hpp"
#include "mfpb/errors.hpp"

namespace mfpb {

/// Error rates of one protected attribute, split by protected (s) and
/// non-protected (ns) group. A rate is empty when its group has no instance
/// of the conditioning class; such rates count as 0 in every aggregate.
struct GroupRates {
  std::optional<double> fpr_s;
  std::optional<double> fnr_s;
  std::optional<double> fpr_ns;
  std::optional<double> fnr_ns;

  static GroupRates of(double fpr_s, double fnr_s, double fpr_ns, double fnr_ns) {
    return {fpr_s, fnr_s, fpr_ns, fnr_ns};
  }

  double delta_fpr() const { return fpr_s.value_or(0.0) - fpr_ns.value_or(0.0); }
  double delta_fnr() const { return fnr_s.value_or(0.0) - fnr_ns.value_or(0.0); }
  bool has_undefined() const { return !fpr_s || !fnr_s || !fpr_ns || !fnr_ns; }
};

inline GroupRates group_rates(std::span<const int> predictions, std::span<const int> labels,
                              std::span<const std::uint8_t> mask) {
  if (predictions.size() != labels.size() || labels.size() != mask.size())
    throw ArgumentError("metrics", "predictions, labels and mask must have equal length");
  // [group][class]: group 0 = protected, class 0 = positive
  double wrong[2][2] = {{0, 0}, {0, 0}};
  double total[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int g = mask[i] ? 0 : 1;
    const int c = labels[i] == 1 ? 0 : 1;
    total[g][c] += 1.0;
    if (predictions[i] != labels[i]) wrong[g][c] += 1.0;
  }
  auto rate = [&](int g, int c) -> std::optional<double> {
    if (total[g][c] == 0.0) return std::nullopt;
    return wrong[g][c] / total[g][c];
  };
  return {rate(0, 1), rate(0, 0), rate(1, 1), rate(1, 0)};
}

// Disparate mistreatment: |dFPR| + |dFNR|.
inline double dm(const GroupRates& r) { return std::abs(r.delta_fpr()) + std::abs(r.delta_fnr()); }

// Class-aware disparate mistreatment: difference of the within-group
// |FPR - FNR| gaps.
inline double cdm(const GroupRates& r) {
  const double gap_s = std::abs(r.fpr_s.value_or(0.0) - r.fnr_s.value_or(0.0));
  const double gap_ns = std::abs(r.fpr_ns.value_or(0.0) - r.fnr_ns.value_or(0.0));
  return std::abs(gap_s - gap_ns);
}

inline constexpr double kClassBiasTolerance = 1e-9;

// CDM == DM > 0 marks mistreatment concentrated on opposite classes for the
// two groups.
inline bool class_biased(const GroupRates& r, double tol = kClassBiasTolerance) {
  const double d = dm(r);
  return std::abs(cdm(r) - d) <= tol && d > tol;
}

inline double mistreatment(const GroupRates& r) {
  return std::max(std::abs(r.delta_fnr()), std::abs(r.delta_fpr()));
}

// Multi-max mistreatment over all protected attributes.
inline double mmm(std::span<const GroupRates> all_rates) {
  if (all_rates.empty()) throw ArgumentError("metrics", "mmm needs at least one attribute");
  double worst = 0.0;
  for (const auto& r : all_rates) worst = std::max(worst, mistreatment(r));
  return worst;
}

/// Objective triple of one partial ensemble: 0-1 loss, balanced loss and
/// MMM loss. `round` is 1-based.
struct SolutionVector {
  double o1 = 0.0;
  double o2 = 0.0;
  double o3 = 0.0;
  int round = 0;

  double operator[](std::size_t i) const { return i == 0 ? o1 : (i == 1 ? o2 : o3); }
  friend bool operator==(const SolutionVector&, const SolutionVector&) = default;
};

inline SolutionVector objective_vector(std::span<const int> predictions, const Dataset& ds, int round) {
  if (predictions.size() != ds.size())
    throw ArgumentError("metrics", "predictions are not aligned with the dataset");
  require_both_classes(ds, "metrics");
  const auto labels = ds.labels();

  double wrong = 0.0, wrong_pos = 0.0, wrong_neg = 0.0;
  double n_pos = 0.0, n_neg = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool err = predictions[i] != labels[i];
    wrong += err;
    if (labels[i] == 1) {
      n_pos += 1.0;
      wrong_pos += err;
    } else {
      n_neg += 1.0;
      wrong_neg += err;
    }
  }

  SolutionVector sv;
  sv.round = round;
  sv.o1 = wrong / static_cast<double>(labels.size());
  sv.o2 = std::abs(wrong_pos / n_pos - wrong_neg / n_neg);

  // Per attribute and class, errors are weighted by the signed reciprocal of
  // the instance's group-class cell size (+ for protected, - otherwise), so
  // the class sum is the signed rate difference of that class.
  double worst = 0.0;
  for (std::size_t j = 0; j < ds.attributes(); ++j) {
    const auto& c = ds.counts(j);
    double sum_pos = 0.0, sum_neg = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (predictions[i] == labels[i]) continue;
      const bool s = ds.in_protected(j, i);
      if (labels[i] == 1) {
        const double cell = static_cast<double>(s ? c.protected_pos : c.unprotected_pos);
        sum_pos += (s ? 1.0 : -1.0) / cell;
      } else {
        const double cell = static_cast<double>(s ? c.protected_neg : c.unprotected_neg);
        sum_neg += (s ? 1.0 : -1.0) / cell;
      }
    }
    worst = std::max({worst, std::abs(sum_pos), std::abs(sum_neg)});
  }
  sv.o3 = worst;
  return sv;
}

struct AttributeFairness {
  std::string attribute;
  GroupRates rates;
  double dm = 0.0;
  double cdm = 0.0;
  bool class_biased = false;
};

struct FairnessReport {
  std::vector<AttributeFairness> per_attribute;
  double mmm = 0.0;

  bool mmm_fair(double mu) const { return mmm <= mu; }
  bool has_undefined() const {
    return std::any_of(per_attribute.begin(), per_attribute.end(),
                       [](const auto& a) { return a.rates.has_undefined(); });
  }
};

inline FairnessReport fairness_from_rates(std::span<const std::string> names, std::span<const GroupRates> rates,
                                          double tol = kClassBiasTolerance) {
  if (names.size() != rates.size()) throw ArgumentError("metrics", "attribute names and rates differ in length");
  FairnessReport report;
  for (std::size_t j = 0; j < rates.size(); ++j)
    report.per_attribute.push_back({names[j], rates[j], dm(rates[j]), cdm(rates[j]), class_biased(rates[j], tol)});
  report.mmm = mmm(rates);
  return report;
}

inline FairnessReport evaluate_fairness(std::span<const int> predictions, const Dataset& ds,
                                        double tol = kClassBiasTolerance) {
  std::vector<GroupRates> rates;
  for (std::size_t j = 0; j < ds.attributes(); ++j) rates.push_back(group_rates(predictions, ds.labels(), ds.mask(j)));
  return fairness_from_rates(ds.attribute_names(), rates, tol);
}

inline nlohmann::json to_json(const FairnessReport& report) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    if (v) return *v;
    return nullptr;
  };
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : report.per_attribute) {
    attrs.push_back({{"attribute", a.attribute},
                     {"fpr_s", opt(a.rates.fpr_s)},
                     {"fnr_s", opt(a.rates.fnr_s)},
                     {"fpr_ns", opt(a.rates.fpr_ns)},
                     {"fnr_ns", opt(a.rates.fnr_ns)},
                     {"delta_fpr", a.rates.delta_fpr()},
                     {"delta_fnr", a.rates.delta_fnr()},
                     {"dm", a.dm},
                     {"cdm", a.cdm},
                     {"class_biased", a.class_biased},
                     {"undefined_rates", a.rates.has_undefined()}});
  }
  return {{"per_attribute", attrs}, {"mmm", report.mmm}};
}

}  // namespace mfpb

#endif  // MFPB_METRICS_HPP
