#ifndef MFPB_BOOST_HPP
#define MFPB_BOOST_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfpb/data.hpp"
#include "mfpb/errors.hpp"
#include "mfpb/metrics.hpp"
#include "mfpb/stump.hpp"

namespace mfpb {

enum class BoostMode { multi_fair, vanilla };

inline std::string to_string(BoostMode m) { return m == BoostMode::multi_fair ? "multi_fair" : "vanilla"; }

inline BoostMode parse_mode(const std::string& s) {
  if (s == "multi_fair") return BoostMode::multi_fair;
  if (s == "vanilla") return BoostMode::vanilla;
  throw ArgumentError("boost", "unknown mode '" + s + "' (expected multi_fair or vanilla)");
}

struct HoldoutSplit {
  double fraction = 0.3;
  std::uint64_t seed = 0;
};

struct BoostConfig {
  int rounds = 500;
  BoostMode mode = BoostMode::multi_fair;
  // Objectives are evaluated on the training set unless a holdout is set.
  std::optional<HoldoutSplit> holdout;
  double alpha_cap = 0.5 * std::log(1e10);
  double epsilon_floor = 1e-10;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // 0 = hardware concurrency

  void validate() const {
    if (rounds < 1) throw ArgumentError("boost", "rounds must be >= 1");
    if (!(epsilon_floor > 0.0 && epsilon_floor < 0.5)) throw ArgumentError("boost", "epsilon_floor must lie in (0,0.5)");
    if (!(alpha_cap > 0.0)) throw ArgumentError("boost", "alpha_cap must be positive");
    if (holdout && !(holdout->fraction > 0.0 && holdout->fraction < 1.0))
      throw ArgumentError("boost", "holdout fraction must lie in (0,1)");
  }
};

struct EnsembleMember {
  Stump stump;
  double alpha = 0.0;
};

// A prefix of length t is the partial ensemble H_t.
struct Ensemble {
  std::vector<EnsembleMember> members;

  std::size_t size() const noexcept { return members.size(); }
  bool empty() const noexcept { return members.empty(); }

  // Unnormalized margin of the first `t` members, accumulated in member order.
  double margin(std::span<const double> x, std::size_t t) const {
    double m = 0.0;
    for (std::size_t l = 0; l < t; ++l) m += members[l].alpha * members[l].stump.predict(x);
    return m;
  }
};

inline int sign_label(double margin) { return margin >= 0.0 ? 1 : -1; }

struct Prediction {
  int label = 1;
  double score = 0.0;  // in [-1, 1]
};

/// Weighted vote of the first `prefix` members (all members by default).
inline Prediction predict(const Ensemble& ensemble, std::span<const double> x,
                          std::size_t prefix = std::numeric_limits<std::size_t>::max()) {
  const std::size_t t = std::min(prefix, ensemble.size());
  if (t == 0) throw ArgumentError("boost", "cannot predict with an empty ensemble");
  const double m = ensemble.margin(x, t);
  double total = 0.0;
  for (std::size_t l = 0; l < t; ++l) total += ensemble.members[l].alpha;
  return {sign_label(m), m / total};
}

inline std::vector<int> predict_labels(const Ensemble& ensemble, const Dataset& ds,
                                       std::size_t prefix = std::numeric_limits<std::size_t>::max()) {
  std::vector<int> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = predict(ensemble, ds.row(i), prefix).label;
  return out;
}

inline std::vector<double> predict_scores(const Ensemble& ensemble, const Dataset& ds,
                                          std::size_t prefix = std::numeric_limits<std::size_t>::max()) {
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = predict(ensemble, ds.row(i), prefix).score;
  return out;
}

/// Learner weight for a weighted error, with the error clamped into
/// [floor, 0.5 - floor] and the result capped. An error at or below the
/// floor gets the cap itself.
inline double alpha(double weighted_error, double epsilon_floor = 1e-10, double alpha_cap = 0.5 * std::log(1e10)) {
  if (weighted_error <= epsilon_floor) return alpha_cap;
  const double eps = std::clamp(weighted_error, epsilon_floor, 0.5 - epsilon_floor);
  return std::min(0.5 * std::log((1.0 - eps) / eps), alpha_cap);
}

// Signed group-rate differences of one attribute for a partial ensemble.
struct AttributeDeltas {
  double delta_fnr = 0.0;
  double delta_fpr = 0.0;
  bool undefined = false;  // some rate had an empty denominator

  double magnitude() const { return std::max(std::abs(delta_fnr), std::abs(delta_fpr)); }
};

inline std::vector<AttributeDeltas> deltas_from_predictions(std::span<const int> predictions, const Dataset& ds) {
  std::vector<AttributeDeltas> out;
  out.reserve(ds.attributes());
  for (std::size_t j = 0; j < ds.attributes(); ++j) {
    const auto r = group_rates(predictions, ds.labels(), ds.mask(j));
    out.push_back({r.delta_fnr(), r.delta_fpr(), r.has_undefined()});
  }
  return out;
}

inline std::vector<AttributeDeltas> cumulative_deltas(const Ensemble& prefix, const Dataset& ds) {
  if (prefix.empty()) throw ArgumentError("boost", "cumulative deltas need a non-empty ensemble");
  return deltas_from_predictions(predict_labels(prefix, ds), ds);
}

/// Per-attribute discrimination cost of one instance. The cost exceeds 1 only
/// when the instance belongs to the group that the current deltas show as
/// disadvantaged within its own class.
inline std::vector<double> discrimination_cost(int label, std::span<const std::uint8_t> in_protected,
                                               std::span<const AttributeDeltas> deltas) {
  if (in_protected.size() != deltas.size())
    throw ArgumentError("boost", "group memberships and deltas differ in length");
  std::vector<double> out(deltas.size(), 1.0);
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    const bool s = in_protected[j] != 0;
    const double d = label == 1 ? deltas[j].delta_fnr : deltas[j].delta_fpr;
    if ((d >= 0.0 && s) || (d <= 0.0 && !s)) out[j] = 1.0 + std::abs(d);
  }
  return out;
}

inline double fairness_cost(int label, std::span<const std::uint8_t> in_protected, int ensemble_prediction,
                            std::span<const AttributeDeltas> deltas) {
  if (deltas.empty()) throw ArgumentError("boost", "fairness cost needs at least one attribute");
  if (ensemble_prediction == label) return 1.0;
  const auto costs = discrimination_cost(label, in_protected, deltas);
  return *std::max_element(costs.begin(), costs.end());
}

/// D_t(i) = D_{t-1}(i) * fc(i) * exp(-alpha * s_i) / Z, where s_i is +1 when
/// the stump is right on instance i and -1 otherwise.
inline std::vector<double> update_distribution(std::span<const double> prev, std::span<const double> costs,
                                               double alpha, std::span<const int> stump_predictions,
                                               std::span<const int> labels) {
  const std::size_t n = prev.size();
  if (costs.size() != n || stump_predictions.size() != n || labels.size() != n)
    throw ArgumentError("boost", "distribution update inputs differ in length");
  const double up = std::exp(alpha);
  const double down = std::exp(-alpha);
  std::vector<double> next(n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    next[i] = prev[i] * costs[i] * (stump_predictions[i] == labels[i] ? down : up);
    z += next[i];
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw Error("boost", "normalization factor is not positive");
  for (auto& w : next) w /= z;
  return next;
}

struct TrainingTrace {
  Ensemble ensemble;
  std::vector<SolutionVector> solutions;
  // [round-1][attribute]
  std::vector<std::vector<AttributeDeltas>> fairness_deltas;
  std::vector<double> final_weights;
  BoostConfig config;
  std::vector<std::string> attribute_names;
  std::vector<std::string> feature_names;
  std::string stop_reason;  // empty when all rounds ran
};

/// What the training loop exposes after each completed round.
struct RoundView {
  int round;
  const Stump& stump;
  double alpha;
  std::span<const double> previous_distribution;
  std::span<const double> distribution;
  std::span<const double> costs;
  std::span<const int> stump_predictions;
  std::span<const int> ensemble_predictions;
  std::span<const AttributeDeltas> deltas;
};

using RoundObserver = std::function<void(const RoundView&)>;

/// Multi-fair boosting loop. Each round trains a stump on D_{t-1}, appends it
/// with its alpha, measures the cumulative deltas of H_t on the fitting set,
/// applies the fairness costs (all 1 in vanilla mode) in the distribution
/// update and records the objective vector of H_t.
inline TrainingTrace train(const Dataset& data, const BoostConfig& config, const RoundObserver& observer = {}) {
  config.validate();
  require_both_classes(data, "boost");

  Dataset fit_storage, eval_storage;
  const Dataset* fit = &data;
  const Dataset* eval = &data;
  if (config.holdout) {
    auto parts = split(data, config.holdout->fraction, config.holdout->seed);
    fit_storage = std::move(parts.train);
    eval_storage = std::move(parts.test);
    fit = &fit_storage;
    eval = &eval_storage;
    require_both_classes(*fit, "boost");
    require_both_classes(*eval, "boost");
  }

  const std::size_t n = fit->size();
  TrainingTrace trace;
  trace.config = config;
  trace.attribute_names = data.attribute_names();
  trace.feature_names = data.feature_names();

  std::vector<double> dist(n, 1.0 / static_cast<double>(n));
  std::vector<double> fit_margin(n, 0.0);
  std::vector<double> eval_margin(eval->size(), 0.0);
  std::vector<int> stump_pred(n), ens_pred(n), eval_pred(eval->size());
  std::vector<double> costs(n, 1.0);
  std::vector<std::uint8_t> groups(fit->attributes());
  const StumpTrainer trainer(*fit, config.threads);

  for (int t = 1; t <= config.rounds; ++t) {
    Stump h = trainer.fit(dist);
    const double eps = h.weighted_error;
    if (eps >= 0.5 - config.epsilon_floor) {
      if (t == 1)
        throw TrainingError("boost", "first weak learner is no better than chance (weighted error " +
                                         std::to_string(eps) + ")");
      trace.stop_reason = "round " + std::to_string(t) + ": weak learner error " + std::to_string(eps) +
                          " reached chance level";
      break;
    }
    const double a = alpha(eps, config.epsilon_floor, config.alpha_cap);
    trace.ensemble.members.push_back({h, a});

    for (std::size_t i = 0; i < n; ++i) {
      stump_pred[i] = h.predict(fit->row(i));
      fit_margin[i] += a * stump_pred[i];
      ens_pred[i] = sign_label(fit_margin[i]);
    }
    auto deltas = deltas_from_predictions(ens_pred, *fit);

    if (config.mode == BoostMode::multi_fair) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < groups.size(); ++j) groups[j] = fit->mask(j)[i];
        costs[i] = fairness_cost(fit->label(i), groups, ens_pred[i], deltas);
      }
    }
    auto next = update_distribution(dist, costs, a, stump_pred, fit->labels());

    if (eval == fit) {
      trace.solutions.push_back(objective_vector(ens_pred, *fit, t));
    } else {
      for (std::size_t i = 0; i < eval->size(); ++i) {
        eval_margin[i] += a * h.predict(eval->row(i));
        eval_pred[i] = sign_label(eval_margin[i]);
      }
      trace.solutions.push_back(objective_vector(eval_pred, *eval, t));
    }

    if (observer) observer({t, trace.ensemble.members.back().stump, a, dist, next, costs, stump_pred, ens_pred, deltas});
    trace.fairness_deltas.push_back(std::move(deltas));
    dist = std::move(next);
  }
  trace.final_weights = std::move(dist);
  return trace;
}

// Re-evaluates the objective vector of the first `t` members from scratch.
inline SolutionVector prefix_objectives(const Ensemble& ensemble, const Dataset& ds, std::size_t t) {
  return objective_vector(predict_labels(ensemble, ds, t), ds, static_cast<int>(t));
}

namespace detail {

inline nlohmann::json threshold_to_json(double t) {
  if (std::isinf(t)) return t < 0 ? "-inf" : "inf";
  return t;
}

inline double threshold_from_json(const nlohmann::json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  if (v == "inf") return std::numeric_limits<double>::infinity();
  throw ParseError("boost", path, "threshold must be a number, \"inf\" or \"-inf\"");
}

}  // namespace detail

inline nlohmann::json config_to_json(const BoostConfig& c) {
  nlohmann::json j{{"rounds", c.rounds},
                   {"mode", to_string(c.mode)},
                   {"alpha_cap", c.alpha_cap},
                   {"epsilon_floor", c.epsilon_floor},
                   {"seed", c.seed}};
  if (c.holdout) {
    j["objective_split"] = {{"kind", "holdout"}, {"fraction", c.holdout->fraction}, {"seed", c.holdout->seed}};
  } else {
    j["objective_split"] = {{"kind", "train"}};
  }
  return j;
}

/// Model file: config echo, ordered stumps, per-round solutions and deltas.
/// Rounds are 1-based.
inline nlohmann::json model_to_json(const TrainingTrace& trace) {
  nlohmann::json stumps = nlohmann::json::array();
  for (const auto& m : trace.ensemble.members) {
    stumps.push_back({{"feature", m.stump.feature_index},
                      {"threshold", detail::threshold_to_json(m.stump.threshold)},
                      {"polarity", m.stump.polarity},
                      {"alpha", m.alpha}});
  }
  nlohmann::json solutions = nlohmann::json::array();
  for (const auto& s : trace.solutions) solutions.push_back({{"round", s.round}, {"o1", s.o1}, {"o2", s.o2}, {"o3", s.o3}});
  nlohmann::json deltas = nlohmann::json::array();
  for (std::size_t t = 0; t < trace.fairness_deltas.size(); ++t) {
    nlohmann::json attrs = nlohmann::json::array();
    for (std::size_t j = 0; j < trace.fairness_deltas[t].size(); ++j) {
      const auto& d = trace.fairness_deltas[t][j];
      attrs.push_back({{"attribute", j < trace.attribute_names.size() ? trace.attribute_names[j] : ""},
                       {"delta_fnr", d.delta_fnr},
                       {"delta_fpr", d.delta_fpr},
                       {"undefined", d.undefined}});
    }
    deltas.push_back({{"round", t + 1}, {"attributes", attrs}});
  }
  return {{"config", config_to_json(trace.config)},
          {"feature_names", trace.feature_names},
          {"attribute_names", trace.attribute_names},
          {"stumps", stumps},
          {"solutions", solutions},
          {"fairness_deltas", deltas},
          {"stop_reason", trace.stop_reason}};
}

inline Ensemble ensemble_from_json(const nlohmann::json& model) {
  if (!model.is_object() || !model.contains("stumps") || !model.at("stumps").is_array())
    throw ParseError("boost", "/stumps", "expected an array of stump records");
  Ensemble e;
  const auto& stumps = model.at("stumps");
  for (std::size_t i = 0; i < stumps.size(); ++i) {
    const std::string base = "/stumps/" + std::to_string(i);
    const auto& rec = stumps[i];
    for (const char* key : {"feature", "threshold", "polarity", "alpha"})
      if (!rec.contains(key)) throw ParseError("boost", base, std::string("missing key '") + key + "'");
    if (!rec.at("feature").is_number_unsigned()) throw ParseError("boost", base + "/feature", "expected an index");
    if (!rec.at("alpha").is_number()) throw ParseError("boost", base + "/alpha", "expected a number");
    const int pol = rec.at("polarity").is_number_integer() ? rec.at("polarity").get<int>() : 0;
    if (pol != 1 && pol != -1) throw ParseError("boost", base + "/polarity", "expected +1 or -1");
    EnsembleMember m;
    m.stump.feature_index = rec.at("feature").get<std::size_t>();
    m.stump.threshold = detail::threshold_from_json(rec.at("threshold"), base + "/threshold");
    m.stump.polarity = pol;
    m.alpha = rec.at("alpha").get<double>();
    e.members.push_back(m);
  }
  return e;
}

}  // namespace mfpb

#endif  // MFPB_BOOST_HPP
