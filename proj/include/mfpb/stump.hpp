#ifndef MFPB_STUMP_HPP
#define MFPB_STUMP_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

#include "mfpb/data.hpp"
#include "mfpb/errors.hpp"

namespace mfpb {

/// Depth-one decision tree: predicts `polarity` when
/// x[feature_index] > threshold and -polarity otherwise.
struct Stump {
  std::size_t feature_index = 0;
  double threshold = -std::numeric_limits<double>::infinity();
  int polarity = 1;
  double weighted_error = 0.0;

  int predict(std::span<const double> x) const {
    if (feature_index >= x.size()) throw ArgumentError("stump", "feature index out of range");
    return x[feature_index] > threshold ? polarity : -polarity;
  }
};

inline int predict_stump(const Stump& stump, std::span<const double> x) { return stump.predict(x); }

// Errors closer than this to the minimum are treated as ties; the tie is then
// resolved by (feature, threshold, polarity) order.
inline constexpr double kStumpTieTolerance = 1e-12;

// Weighted 0-1 error of a stump under `weights`, summed in instance order.
inline double stump_error(const Stump& s, const Dataset& ds, std::span<const double> weights) {
  double err = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (s.predict(ds.row(i)) != ds.label(i)) err += weights[i];
  return err;
}

inline void check_distribution(std::span<const double> weights, std::size_t n, const char* module) {
  if (weights.size() != n) throw ArgumentError(module, "weight vector length differs from instance count");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError(module, "weights must be finite and non-negative");
    sum += w;
  }
  if (sum == 0.0) throw ArgumentError(module, "all weights are zero");
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError(module, "weights must sum to 1");
}

/// Exhaustive stump search that sorts every feature column once and reuses
/// the orderings across calls with different weight vectors.
class StumpTrainer {
 public:
  explicit StumpTrainer(const Dataset& ds, unsigned threads = 1) : ds_(&ds), threads_(threads) {
    const std::size_t n = ds.size();
    order_.resize(ds.dims());
    for (std::size_t f = 0; f < ds.dims(); ++f) {
      auto& ord = order_[f];
      ord.resize(n);
      std::iota(ord.begin(), ord.end(), std::size_t{0});
      std::stable_sort(ord.begin(), ord.end(),
                       [&](std::size_t a, std::size_t b) { return ds.feature(a, f) < ds.feature(b, f); });
    }
  }

  Stump fit(std::span<const double> weights) const {
    const Dataset& ds = *ds_;
    check_distribution(weights, ds.size(), "stump");

    double pos_total = 0.0, neg_total = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) (ds.label(i) == 1 ? pos_total : neg_total) += weights[i];

    // Candidates per feature, in ascending threshold order with polarity +1
    // before -1 at equal threshold.
    std::vector<std::vector<Candidate>> per_feature(ds.dims());
    auto scan = [&](std::size_t f) { per_feature[f] = scan_feature(f, weights, pos_total, neg_total); };

    const unsigned workers = std::max(1u, std::min<unsigned>(resolve_threads(), static_cast<unsigned>(ds.dims())));
    if (workers <= 1) {
      for (std::size_t f = 0; f < ds.dims(); ++f) scan(f);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::size_t f = w; f < ds.dims(); f += workers) scan(f);
        });
      }
      for (auto& t : pool) t.join();
    }

    Stump best;
    if (ds.dims() == 0) {
      // No features: constant rule for the heavier class.
      best.polarity = pos_total > neg_total ? 1 : -1;
      best.weighted_error = stump_error(best, ds, weights);
      return best;
    }
    double min_err = std::numeric_limits<double>::infinity();
    for (const auto& cands : per_feature)
      for (const auto& c : cands) min_err = std::min(min_err, c.error);
    bool found = false;
    for (std::size_t f = 0; f < per_feature.size() && !found; ++f) {
      for (const auto& c : per_feature[f]) {
        if (c.error <= min_err + kStumpTieTolerance) {
          best.feature_index = f;
          best.threshold = c.threshold;
          best.polarity = c.polarity;
          found = true;
          break;
        }
      }
    }
    best.weighted_error = stump_error(best, ds, weights);
    return best;
  }

 private:
  struct Candidate {
    double threshold;
    int polarity;
    double error;
  };

  unsigned resolve_threads() const {
    if (threads_ != 0) return threads_;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  std::vector<Candidate> scan_feature(std::size_t f, std::span<const double> weights, double pos_total,
                                      double neg_total) const {
    const Dataset& ds = *ds_;
    const auto& ord = order_[f];
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<Candidate> out;
    out.reserve(2 * ord.size() + 4);

    // With threshold t, instances with x <= t get -polarity.
    // polarity +1 error = (pos weight at or below t) + (neg weight above t).
    auto push = [&](double t, double pos_below, double neg_below) {
      out.push_back({t, 1, pos_below + (neg_total - neg_below)});
      out.push_back({t, -1, neg_below + (pos_total - pos_below)});
    };
    push(-inf, 0.0, 0.0);
    double pos_below = 0.0, neg_below = 0.0;
    std::size_t k = 0;
    while (k < ord.size()) {
      const double v = ds.feature(ord[k], f);
      while (k < ord.size() && ds.feature(ord[k], f) == v) {
        const std::size_t i = ord[k];
        (ds.label(i) == 1 ? pos_below : neg_below) += weights[i];
        ++k;
      }
      if (k < ord.size()) {
        const double next = ds.feature(ord[k], f);
        double mid = v + (next - v) / 2.0;
        if (!(mid < next)) mid = v;
        push(mid, pos_below, neg_below);
      }
    }
    push(inf, pos_total, neg_total);
    return out;
  }

  const Dataset* ds_;
  unsigned threads_;
  std::vector<std::vector<std::size_t>> order_;
};

inline Stump train_stump(const Dataset& ds, std::span<const double> weights, unsigned threads = 1) {
  return StumpTrainer(ds, threads).fit(weights);
}

}  // namespace mfpb

#endif  // MFPB_STUMP_HPP
