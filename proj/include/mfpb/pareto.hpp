#ifndef MFPB_PARETO_HPP
#define MFPB_PARETO_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfpb/errors.hpp"
#include "mfpb/metrics.hpp"

namespace mfpb {

using Weights3 = std::array<double, 3>;

struct ParetoEntry {
  SolutionVector solution;
  Weights3 pseudo_weight{0.0, 0.0, 0.0};
};

struct ParetoFront {
  std::vector<ParetoEntry> entries;  // sorted by round
  std::size_t source_count = 0;
};

// a dominates b: no worse in every objective and strictly better in one.
inline bool dominates(const SolutionVector& a, const SolutionVector& b) {
  bool strict = false;
  for (std::size_t i = 0; i < 3; ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

inline bool same_objectives(const SolutionVector& a, const SolutionVector& b) {
  return a.o1 == b.o1 && a.o2 == b.o2 && a.o3 == b.o3;
}

/// Non-dominated subset of `solutions`. Identical objective vectors collapse
/// onto the earliest round.
inline ParetoFront pareto_front(std::span<const SolutionVector> solutions) {
  if (solutions.empty()) throw ArgumentError("pareto", "cannot build a front from no solutions");
  std::vector<SolutionVector> sorted(solutions.begin(), solutions.end());
  // Lexicographic order guarantees a dominator always precedes what it dominates.
  std::sort(sorted.begin(), sorted.end(), [](const SolutionVector& a, const SolutionVector& b) {
    if (a.o1 != b.o1) return a.o1 < b.o1;
    if (a.o2 != b.o2) return a.o2 < b.o2;
    if (a.o3 != b.o3) return a.o3 < b.o3;
    return a.round < b.round;
  });
  std::vector<SolutionVector> kept;
  for (const auto& s : sorted) {
    bool drop = false;
    for (const auto& k : kept) {
      if (dominates(k, s) || same_objectives(k, s)) {
        drop = true;
        break;
      }
    }
    if (!drop) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.round < b.round; });

  ParetoFront front;
  front.source_count = solutions.size();
  for (const auto& s : kept) front.entries.push_back({s, {0.0, 0.0, 0.0}});
  return front;
}

/// Fills the pseudo-weight of every entry: for each objective the relative
/// distance from the worst value in the front, normalized to sum to one.
/// Objectives that are constant over the front contribute nothing; a front
/// where every objective is constant gets uniform weights.
inline ParetoFront pseudo_weights(ParetoFront front) {
  if (front.entries.empty()) return front;
  std::array<double, 3> lo{}, hi{};
  for (std::size_t i = 0; i < 3; ++i) {
    lo[i] = hi[i] = front.entries.front().solution[i];
    for (const auto& e : front.entries) {
      lo[i] = std::min(lo[i], e.solution[i]);
      hi[i] = std::max(hi[i], e.solution[i]);
    }
  }
  for (auto& e : front.entries) {
    Weights3 terms{0.0, 0.0, 0.0};
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      if (hi[i] > lo[i]) terms[i] = (hi[i] - e.solution[i]) / (hi[i] - lo[i]);
      sum += terms[i];
    }
    if (sum > 0.0) {
      for (std::size_t i = 0; i < 3; ++i) e.pseudo_weight[i] = terms[i] / sum;
    } else {
      e.pseudo_weight = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    }
  }
  return front;
}

/// User preference over (O1, O2, O3). Components must be non-negative; they
/// are rescaled to sum to one, and an all-zero vector means "no preference".
class PreferenceVector {
 public:
  PreferenceVector() : u_{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0} {}

  explicit PreferenceVector(Weights3 raw) {
    double sum = 0.0;
    for (double v : raw) {
      if (!std::isfinite(v) || v < 0.0) throw ArgumentError("pareto", "preference components must be >= 0");
      sum += v;
    }
    if (sum == 0.0) {
      u_ = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    } else {
      for (std::size_t i = 0; i < 3; ++i) u_[i] = raw[i] / sum;
    }
  }

  const Weights3& values() const noexcept { return u_; }
  double operator[](std::size_t i) const { return u_[i]; }

 private:
  Weights3 u_;
};

inline double l1_distance(const Weights3& a, const Weights3& b) {
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]) + std::abs(a[2] - b[2]);
}

struct Selection {
  std::size_t entry = 0;  // index into front.entries
  int round = 0;
  SolutionVector solution;
  double distance = 0.0;
};

// Entry whose pseudo-weight is L1-nearest to the preference; ties go to the
// smallest round.
inline Selection select(const ParetoFront& front, const PreferenceVector& preference) {
  if (front.entries.empty()) throw ArgumentError("pareto", "cannot select from an empty front");
  Selection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < front.entries.size(); ++k) {
    const auto& e = front.entries[k];
    const double d = l1_distance(e.pseudo_weight, preference.values());
    if (d < best.distance || (d == best.distance && e.solution.round < best.round)) {
      best = {k, e.solution.round, e.solution, d};
    }
  }
  return best;
}

inline ParetoFront build_front(std::span<const SolutionVector> solutions, int burn_in = 0) {
  if (burn_in < 0) throw ArgumentError("pareto", "burn-in must be >= 0");
  std::vector<SolutionVector> kept;
  for (const auto& s : solutions)
    if (s.round > burn_in) kept.push_back(s);
  if (kept.empty()) throw ArgumentError("pareto", "burn-in removes every round");
  return pseudo_weights(pareto_front(kept));
}

}  // namespace mfpb

#endif  // MFPB_PARETO_HPP
