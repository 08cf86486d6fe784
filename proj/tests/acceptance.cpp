// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: mfpb_acceptance [--work-dir DIR]
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "mfpb/cli.hpp"
#include "oracles.hpp"

using namespace mfpb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(3);
  line << (o.pass ? "PASS" : "FAIL") << "  " << name << "  [" << secs << " s]  " << o.detail;
  std::cout << line.str() << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome cdm_below_dm() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto r = GroupRates::of(u(rng), u(rng), u(rng), u(rng));
    violations += cdm(r) > dm(r) + 1e-12;
  }
  const double t = seconds_since(t0);
  return {violations == 0 && t < 1.0, "10000 quadruples, violations " + std::to_string(violations)};
}

Outcome bounded_by_twice_mmm() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const int k = 1 + rep % 4;
    std::vector<GroupRates> rs;
    for (int j = 0; j < k; ++j) rs.push_back(GroupRates::of(u(rng), u(rng), u(rng), u(rng)));
    const double m = mmm(rs);
    for (const auto& r : rs) violations += (dm(r) > 2 * m + 1e-12) + (cdm(r) > 2 * m + 1e-12);
  }
  const double t = seconds_since(t0);
  return {violations == 0 && t < 1.0, "10000 rate-sets, k in 1..4, violations " + std::to_string(violations)};
}

Outcome equality_means_class_bias() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int cases = 0, held = 0;
  for (int rep = 0; rep < 100000; ++rep) {
    const double a = u(rng), b = u(rng), ab = u(rng), bb = u(rng);
    const auto r = GroupRates::of(a, b, ab, bb);
    if (std::abs(cdm(r) - dm(r)) <= 1e-12 && dm(r) > 1e-6) {
      ++cases;
      held += std::abs((a - ab) - (b - bb)) > 1e-9;
    }
  }
  return {cases > 0 && held == cases,
          std::to_string(held) + " of " + std::to_string(cases) + " equal-CDM/DM quadruples class-biased"};
}

Outcome toy() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream sink;
  const int code = cmd_toy("json", sink);
  const double t = seconds_since(t0);
  const auto r = toy_report();
  std::ostringstream d;
  d << "MMM = (" << r.rows[0].report.mmm << ", " << r.rows[1].report.mmm << ", " << r.rows[2].report.mmm << ", "
    << r.rows[3].report.mmm << "), failed assertions " << r.failures.size();
  return {code == kExitOk && r.ok() && t < 0.1, d.str()};
}

Outcome vanilla_equivalence() {
  std::mt19937_64 rng(4);
  int matched = 0;
  for (int fixture = 0; fixture < 20; ++fixture) {
    const std::size_t n = 10 + static_cast<std::size_t>(rng() % 91), d = 1 + rng() % 5;
    const int T = 1 + static_cast<int>(rng() % 20);
    const auto ds = oracle::random_dataset(rng, n, d, 1 + rng() % 3, 2 + static_cast<int>(rng() % 8));
    const auto ref = oracle::adaboost(ds, T);
    BoostConfig c;
    c.rounds = T;
    c.mode = BoostMode::vanilla;
    std::vector<std::vector<double>> dists;
    const auto trace = train(ds, c, [&](const RoundView& v) { dists.emplace_back(v.distribution.begin(), v.distribution.end()); });
    bool same = trace.ensemble.size() == ref.size();
    for (std::size_t t = 0; same && t < ref.size(); ++t) {
      const auto& m = trace.ensemble.members[t];
      same = m.stump.feature_index == ref[t].stump.feature_index && m.stump.threshold == ref[t].stump.threshold &&
             m.stump.polarity == ref[t].stump.polarity && m.alpha == ref[t].alpha && dists[t] == ref[t].distribution;
    }
    matched += same;
  }
  return {matched == 20, std::to_string(matched) + " of 20 fixtures bit-identical"};
}

Outcome invariants() {
  const auto ds = synth_biased({2000, 0.25, 0.4, 2, 1});
  BoostConfig c;
  c.rounds = 200;
  long violations = 0;
  int rounds = 0;
  double fc_max = 1.0;
  train(ds, c, [&](const RoundView& v) {
    ++rounds;
    const double sum = std::accumulate(v.distribution.begin(), v.distribution.end(), 0.0);
    violations += std::abs(sum - 1.0) > 1e-9;
    for (double fc : v.costs) {
      violations += fc < 1.0 || fc > 2.0;
      fc_max = std::max(fc_max, fc);
    }
  });
  return {violations == 0 && rounds == 200,
          std::to_string(rounds) + " rounds, violations " + std::to_string(violations) + ", max fc " +
              std::to_string(fc_max)};
}

Outcome oracles() {
  std::mt19937_64 rng(5);
  int mismatches = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto ds = oracle::random_dataset(rng, 5 + rng() % 46, 1 + rng() % 5, 1, 2 + static_cast<int>(rng() % 8));
    const auto w = oracle::random_distribution(rng, ds.size());
    const auto s = train_stump(ds, w), o = oracle::exhaustive_stump(ds, w);
    mismatches += s.weighted_error != o.weighted_error || s.feature_index != o.feature_index ||
                  s.threshold != o.threshold || s.polarity != o.polarity;
  }
  const int stump_bad = mismatches;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(rep) * 25;  // up to 976
    const int levels = 3 + rep % 10;
    std::vector<SolutionVector> sols;
    for (std::size_t i = 0; i < n; ++i)
      sols.push_back({std::floor(u(rng) * levels) / levels, std::floor(u(rng) * levels) / levels,
                      std::floor(u(rng) * levels) / levels, static_cast<int>(i) + 1});
    const auto front = build_front(sols);
    std::vector<int> got;
    for (const auto& e : front.entries) got.push_back(e.solution.round);
    mismatches += got != oracle::front_rounds(sols);
    for (int q = 0; q < 10; ++q) {
      const PreferenceVector p{{u(rng), u(rng), u(rng)}};
      mismatches += select(front, p).round != oracle::select_round(front, p.values());
    }
  }
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng() % 499;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 25);
      y[i] = rng() % 4 == 0 ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    mismatches += auc(s, y) != oracle::pairwise_auc(s, y);
  }
  return {mismatches == 0, "stump " + std::to_string(stump_bad) + ", total mismatches " + std::to_string(mismatches) +
                               " over 200 stump, 40 front, 400 selection, 100 AUC cases"};
}

// Shared by the directional and convergence criteria.
struct SeedRun {
  EvalReport vanilla;
  EvalReport fair;
  int selected_round = 0;
  double first_window = 0.0;
  double last_window = 0.0;
};

std::vector<SeedRun> seed_runs;

void run_seeds() {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ds = synth_biased({2000, 0.25, 0.4, 2, seed});
    const auto parts = split(ds, 0.5, seed);
    SeedRun r;

    BoostConfig vc;
    vc.rounds = 200;
    vc.mode = BoostMode::vanilla;
    vc.threads = 0;
    r.vanilla = evaluate(train(parts.train, vc).ensemble, parts.test);

    RunConfig rc;
    rc.rounds = 200;
    rc.mode = BoostMode::multi_fair;
    rc.preference = {1, 1, 1};
    rc.test_fraction = 0.5;
    rc.seed = seed;
    rc.timestamp = false;
    const auto fair = run_pipeline(ds, rc, "synth");
    r.selected_round = fair.selection.round;
    for (const auto& e : fair.evals)
      if (e.round == fair.selection.round) r.fair = e.report;

    const auto& deltas = fair.trace.fairness_deltas;
    std::size_t dom = 0;
    double best = -1.0;
    for (std::size_t j = 0; j < ds.attributes(); ++j) {
      double m = 0.0;
      for (const auto& row : deltas) m += row[j].magnitude();
      if (m > best) best = m, dom = j;
    }
    for (std::size_t t = 0; t < 20; ++t) {
      r.first_window += deltas[t][dom].magnitude() / 20.0;
      r.last_window += deltas[180 + t][dom].magnitude() / 20.0;
    }
    seed_runs.push_back(r);
  }
}

Outcome directional() {
  const auto t0 = std::chrono::steady_clock::now();
  run_seeds();
  int wins = 0;
  std::ostringstream d;
  d.setf(std::ios::fixed);
  d.precision(3);
  for (std::size_t s = 0; s < seed_runs.size(); ++s) {
    const auto& r = seed_runs[s];
    const bool win = r.fair.fairness.mmm < r.vanilla.fairness.mmm && r.vanilla.acc - r.fair.acc <= 0.10 &&
                     r.fair.wc_acc >= r.vanilla.wc_acc;
    wins += win;
    d << "seed " << s + 1 << " MMM " << r.vanilla.fairness.mmm << "->" << r.fair.fairness.mmm << " Acc "
      << r.vanilla.acc << "->" << r.fair.acc << " WC " << r.vanilla.wc_acc << "->" << r.fair.wc_acc
      << (win ? " ok; " : " miss; ");
  }
  d << wins << "/5 seeds";
  return {wins >= 4 && seconds_since(t0) < 120.0, d.str()};
}

Outcome convergence() {
  int ok = 0;
  std::ostringstream d;
  d.setf(std::ios::fixed);
  d.precision(4);
  for (std::size_t s = 0; s < seed_runs.size(); ++s) {
    const auto& r = seed_runs[s];
    ok += r.last_window <= r.first_window;
    d << "seed " << s + 1 << " " << r.first_window << "->" << r.last_window << "; ";
  }
  d << ok << "/5 seeds";
  return {seed_runs.size() == 5 && ok >= 4, d.str()};
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const fs::path& work) {
  fs::create_directories(work);
  std::ostringstream sink;
  cmd_synth({2000, 0.25, 0.4, 2, 1}, work / "synth.csv", work / "synth.schema.json", sink);
  const std::string cli = MFPB_CLI_PATH;
  const std::string base = cli + " train --schema " + (work / "synth.schema.json").string() + " --data " +
                           (work / "synth.csv").string() +
                           " --rounds 200 --preference 1,1,1 --test-fraction 0.5 --seed 1 --output-dir ";
  if (run(base + (work / "run_a").string() + " > /dev/null") != 0) return {false, "first train run failed"};
  if (run("MMM_BOOST_THREADS=1 " + base + (work / "run_b").string() + " > /dev/null") != 0)
    return {false, "second train run failed"};
  auto load = [](const fs::path& p) {
    std::ifstream in(p);
    auto j = nlohmann::json::parse(in);
    j["meta"].erase("created_at");
    return j.dump();
  };
  const bool same = load(work / "run_a" / "bundle.json") == load(work / "run_b" / "bundle.json");
  // Golden selection vectors for the explorer, derived from the same bundle.
  cmd_golden(work / "run_a" / "bundle.json", 20, 7, work / "golden.json", sink);
  return {same, same ? "bundles identical apart from created_at" : "bundles differ"};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "mfpb_acceptance";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--work-dir") work = argv[i + 1];

  report("CDM never exceeds DM", cdm_below_dm);
  report("DM and CDM bounded by twice MMM", bounded_by_twice_mmm);
  report("equal CDM and DM implies class bias", equality_means_class_bias);
  report("toy table reproduction", toy);
  report("vanilla equivalence with reference AdaBoost", vanilla_equivalence);
  report("distribution and cost invariants", invariants);
  report("oracle equivalences", oracles);
  report("directional fairness claim", directional);
  report("convergence monitoring", convergence);
  report("determinism of train", [&] { return determinism(work); });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
