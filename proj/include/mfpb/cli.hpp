#ifndef MFPB_CLI_HPP
#define MFPB_CLI_HPP

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfpb/boost.hpp"
#include "mfpb/bundle.hpp"
#include "mfpb/data.hpp"
#include "mfpb/errors.hpp"
#include "mfpb/eval.hpp"
#include "mfpb/metrics.hpp"
#include "mfpb/pareto.hpp"

namespace mfpb {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::filesystem::path schema_path;
  std::filesystem::path data_path;
  int rounds = 500;
  BoostMode mode = BoostMode::multi_fair;
  Weights3 preference{1.0, 1.0, 1.0};
  double test_fraction = 0.5;
  std::uint64_t seed = 1;
  int burn_in = 0;
  std::filesystem::path output_dir = ".";
  unsigned threads = 0;  // 0 = hardware concurrency
  bool timestamp = true;  // write meta.created_at

  void validate() const {
    if (!std::filesystem::exists(schema_path))
      throw IoError("cli", "schema file '" + schema_path.string() + "' does not exist");
    if (!std::filesystem::exists(data_path))
      throw IoError("cli", "data file '" + data_path.string() + "' does not exist");
    if (rounds < 1) throw ArgumentError("cli", "--rounds must be >= 1");
    if (burn_in < 0) throw ArgumentError("cli", "--burn-in must be >= 0");
    if (burn_in >= rounds) throw ArgumentError("cli", "--burn-in must be below --rounds");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("cli", "--test-fraction must lie in (0,1)");
    PreferenceVector{preference};
  }
};

/// Parses "a,b,c" into three numbers.
inline Weights3 parse_preference(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = csv::trim(item);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (t.empty() || used != t.size()) throw ArgumentError("cli", "preference component '" + t + "' is not a number");
    parts.push_back(v);
  }
  if (parts.size() != 3) throw ArgumentError("cli", "preference needs exactly 3 comma-separated values");
  return {parts[0], parts[1], parts[2]};
}

/// Reads MMM_BOOST_THREADS; unset means 0 (use every core).
inline unsigned threads_from_env() {
  const char* raw = std::getenv("MMM_BOOST_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 0) throw ArgumentError("cli", std::string("MMM_BOOST_THREADS must be a non-negative integer, got '") + raw + "'");
  return static_cast<unsigned>(v);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

/// Result of one training pipeline run, before anything is written.
struct TrainResult {
  TrainingTrace trace;
  ParetoFront front;
  Selection selection;
  ParetoBundle bundle;
  std::vector<BundleEval> evals;  // one per front entry, on the test split
  std::string split_warning;
};

/// Split, train on the training part, build the front, select and evaluate
/// every front member on the test part.
inline TrainResult run_pipeline(const Dataset& data, const RunConfig& cfg, const std::string& dataset_name) {
  auto parts = split(data, cfg.test_fraction, cfg.seed);
  require_both_classes(parts.train, "cli");
  require_both_classes(parts.test, "cli");

  BoostConfig bc;
  bc.rounds = cfg.rounds;
  bc.mode = cfg.mode;
  bc.seed = cfg.seed;
  bc.threads = cfg.threads;

  TrainResult r;
  r.split_warning = parts.warning;
  r.trace = train(parts.train, bc);
  r.front = build_front(r.trace.solutions, cfg.burn_in);
  const PreferenceVector pref{cfg.preference};
  r.selection = select(r.front, pref);
  for (const auto& e : r.front.entries)
    r.evals.push_back({e.solution.round, evaluate(r.trace.ensemble, parts.test, static_cast<std::size_t>(e.solution.round))});

  BundleMeta meta{dataset_name, cfg.rounds, to_string(cfg.mode), cfg.seed, cfg.timestamp ? utc_timestamp() : ""};
  r.bundle = make_bundle(r.trace, r.front, r.selection, pref, r.evals, meta);
  return r;
}

inline void print_summary(std::ostream& out, const TrainResult& r) {
  const auto& s = r.selection.solution;
  const EvalReport* rep = nullptr;
  for (const auto& e : r.evals)
    if (e.round == r.selection.round) rep = &e.report;
  out << std::fixed << std::setprecision(4);
  out << "rounds trained : " << r.trace.ensemble.size() << '\n';
  if (!r.trace.stop_reason.empty()) out << "stopped early  : " << r.trace.stop_reason << '\n';
  if (!r.split_warning.empty()) out << "split warning  : " << r.split_warning << '\n';
  out << "front size     : " << r.front.entries.size() << " of " << r.front.source_count << " rounds\n";
  out << "selected round : " << r.selection.round << "  (L1 distance " << r.selection.distance << ")\n";
  out << "objectives     : O1 " << s.o1 << "  O2 " << s.o2 << "  O3 " << s.o3 << '\n';
  if (rep != nullptr) {
    out << "test metrics   : Acc " << rep->acc << "  WC_Acc " << rep->wc_acc << "  AUC " << rep->auc << "  G.M "
        << rep->gm << "  MMM " << rep->fairness.mmm << '\n';
  }
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

/// `train`: writes model.json and bundle.json into the output directory.
inline int cmd_train(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto schema = load_schema(cfg.schema_path);
  const auto data = load_csv(cfg.data_path, schema);
  auto r = run_pipeline(data, cfg, cfg.data_path.filename().string());

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cli", "cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());
  write_json_file(cfg.output_dir / "model.json", model_to_json(r.trace));
  export_bundle(r.bundle, cfg.output_dir / "bundle.json");
  print_summary(out, r);
  out << "wrote " << (cfg.output_dir / "model.json").string() << " and " << (cfg.output_dir / "bundle.json").string()
      << '\n';
  return kExitOk;
}

/// `select`: re-runs selection on the stored front and updates the bundle.
inline int cmd_select(const std::filesystem::path& bundle_path, const Weights3& preference, std::ostream& out) {
  const PreferenceVector pref{preference};
  auto bundle = load_bundle(bundle_path);
  const auto sel = select(bundle.front(), pref);
  bundle.selected_round = sel.round;
  bundle.preference = pref.values();
  export_bundle(bundle, bundle_path);

  nlohmann::json report{{"round", sel.round},
                        {"distance", sel.distance},
                        {"preference", {pref[0], pref[1], pref[2]}},
                        {"objectives", {{"o1", sel.solution.o1}, {"o2", sel.solution.o2}, {"o3", sel.solution.o3}}}};
  for (const auto& e : bundle.eval)
    if (e.at("round") == sel.round) report["metrics"] = e;
  out << report.dump(2) << '\n';
  return kExitOk;
}

namespace detail {

// Distinct raw values of the label column, as they appear in the data file.
inline std::set<std::string> raw_label_values(const std::filesystem::path& data_path, const std::string& label_column) {
  std::ifstream in(data_path);
  if (!in) throw IoError("cli", "cannot open data file '" + data_path.string() + "'");
  csv::Reader reader(in);
  auto header = reader.next();
  std::set<std::string> values;
  if (!header) return values;
  std::size_t col = header->fields.size();
  for (std::size_t c = 0; c < header->fields.size(); ++c)
    if (csv::trim(header->fields[c]) == label_column) col = c;
  if (col == header->fields.size()) return values;
  while (auto rec = reader.next())
    if (col < rec->fields.size()) values.insert(csv::trim(rec->fields[col]));
  return values;
}

}  // namespace detail

/// Loads external predictions: a CSV with a `prediction` column and an
/// optional `score` column, one row per loaded data row.
struct ExternalPredictions {
  std::vector<int> labels;
  std::vector<double> scores;
  bool has_scores = false;
};

inline ExternalPredictions load_predictions(std::istream& in, const std::string& positive_label,
                                            const std::set<std::string>& negative_labels) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw ParseError("cli", "predictions", "file is empty");
  std::size_t pred_col = header->fields.size(), score_col = header->fields.size();
  for (std::size_t c = 0; c < header->fields.size(); ++c) {
    const auto name = csv::trim(header->fields[c]);
    if (name == "prediction") pred_col = c;
    if (name == "score") score_col = c;
  }
  if (pred_col == header->fields.size()) throw ParseError("cli", "predictions", "no 'prediction' column");

  ExternalPredictions p;
  p.has_scores = score_col != header->fields.size();
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && csv::trim(rec->fields[0]).empty()) continue;
    if (rec->fields.size() != header->fields.size())
      throw RowError("cli", rec->line, "expected " + std::to_string(header->fields.size()) + " fields");
    const auto v = csv::trim(rec->fields[pred_col]);
    int y = 0;
    if (v == "+1" || v == "1" || v == positive_label) {
      y = 1;
    } else if (v == "-1" || negative_labels.count(v) != 0) {
      y = -1;
    } else {
      throw RowError("cli", rec->line, "prediction '" + v + "' is not +1, -1 or a label value");
    }
    p.labels.push_back(y);
    if (p.has_scores) {
      const auto s = csv::trim(rec->fields[score_col]);
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (s.empty() || used != s.size()) throw RowError("cli", rec->line, "score '" + s + "' is not a number");
      p.scores.push_back(d);
    } else {
      p.scores.push_back(static_cast<double>(y));
    }
  }
  return p;
}

/// Fairness and performance report for predictions of any classifier.
inline nlohmann::json audit(const std::filesystem::path& predictions_path, const std::filesystem::path& schema_path,
                            const std::filesystem::path& data_path) {
  const auto schema = load_schema(schema_path);
  const auto data = load_csv(data_path, schema);
  auto negatives = detail::raw_label_values(data_path, schema.label_column);
  negatives.erase(schema.positive_label);

  std::ifstream in(predictions_path);
  if (!in) throw IoError("cli", "cannot open predictions file '" + predictions_path.string() + "'");
  const auto preds = load_predictions(in, schema.positive_label, negatives);
  if (preds.labels.size() != data.size())
    throw ArgumentError("cli", "predictions have " + std::to_string(preds.labels.size()) + " rows but the data has " +
                                   std::to_string(data.size()));
  const auto report = evaluate_predictions(preds.labels, preds.scores, data);
  auto j = to_json(report);
  j["scores_supplied"] = preds.has_scores;
  j["rows"] = data.size();
  return j;
}

inline int cmd_audit(const std::filesystem::path& predictions_path, const std::filesystem::path& schema_path,
                     const std::filesystem::path& data_path, std::ostream& out) {
  out << audit(predictions_path, schema_path, data_path).dump(2) << '\n';
  return kExitOk;
}

inline void print_toy_table(std::ostream& out, const ToyReport& t) {
  out << std::left << std::setw(12) << "measure";
  for (const auto& row : t.rows) out << std::setw(8) << row.classifier;
  out << '\n';
  auto line = [&](const std::string& label, auto&& value) {
    out << std::setw(12) << label;
    for (const auto& row : t.rows) out << std::setw(8) << std::setprecision(3) << value(row.report);
    out << '\n';
  };
  for (std::size_t j = 0; j < 2; ++j) {
    const auto& name = t.rows.front().report.per_attribute[j].attribute;
    line("DM " + name, [j](const FairnessReport& r) { return r.per_attribute[j].dm; });
    line("CDM " + name, [j](const FairnessReport& r) { return r.per_attribute[j].cdm; });
  }
  line("MMM", [](const FairnessReport& r) { return r.mmm; });
  out << std::right;
  for (const auto& f : t.failures) out << "FAILED: " << f << '\n';
}

/// `toy`: exit 0 when every ordering assertion holds, 1 otherwise.
inline int cmd_toy(const std::string& format, std::ostream& out) {
  const auto t = toy_report();
  if (format == "json") {
    out << to_json(t).dump(2) << '\n';
  } else if (format == "table") {
    print_toy_table(out, t);
  } else {
    throw ArgumentError("cli", "unknown format '" + format + "' (expected table or json)");
  }
  return t.ok() ? kExitOk : kExitAssertion;
}

/// Preference vectors paired with the round `select` returns for them, for
/// replay by other selection implementations. The set always contains the
/// uniform vector, the three corners and every stored pseudo-weight, and is
/// topped up with random vectors up to `count`.
inline nlohmann::json golden_vectors(const ParetoBundle& bundle, std::size_t count, std::uint64_t seed) {
  const auto front = bundle.front();
  std::vector<Weights3> prefs{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (const auto& w : bundle.pseudo_weights) prefs.push_back(w);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (prefs.size() < count) prefs.push_back({unit(rng), unit(rng), unit(rng)});
  if (prefs.size() > count) prefs.resize(std::max<std::size_t>(count, 4));

  nlohmann::json cases = nlohmann::json::array();
  for (const auto& raw : prefs) {
    const PreferenceVector u{raw};
    cases.push_back({{"preference", {u[0], u[1], u[2]}}, {"expected_round", select(front, u).round}});
  }
  return {{"cases", cases}};
}

inline int cmd_golden(const std::filesystem::path& bundle_path, std::size_t count, std::uint64_t seed,
                      const std::filesystem::path& output, std::ostream& out) {
  const auto doc = golden_vectors(load_bundle(bundle_path), count, seed);
  write_json_file(output, doc);
  out << "wrote " << doc.at("cases").size() << " cases to " << output.string() << '\n';
  return kExitOk;
}

/// `synth`: writes the synthetic biased fixture as CSV plus schema.
inline int cmd_synth(const SynthParams& p, const std::filesystem::path& csv_path,
                     const std::filesystem::path& schema_path, std::ostream& out) {
  const auto ds = synth_biased(p);
  std::ofstream f(csv_path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cli", "cannot write '" + csv_path.string() + "'");
  write_csv(f, ds);
  if (!f) throw IoError("cli", "write to '" + csv_path.string() + "' failed");
  write_json_file(schema_path, schema_to_json(schema_for_csv(ds)));
  out << "wrote " << ds.size() << " rows (" << ds.positives() << " positive) to " << csv_path.string() << '\n';
  return kExitOk;
}

}  // namespace mfpb

#endif  // MFPB_CLI_HPP
