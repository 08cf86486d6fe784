#ifndef MFPB_BUNDLE_HPP
#define MFPB_BUNDLE_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfpb/boost.hpp"
#include "mfpb/errors.hpp"
#include "mfpb/eval.hpp"
#include "mfpb/pareto.hpp"

namespace mfpb {

struct BundleMeta {
  std::string dataset;
  int rounds = 0;  // configured T
  std::string mode;
  std::uint64_t seed = 0;
  std::string created_at;  // informational; ignored by comparisons
};

struct BundleEval {
  int round = 0;
  EvalReport report;
};

/// Everything the Pareto explorer needs: all per-round solutions, the front
/// (as indices into `solutions`) with pseudo-weights, the current selection
/// and test-set metrics of the front members.
struct ParetoBundle {
  BundleMeta meta;
  std::vector<SolutionVector> solutions;
  std::vector<std::size_t> front_indices;
  std::vector<Weights3> pseudo_weights;
  int selected_round = 0;
  Weights3 preference{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  // Kept as JSON so bundles round-trip without losing fields.
  std::vector<nlohmann::json> eval;

  ParetoFront front() const {
    ParetoFront f;
    f.source_count = solutions.size();
    for (std::size_t k = 0; k < front_indices.size(); ++k)
      f.entries.push_back({solutions.at(front_indices[k]), pseudo_weights.at(k)});
    return f;
  }
};

inline ParetoBundle make_bundle(const TrainingTrace& trace, const ParetoFront& front, const Selection& selected,
                                const PreferenceVector& preference, const std::vector<BundleEval>& evals,
                                BundleMeta meta) {
  ParetoBundle b;
  b.meta = std::move(meta);
  b.solutions = trace.solutions;
  for (const auto& e : front.entries) {
    const auto it = std::find_if(b.solutions.begin(), b.solutions.end(),
                                 [&](const SolutionVector& s) { return s.round == e.solution.round; });
    if (it == b.solutions.end())
      throw ArgumentError("pareto", "front entry round " + std::to_string(e.solution.round) + " is not in the trace");
    b.front_indices.push_back(static_cast<std::size_t>(it - b.solutions.begin()));
    b.pseudo_weights.push_back(e.pseudo_weight);
  }
  b.selected_round = selected.round;
  b.preference = preference.values();
  for (const auto& e : evals) {
    auto j = to_json(e.report);
    nlohmann::json entry{{"round", e.round}};
    for (const char* key : {"acc", "wc_acc", "auc", "gm", "mmm", "per_attribute"}) entry[key] = j[key];
    b.eval.push_back(std::move(entry));
  }
  return b;
}

inline nlohmann::json to_json(const ParetoBundle& b) {
  nlohmann::json solutions = nlohmann::json::array();
  for (const auto& s : b.solutions) solutions.push_back({{"round", s.round}, {"o1", s.o1}, {"o2", s.o2}, {"o3", s.o3}});
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : b.pseudo_weights) weights.push_back({w[0], w[1], w[2]});
  nlohmann::json meta{{"dataset", b.meta.dataset}, {"T", b.meta.rounds}, {"mode", b.meta.mode}, {"seed", b.meta.seed}};
  if (!b.meta.created_at.empty()) meta["created_at"] = b.meta.created_at;
  return {{"meta", meta},
          {"solutions", solutions},
          {"front_indices", b.front_indices},
          {"pseudo_weights", weights},
          {"selected", {{"round", b.selected_round}, {"preference", {b.preference[0], b.preference[1], b.preference[2]}}}},
          {"eval", b.eval}};
}

namespace detail {

class BundleReader {
 public:
  const nlohmann::json& child(const nlohmann::json& node, const char* key, const std::string& path) const {
    if (!node.is_object()) throw ParseError("pareto", path, "expected an object");
    if (!node.contains(key)) throw ParseError("pareto", path + "/" + key, "missing field");
    return node.at(key);
  }
  double number(const nlohmann::json& node, const std::string& path) const {
    if (!node.is_number()) throw ParseError("pareto", path, "expected a number");
    return node.get<double>();
  }
  long long integer(const nlohmann::json& node, const std::string& path) const {
    if (!node.is_number_integer()) throw ParseError("pareto", path, "expected an integer");
    return node.get<long long>();
  }
  const nlohmann::json& array(const nlohmann::json& node, const std::string& path) const {
    if (!node.is_array()) throw ParseError("pareto", path, "expected an array");
    return node;
  }
  Weights3 triple(const nlohmann::json& node, const std::string& path) const {
    array(node, path);
    if (node.size() != 3) throw ParseError("pareto", path, "expected 3 components");
    return {number(node[0], path + "/0"), number(node[1], path + "/1"), number(node[2], path + "/2")};
  }
};

}  // namespace detail

/// Parses and validates a bundle document; every failure names the JSON
/// pointer of the offending node.
inline ParetoBundle bundle_from_json(const nlohmann::json& doc) {
  detail::BundleReader rd;
  ParetoBundle b;
  const auto& meta = rd.child(doc, "meta", "");
  if (!rd.child(meta, "dataset", "/meta").is_string()) throw ParseError("pareto", "/meta/dataset", "expected a string");
  b.meta.dataset = meta.at("dataset").get<std::string>();
  b.meta.rounds = static_cast<int>(rd.integer(rd.child(meta, "T", "/meta"), "/meta/T"));
  if (!rd.child(meta, "mode", "/meta").is_string()) throw ParseError("pareto", "/meta/mode", "expected a string");
  b.meta.mode = meta.at("mode").get<std::string>();
  b.meta.seed = static_cast<std::uint64_t>(rd.integer(rd.child(meta, "seed", "/meta"), "/meta/seed"));
  if (meta.contains("created_at") && meta.at("created_at").is_string())
    b.meta.created_at = meta.at("created_at").get<std::string>();

  const auto& sols = rd.array(rd.child(doc, "solutions", ""), "/solutions");
  if (sols.empty()) throw ParseError("pareto", "/solutions", "no solutions");
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const std::string base = "/solutions/" + std::to_string(i);
    SolutionVector s;
    s.round = static_cast<int>(rd.integer(rd.child(sols[i], "round", base), base + "/round"));
    s.o1 = rd.number(rd.child(sols[i], "o1", base), base + "/o1");
    s.o2 = rd.number(rd.child(sols[i], "o2", base), base + "/o2");
    s.o3 = rd.number(rd.child(sols[i], "o3", base), base + "/o3");
    b.solutions.push_back(s);
  }

  const auto& fi = rd.array(rd.child(doc, "front_indices", ""), "/front_indices");
  if (fi.empty()) throw ParseError("pareto", "/front_indices", "front is empty");
  for (std::size_t k = 0; k < fi.size(); ++k) {
    const std::string path = "/front_indices/" + std::to_string(k);
    const auto idx = rd.integer(fi[k], path);
    if (idx < 0 || static_cast<std::size_t>(idx) >= b.solutions.size())
      throw ParseError("pareto", path, "index out of range");
    b.front_indices.push_back(static_cast<std::size_t>(idx));
  }

  const auto& pw = rd.array(rd.child(doc, "pseudo_weights", ""), "/pseudo_weights");
  if (pw.size() != b.front_indices.size())
    throw ParseError("pareto", "/pseudo_weights", "length differs from front_indices");
  for (std::size_t k = 0; k < pw.size(); ++k) b.pseudo_weights.push_back(rd.triple(pw[k], "/pseudo_weights/" + std::to_string(k)));

  const auto& sel = rd.child(doc, "selected", "");
  b.selected_round = static_cast<int>(rd.integer(rd.child(sel, "round", "/selected"), "/selected/round"));
  b.preference = rd.triple(rd.child(sel, "preference", "/selected"), "/selected/preference");
  bool in_front = false;
  for (auto idx : b.front_indices) in_front |= b.solutions[idx].round == b.selected_round;
  if (!in_front) throw ParseError("pareto", "/selected/round", "selected round is not a front member");

  const auto& ev = rd.array(rd.child(doc, "eval", ""), "/eval");
  for (std::size_t k = 0; k < ev.size(); ++k) {
    const std::string base = "/eval/" + std::to_string(k);
    rd.integer(rd.child(ev[k], "round", base), base + "/round");
    for (const char* key : {"acc", "wc_acc", "auc", "gm", "mmm"}) rd.number(rd.child(ev[k], key, base), base + "/" + key);
    rd.array(rd.child(ev[k], "per_attribute", base), base + "/per_attribute");
    b.eval.push_back(ev[k]);
  }
  return b;
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("pareto", "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("pareto", "write to '" + path.string() + "' failed");
}

inline void export_bundle(const ParetoBundle& bundle, const std::filesystem::path& path) {
  write_json_file(path, to_json(bundle));
}

inline ParetoBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("pareto", "cannot open bundle '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("pareto", "", "bundle '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return bundle_from_json(doc);
}

}  // namespace mfpb

#endif  // MFPB_BUNDLE_HPP
