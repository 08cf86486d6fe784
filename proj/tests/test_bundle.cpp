#include <gtest/gtest.h>

#include <filesystem>

#include "mfpb/bundle.hpp"
#include "mfpb/cli.hpp"

using namespace mfpb;

namespace {

// Three rounds, the last one dominated.
TrainingTrace three_round_trace() {
  TrainingTrace t;
  t.solutions = {{0.2, 0.3, 0.1, 1}, {0.1, 0.2, 0.3, 2}, {0.3, 0.4, 0.5, 3}};
  return t;
}

ParetoBundle small_bundle() {
  const auto trace = three_round_trace();
  const auto front = build_front(trace.solutions);
  const PreferenceVector u;
  const auto sel = select(front, u);
  return make_bundle(trace, front, sel, u, {}, {"fixture", 3, "multi_fair", 1, ""});
}

}  // namespace

TEST(Bundle, StructureOfThreeRoundTrace) {
  const auto b = small_bundle();
  EXPECT_EQ(b.solutions.size(), 3u);
  EXPECT_EQ(b.front_indices, (std::vector<std::size_t>{0, 1}));
  const auto j = to_json(b);
  for (const char* key : {"meta", "solutions", "front_indices", "pseudo_weights", "selected", "eval"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("meta").at("T"), 3);
  EXPECT_FALSE(j.at("meta").contains("created_at"));
}

TEST(Bundle, JsonRoundTripAndReselect) {
  const auto b = small_bundle();
  const auto back = bundle_from_json(nlohmann::json::parse(to_json(b).dump()));
  EXPECT_EQ(to_json(back), to_json(b));
  EXPECT_EQ(select(back.front(), PreferenceVector{back.preference}).round, b.selected_round);
}

TEST(Bundle, ValidationNamesPaths) {
  const auto good = to_json(small_bundle());
  auto expect_path = [](nlohmann::json doc, const std::string& path) {
    try {
      bundle_from_json(doc);
      FAIL() << "accepted a bundle broken at " << path;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.path(), path);
    }
  };
  auto a = good;
  a.erase("pseudo_weights");
  expect_path(a, "/pseudo_weights");
  auto b = good;
  b["front_indices"][1] = 9;
  expect_path(b, "/front_indices/1");
  auto c = good;
  c["solutions"][2]["o2"] = "x";
  expect_path(c, "/solutions/2/o2");
  auto d = good;
  d["selected"]["round"] = 3;
  expect_path(d, "/selected/round");
  auto e = good;
  e["pseudo_weights"][0] = {1, 0};
  expect_path(e, "/pseudo_weights/0");
  auto f = good;
  f["meta"].erase("seed");
  expect_path(f, "/meta/seed");
}

TEST(Bundle, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "mfpb_bundle_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "bundle.json";
  export_bundle(small_bundle(), path);
  EXPECT_EQ(to_json(load_bundle(path)), to_json(small_bundle()));
  EXPECT_THROW(load_bundle(dir / "missing.json"), IoError);
}

TEST(Golden, CasesAgreeWithSelect) {
  const auto b = small_bundle();
  const auto g = golden_vectors(b, 20, 3);
  ASSERT_EQ(g.at("cases").size(), 20u);
  for (const auto& c : g.at("cases")) {
    const Weights3 u{c.at("preference")[0], c.at("preference")[1], c.at("preference")[2]};
    EXPECT_EQ(select(b.front(), PreferenceVector{u}).round, c.at("expected_round").get<int>());
  }
}
