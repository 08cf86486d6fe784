#include <gtest/gtest.h>

#include <random>

#include "mfpb/metrics.hpp"
#include "oracles.hpp"

using namespace mfpb;

TEST(GroupRates, AllWrongSingleGroup) {
  const std::vector<int> pred{-1, -1, 1, 1}, y{1, 1, -1, -1};
  const std::vector<std::uint8_t> mask{1, 1, 1, 1};
  const auto r = group_rates(pred, y, mask);
  EXPECT_EQ(*r.fnr_s, 1.0);
  EXPECT_EQ(*r.fpr_s, 1.0);
  EXPECT_FALSE(r.fnr_ns.has_value());
  EXPECT_FALSE(r.fpr_ns.has_value());
  EXPECT_TRUE(r.has_undefined());
}

TEST(GroupRates, PerfectPredictionsGiveZeroRates) {
  const std::vector<int> y{1, -1, 1, -1, 1, -1};
  const std::vector<std::uint8_t> mask{1, 1, 0, 0, 1, 0};
  const auto r = group_rates(y, y, mask);
  EXPECT_EQ(*r.fpr_s, 0.0);
  EXPECT_EQ(*r.fnr_s, 0.0);
  EXPECT_EQ(*r.fpr_ns, 0.0);
  EXPECT_EQ(*r.fnr_ns, 0.0);
}

// 100 instances: 25 per sex x class cell, errors sized to the Cf4 Sex rates.
TEST(GroupRates, HundredInstancesRealizeCf4Sex) {
  std::vector<int> y, pred;
  std::vector<std::uint8_t> female;
  auto add = [&](int label, bool f, int count, int wrong) {
    for (int k = 0; k < count; ++k) {
      y.push_back(label);
      female.push_back(f);
      pred.push_back(k < wrong ? -label : label);
    }
  };
  add(1, false, 30, 9);   // FNR_M 0.3
  add(1, true, 20, 4);    // FNR_F 0.2
  add(-1, false, 30, 9);  // FPR_M 0.3
  add(-1, true, 20, 4);   // FPR_F 0.2
  ASSERT_EQ(y.size(), 100u);
  const auto r = group_rates(pred, y, female);
  EXPECT_DOUBLE_EQ(*r.fnr_ns, 0.3);
  EXPECT_DOUBLE_EQ(*r.fnr_s, 0.2);
  EXPECT_DOUBLE_EQ(*r.fpr_ns, 0.3);
  EXPECT_DOUBLE_EQ(*r.fpr_s, 0.2);
  EXPECT_NEAR(dm(r), 0.2, 1e-12);
  EXPECT_NEAR(cdm(r), 0.0, 1e-12);
}

TEST(Dm, Examples) {
  EXPECT_NEAR(dm(GroupRates::of(0.2, 0.2, 0.3, 0.3)), 0.2, 1e-12);
  EXPECT_EQ(dm(GroupRates::of(0.4, 0.1, 0.4, 0.1)), 0.0);
  EXPECT_EQ(dm(GroupRates::of(1, 0, 0, 0)), 1.0);
}

TEST(Cdm, Examples) {
  // Cf3 Sex: FNR_M 0.2, FNR_F 0.4, FPR 0.2 for both
  const auto cf3 = GroupRates::of(0.2, 0.4, 0.2, 0.2);
  EXPECT_NEAR(cdm(cf3), 0.2, 1e-12);
  EXPECT_NEAR(dm(cf3), 0.2, 1e-12);
  EXPECT_EQ(cdm(GroupRates::of(0.3, 0.5, 0.3, 0.5)), 0.0);
  const auto w = GroupRates::of(0.1, 0.6, 0.3, 0.0);
  EXPECT_NEAR(cdm(w), 0.2, 1e-12);
  EXPECT_NEAR(dm(w), 0.8, 1e-12);
}

TEST(ClassBiased, Examples) {
  EXPECT_TRUE(class_biased(GroupRates::of(0.2, 0.4, 0.2, 0.2)));
  EXPECT_FALSE(class_biased(GroupRates::of(0, 0, 0, 0)));
  EXPECT_FALSE(class_biased(GroupRates::of(0.1, 0.6, 0.3, 0.0)));
}

TEST(Mmm, Examples) {
  const std::vector<GroupRates> cf1{GroupRates::of(0.1, 0.6, 0.1, 0.6), GroupRates::of(0.0, 1.0, 0.3, 0.4)};
  EXPECT_NEAR(mmm(cf1), 0.6, 1e-12);
  const std::vector<GroupRates> cf2{GroupRates::of(0.1, 0.8, 0.1, 0.8), GroupRates::of(0.1, 0.8, 0.1, 0.8)};
  EXPECT_EQ(mmm(cf2), 0.0);
  const std::vector<GroupRates> one{GroupRates::of(0.5, 0.1, 0.2, 0.35)};
  EXPECT_NEAR(mmm(one), 0.3, 1e-12);
  EXPECT_THROW(mmm(std::vector<GroupRates>{}), ArgumentError);
}

TEST(Metrics, CdmBelowDmAndRanges) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const auto r = GroupRates::of(u(rng), u(rng), u(rng), u(rng));
    ASSERT_LE(cdm(r), dm(r) + 1e-12);
    ASSERT_GE(dm(r), 0.0);
    ASSERT_LE(dm(r), 2.0);
    ASSERT_LE(cdm(r), 1.0);
    ASSERT_LE(mistreatment(r), 1.0);
  }
}

TEST(Metrics, BoundedByTwiceMmm) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 10000; ++rep) {
    const int k = 1 + rep % 4;
    std::vector<GroupRates> rs;
    for (int j = 0; j < k; ++j) rs.push_back(GroupRates::of(u(rng), u(rng), u(rng), u(rng)));
    const double m = mmm(rs);
    for (const auto& r : rs) {
      ASSERT_LE(dm(r), 2 * m + 1e-12);
      ASSERT_LE(cdm(r), 2 * m + 1e-12);
    }
  }
}

TEST(Metrics, EqualCdmAndDmImpliesClassBias) {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int hits = 0;
  for (int rep = 0; rep < 20000; ++rep) {
    const double a = u(rng), b = u(rng), ab = u(rng), bb = u(rng);
    const auto r = GroupRates::of(a, b, ab, bb);
    if (std::abs(cdm(r) - dm(r)) <= 1e-12 && dm(r) > 1e-6) {
      ++hits;
      ASSERT_GT(std::abs((a - ab) - (b - bb)), 1e-9);
    }
  }
  EXPECT_GT(hits, 100);
}

TEST(ObjectiveVector, PerfectIsZero) {
  std::mt19937_64 rng(1);
  const auto ds = oracle::random_dataset(rng, 50, 2, 2);
  const std::vector<int> y(ds.labels().begin(), ds.labels().end());
  const auto s = objective_vector(y, ds, 3);
  EXPECT_EQ(s.o1, 0.0);
  EXPECT_EQ(s.o2, 0.0);
  EXPECT_EQ(s.o3, 0.0);
  EXPECT_EQ(s.round, 3);
}

TEST(ObjectiveVector, AllNegativeOnImbalancedSet) {
  const std::size_t n = 4000;
  std::vector<int> y(n, -1);
  std::fill(y.begin(), y.begin() + 1000, 1);
  std::vector<std::uint8_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = i % 2;
  const auto ds = Dataset::create(std::vector<double>(n, 0.0), 1, y, {m});
  const std::vector<int> pred(n, -1);
  const auto s = objective_vector(pred, ds, 1);
  EXPECT_DOUBLE_EQ(s.o1, 0.25);
  EXPECT_DOUBLE_EQ(s.o2, 1.0);
}

TEST(ObjectiveVector, O3MatchesMmmOfGroupRates) {
  std::mt19937_64 rng(404);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 300; ++rep) {
    const auto ds = oracle::random_dataset(rng, 30 + rep % 50, 1, 1 + rep % 4);
    std::vector<int> pred(ds.size());
    for (auto& p : pred) p = coin(rng) ? 1 : -1;
    std::vector<GroupRates> rs;
    for (std::size_t j = 0; j < ds.attributes(); ++j) rs.push_back(oracle::rates(pred, ds.labels(), ds.mask(j)));
    ASSERT_NEAR(objective_vector(pred, ds, 1).o3, mmm(rs), 1e-12);
  }
}

TEST(EvaluateFairness, AgreesWithCellCountOracle) {
  std::mt19937_64 rng(505);
  std::bernoulli_distribution coin(0.4);
  for (int rep = 0; rep < 100; ++rep) {
    const auto ds = oracle::random_dataset(rng, 40, 1, 3);
    std::vector<int> pred(ds.size());
    for (auto& p : pred) p = coin(rng) ? 1 : -1;
    const auto report = evaluate_fairness(pred, ds);
    for (std::size_t j = 0; j < ds.attributes(); ++j) {
      const auto r = oracle::rates(pred, ds.labels(), ds.mask(j));
      EXPECT_EQ(report.per_attribute[j].dm, dm(r));
      EXPECT_EQ(report.per_attribute[j].cdm, cdm(r));
    }
  }
}

TEST(FairnessReport, JsonKeysAndUndefinedFlag) {
  const std::vector<int> pred{-1, -1, 1, 1}, y{1, 1, -1, -1};
  const auto ds = Dataset::create({0, 0, 0, 0}, 1, y, {{1, 1, 1, 1}}, {}, {"sex"});
  const auto report = evaluate_fairness(pred, ds);
  EXPECT_TRUE(report.has_undefined());
  const auto j = to_json(report);
  const auto& a = j.at("per_attribute").at(0);
  for (const char* key : {"attribute", "fpr_s", "fnr_s", "fpr_ns", "fnr_ns", "dm", "cdm", "class_biased"})
    EXPECT_TRUE(a.contains(key)) << key;
  EXPECT_TRUE(a.at("fpr_ns").is_null());
  EXPECT_TRUE(j.contains("mmm"));
  EXPECT_TRUE(report.mmm_fair(1.0));
}
