#include "crashrules/apriori.hpp"

#include <algorithm>
#include <bit>

#include <gtest/gtest.h>

#include "crashrules/common.hpp"
#include "crashrules/encode.hpp"
#include "crashrules/rng.hpp"

using namespace crashrules;

namespace {

/// Transaction set from explicit row sets, one entry per item.
TransactionSet txns_of(std::size_t n_rows,
                       std::vector<std::vector<std::size_t>> item_rows) {
  TransactionSet t;
  t.n_rows = n_rows;
  for (std::size_t i = 0; i < item_rows.size(); ++i) {
    t.items.push_back("I" + std::to_string(i));
    t.item_column.push_back(static_cast<std::uint32_t>(i));
    Bitvec bits(n_rows);
    for (std::size_t r : item_rows[i]) bits.set(r);
    t.bits.push_back(std::move(bits));
  }
  return t;
}

/// Powerset enumeration with naive per-row counting; shares nothing with the
/// mining code except the count threshold rule.
std::vector<Itemset> brute_force(const TransactionSet& t, double s_min,
                                 std::uint32_t rl_max) {
  const std::uint64_t need = min_support_count(s_min, t.n_rows);
  std::vector<Itemset> out;
  const std::size_t m = t.items.size();
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    if (static_cast<std::uint32_t>(std::popcount(mask)) > rl_max) continue;
    std::vector<std::uint32_t> items;
    for (std::uint32_t i = 0; i < m; ++i) {
      if ((mask >> i) & 1u) items.push_back(i);
    }
    std::uint64_t count = 0;
    for (std::size_t r = 0; r < t.n_rows; ++r) {
      bool all = true;
      for (std::uint32_t i : items) all = all && t.get(i, r);
      count += all;
    }
    if (count >= need) {
      out.push_back(Itemset{std::move(items), count,
                            static_cast<double>(count) /
                                static_cast<double>(t.n_rows)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Itemset& a, const Itemset& b) {
    if (a.items.size() != b.items.size()) {
      return a.items.size() < b.items.size();
    }
    return a.items < b.items;
  });
  return out;
}

void expect_same_itemsets(const std::vector<Itemset>& mined,
                          const std::vector<Itemset>& expected) {
  ASSERT_EQ(mined.size(), expected.size());
  for (std::size_t i = 0; i < mined.size(); ++i) {
    EXPECT_EQ(mined[i].items, expected[i].items) << "at index " << i;
    EXPECT_EQ(mined[i].count, expected[i].count) << "at index " << i;
    EXPECT_DOUBLE_EQ(mined[i].support, expected[i].support);
  }
}

// --- thresholds --------------------------------------------------------------

TEST(Thresholds, CountCutoffHandlesExactAndDirtyBoundaries) {
  EXPECT_EQ(min_support_count(0.5, 10), 5u);
  EXPECT_EQ(min_support_count(0.3, 10), 3u);    // exactly on the line
  EXPECT_EQ(min_support_count(0.07, 100), 7u);  // 0.07*100 > 7 in doubles
  EXPECT_EQ(min_support_count(0.05, 194), 10u); // ceil(9.7)
  EXPECT_EQ(min_support_count(1.0, 8), 8u);
  EXPECT_EQ(min_support_count(0.001, 5), 1u);   // never below one row
}

TEST(Thresholds, RatioComparisonToleratesRoundoff) {
  EXPECT_TRUE(ratio_at_least(3, 5, 0.6));   // exactly equal
  EXPECT_TRUE(ratio_at_least(7, 100, 0.07));
  EXPECT_FALSE(ratio_at_least(2, 5, 0.6));
  EXPECT_TRUE(ratio_at_least(2, 3, 0.6));
}

TEST(Thresholds, ValidateRejectsBadValues) {
  Thresholds t;
  t.s_min = 0.0;
  EXPECT_THROW(t.validate(), Error);
  t = {};
  t.c_min = 1.5;
  EXPECT_THROW(t.validate(), Error);
  t = {};
  t.l_min = -0.1;
  EXPECT_THROW(t.validate(), Error);
  t = {};
  t.rl_max = 1;
  EXPECT_THROW(t.validate(), Error);
  EXPECT_NO_THROW(Thresholds{}.validate());
}

// --- support -----------------------------------------------------------------

TEST(Support, CountsRowsContainingAllItems) {
  const auto t = txns_of(6, {{0, 1, 2, 3}, {2, 3, 4}, {3}});
  EXPECT_EQ(support_count(t, {0}), 4u);
  EXPECT_EQ(support_count(t, {0, 1}), 2u);
  EXPECT_EQ(support_count(t, {0, 1, 2}), 1u);
  EXPECT_DOUBLE_EQ(support(t, {1}), 0.5);
  EXPECT_DOUBLE_EQ(support(t, {0, 1, 2}), 1.0 / 6.0);
}

TEST(Support, RejectsBadInput) {
  const auto t = txns_of(4, {{0}, {1}});
  EXPECT_THROW(support_count(t, {}), Error);
  EXPECT_THROW(support_count(t, {5}), Error);
  EXPECT_THROW(support_count(t, {1, 0}), Error);  // not ascending
  EXPECT_THROW(support_count(t, {0, 0}), Error);  // duplicate
  EXPECT_THROW(support_count(txns_of(0, {}), {0}), Error);
}

// --- apriori -----------------------------------------------------------------

TEST(Apriori, HandComputedExample) {
  // Classic toy: {0,1} co-occur a lot, 2 tags along sometimes.
  const auto t = txns_of(8, {{0, 1, 2, 3, 4, 5},    // item 0: 6/8
                             {0, 1, 2, 3, 6},       // item 1: 5/8
                             {0, 1, 6, 7}});        // item 2: 4/8
  const auto mined = apriori(t, 0.25, 3);

  // At s_min 0.25 (count >= 2): all singles, pairs {0,1}:4 {0,2}:2 {1,2}:3,
  // and the triple {0,1,2}:2.
  ASSERT_EQ(mined.size(), 7u);
  EXPECT_EQ(mined[0].items, (std::vector<std::uint32_t>{0}));
  EXPECT_EQ(mined[0].count, 6u);
  EXPECT_EQ(mined[3].items, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(mined[3].count, 4u);
  EXPECT_EQ(mined[4].items, (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(mined[4].count, 2u);
  EXPECT_EQ(mined[5].items, (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(mined[5].count, 3u);
  EXPECT_EQ(mined[6].items, (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_EQ(mined[6].count, 2u);
}

TEST(Apriori, RespectsTheLengthCap) {
  const auto t = txns_of(4, {{0, 1, 2, 3}, {0, 1, 2, 3}, {0, 1, 2, 3}});
  const auto mined = apriori(t, 0.5, 2);
  for (const auto& itemset : mined) {
    EXPECT_LE(itemset.items.size(), 2u);
  }
  // 3 singles + 3 pairs, no triple.
  EXPECT_EQ(mined.size(), 6u);
}

TEST(Apriori, MatchesBruteForceOnRandomSets) {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n_items = 2 + rng.next_below(9);   // 2..10
    const std::size_t n_rows = 1 + rng.next_below(48);   // 1..48
    std::vector<std::vector<std::size_t>> item_rows(n_items);
    for (std::size_t i = 0; i < n_items; ++i) {
      const std::uint64_t density = 10 + rng.next_below(80);
      for (std::size_t r = 0; r < n_rows; ++r) {
        if (rng.next_below(100) < density) item_rows[i].push_back(r);
      }
    }
    const auto t = txns_of(n_rows, std::move(item_rows));
    const double s_min = 0.1 * static_cast<double>(1 + rng.next_below(9));
    const std::uint32_t rl_max = 2 + rng.next_below(3);
    expect_same_itemsets(apriori(t, s_min, rl_max),
                         brute_force(t, s_min, rl_max));
  }
}

TEST(Apriori, RejectsBadArguments) {
  const auto t = txns_of(4, {{0}});
  EXPECT_THROW(apriori(t, 0.0, 3), Error);
  EXPECT_THROW(apriori(t, 1.1, 3), Error);
  EXPECT_THROW(apriori(t, 0.5, 0), Error);
  EXPECT_THROW(apriori(txns_of(0, {}), 0.5, 3), Error);
}

// --- rule generation -----------------------------------------------------------

TEST(Rules, HandComputedMetrics) {
  // A: rows 0-5 (6 of 10), B: rows 0-3 and 6 (5 of 10), both: rows 0-3.
  const auto t = txns_of(10, {{0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 6}});
  Thresholds th;
  th.s_min = 0.3;
  th.c_min = 0.6;
  th.l_min = 1.2;
  const auto rules = generate_rules(apriori(t, th.s_min, th.rl_max), t, th);

  ASSERT_EQ(rules.size(), 2u);
  const Rule& forward = rules[0];  // {0} -> {1}
  EXPECT_EQ(forward.antecedent, (std::vector<std::uint32_t>{0}));
  EXPECT_EQ(forward.consequent, (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(forward.count_full, 4u);
  EXPECT_DOUBLE_EQ(forward.support, 0.4);
  EXPECT_DOUBLE_EQ(forward.confidence, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(forward.lift, 40.0 / 30.0);
  const Rule& backward = rules[1];  // {1} -> {0}
  EXPECT_DOUBLE_EQ(backward.confidence, 4.0 / 5.0);
  EXPECT_DOUBLE_EQ(backward.lift, forward.lift);  // lift is symmetric
}

TEST(Rules, ConfidenceBoundaryIsInclusive) {
  // conf = 3/5 exactly; s_min keeps everything relevant.
  const auto t = txns_of(10, {{0, 1, 2, 3, 4}, {0, 1, 2, 7, 8, 9}});
  Thresholds th;
  th.s_min = 0.2;
  th.c_min = 0.6;
  th.l_min = 0.0;
  const auto rules = generate_rules(apriori(t, th.s_min, th.rl_max), t, th);
  bool found = false;
  for (const auto& rule : rules) {
    if (rule.antecedent == std::vector<std::uint32_t>{0}) {
      found = true;
      EXPECT_DOUBLE_EQ(rule.confidence, 0.6);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Rules, IndependentItemsHaveLiftExactlyOne) {
  // P(A) = 6/12, P(B) = 4/12, P(AB) = 2/12 = P(A)P(B).
  const auto t = txns_of(12, {{0, 1, 2, 3, 4, 5}, {0, 1, 6, 7}});
  Thresholds th;
  th.s_min = 0.05;
  th.c_min = 0.05;
  th.l_min = 0.9;
  const auto rules = generate_rules(apriori(t, th.s_min, th.rl_max), t, th);
  ASSERT_FALSE(rules.empty());
  for (const auto& rule : rules) {
    EXPECT_EQ(rule.lift, 1.0);  // exact, not approximate
  }
}

TEST(Rules, LiftFiltersIndependentPairs) {
  const auto t = txns_of(12, {{0, 1, 2, 3, 4, 5}, {0, 1, 6, 7}});
  Thresholds th;
  th.s_min = 0.05;
  th.c_min = 0.05;
  th.l_min = 1.2;
  EXPECT_TRUE(
      generate_rules(apriori(t, th.s_min, th.rl_max), t, th).empty());
}

TEST(Rules, MultiItemAntecedentsAndConsequents) {
  // Three items always together in rows 0-3; 4 rows of noise.
  const auto t =
      txns_of(8, {{0, 1, 2, 3}, {0, 1, 2, 3, 4}, {0, 1, 2, 3, 5}});
  Thresholds th;
  th.s_min = 0.5;
  th.c_min = 0.6;
  th.l_min = 1.0;
  const auto rules = generate_rules(apriori(t, th.s_min, th.rl_max), t, th);
  // Each frequent pair and the triple split every possible way.
  bool saw_two_to_one = false, saw_one_to_two = false;
  for (const auto& rule : rules) {
    EXPECT_LE(rule.antecedent.size() + rule.consequent.size(), 3u);
    saw_two_to_one |= rule.antecedent.size() == 2;
    saw_one_to_two |= rule.consequent.size() == 2;
  }
  EXPECT_TRUE(saw_two_to_one);
  EXPECT_TRUE(saw_one_to_two);
}

// --- ranking -------------------------------------------------------------------

Rule rule_of(std::vector<std::uint32_t> ante, std::vector<std::uint32_t> cons,
             double support, double confidence, double lift) {
  Rule r;
  r.antecedent = std::move(ante);
  r.consequent = std::move(cons);
  r.support = support;
  r.confidence = confidence;
  r.lift = lift;
  return r;
}

TEST(Ranking, SortsByLiftConfidenceSupportThenNames) {
  const std::vector<std::string> names = {"A", "B", "C", "D"};
  std::vector<Rule> rules;
  rules.push_back(rule_of({0}, {1}, 0.5, 0.9, 2.0));
  rules.push_back(rule_of({1}, {0}, 0.5, 0.8, 3.0));   // highest lift
  rules.push_back(rule_of({2}, {3}, 0.4, 0.9, 2.0));   // lift/conf tie w/ #0
  rules.push_back(rule_of({3}, {2}, 0.5, 0.9, 2.0));   // full metric tie w/ #0
  const auto ranked = rank_rules(rules, names, 10);

  ASSERT_EQ(ranked.size(), 4u);
  EXPECT_EQ(ranked[0].lift, 3.0);
  // Metric ties: "A" sorts before "D" by antecedent name.
  EXPECT_EQ(ranked[1].antecedent, (std::vector<std::uint32_t>{0}));
  EXPECT_EQ(ranked[2].antecedent, (std::vector<std::uint32_t>{3}));
  // Lower support comes last among the lift/confidence ties.
  EXPECT_EQ(ranked[3].antecedent, (std::vector<std::uint32_t>{2}));
}

TEST(Ranking, TopNCutsAfterSorting) {
  const std::vector<std::string> names = {"A", "B"};
  std::vector<Rule> rules;
  rules.push_back(rule_of({0}, {1}, 0.5, 0.9, 1.5));
  rules.push_back(rule_of({1}, {0}, 0.5, 0.9, 2.5));
  const auto ranked = rank_rules(rules, names, 1);
  ASSERT_EQ(ranked.size(), 1u);
  EXPECT_EQ(ranked[0].lift, 2.5);
}

}  // namespace
