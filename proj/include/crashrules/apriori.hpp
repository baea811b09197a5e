#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "crashrules/bitvec.hpp"
#include "crashrules/common.hpp"
#include "crashrules/encode.hpp"

namespace crashrules {

struct Thresholds {
  double s_min = 0.05;
  double c_min = 0.6;
  double l_min = 1.2;
  std::uint32_t rl_max = 3;  // |antecedent| + |consequent|

  void validate() const {
    if (!(s_min > 0.0 && s_min <= 1.0)) fail("arm", "s_min must be in (0, 1]");
    if (!(c_min > 0.0 && c_min <= 1.0)) fail("arm", "c_min must be in (0, 1]");
    if (!(l_min >= 0.0)) fail("arm", "l_min must be >= 0");
    if (rl_max < 2) fail("arm", "rl_max must be >= 2");
  }
};

struct Itemset {
  std::vector<std::uint32_t> items;  // strictly ascending item ids
  std::uint64_t count = 0;
  double support = 0.0;
};

struct Rule {
  std::vector<std::uint32_t> antecedent;
  std::vector<std::uint32_t> consequent;
  std::uint64_t count_full = 0;  // rows containing antecedent and consequent
  std::uint64_t count_ante = 0;
  std::uint64_t count_cons = 0;
  std::size_t n_rows = 0;
  double support = 0.0;
  double confidence = 0.0;
  double lift = 0.0;
};

namespace detail {

struct ItemsetHash {
  std::size_t operator()(const std::vector<std::uint32_t>& items) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint32_t item : items) {
      for (int shift = 0; shift < 32; shift += 8) {
        h ^= (item >> shift) & 0xff;
        h *= 1099511628211ull;
      }
    }
    return static_cast<std::size_t>(h);
  }
};

using CountMap = std::unordered_map<std::vector<std::uint32_t>, std::uint64_t,
                                    ItemsetHash>;

}  // namespace detail

/// Smallest row count satisfying support >= s_min over n rows. The small
/// slack keeps counts that sit exactly on the decimal threshold in, despite
/// the binary representation of the threshold.
inline std::uint64_t min_support_count(double s_min, std::size_t n) {
  double scaled = s_min * static_cast<double>(n) - 1e-9;
  std::uint64_t count = static_cast<std::uint64_t>(std::ceil(scaled));
  return std::max<std::uint64_t>(count, 1);
}

/// num / den >= threshold, with the same relative slack.
inline bool ratio_at_least(double num, double den, double threshold) {
  return num >= (threshold - 1e-9) * den;
}

inline std::uint64_t support_count(const TransactionSet& transactions,
                                   const std::vector<std::uint32_t>& items) {
  if (transactions.n_rows == 0) fail("arm", "empty transaction set");
  if (items.empty()) fail("arm", "empty itemset");
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] >= transactions.items.size()) {
      fail("arm", "item id out of range: " + std::to_string(items[i]));
    }
    if (i > 0 && items[i] <= items[i - 1]) {
      fail("arm", "itemset must be strictly ascending");
    }
  }
  Bitvec acc = transactions.bits[items[0]];
  for (std::size_t i = 1; i < items.size(); ++i) {
    acc.and_with(transactions.bits[items[i]]);
  }
  return acc.count();
}

inline double support(const TransactionSet& transactions,
                      const std::vector<std::uint32_t>& items) {
  return static_cast<double>(support_count(transactions, items)) /
         static_cast<double>(transactions.n_rows);
}

/// Apriori with the downward-closure prune: exactly the itemsets of size
/// <= rl_max whose support clears s_min, in canonical order (by size, then
/// lexicographically by item ids).
inline std::vector<Itemset> apriori(const TransactionSet& transactions,
                                    double s_min, std::uint32_t rl_max) {
  if (transactions.n_rows == 0) fail("arm", "empty transaction set");
  if (!(s_min > 0.0 && s_min <= 1.0)) fail("arm", "s_min must be in (0, 1]");
  if (rl_max < 1) fail("arm", "rl_max must be >= 1");

  const std::size_t n = transactions.n_rows;
  const std::uint64_t need = min_support_count(s_min, n);

  struct Entry {
    std::vector<std::uint32_t> items;
    std::uint64_t count;
    Bitvec rows;
  };

  std::vector<Itemset> out;
  std::vector<Entry> level;
  for (std::uint32_t i = 0; i < transactions.items.size(); ++i) {
    const std::uint64_t count = transactions.bits[i].count();
    if (count >= need) {
      level.push_back(Entry{{i}, count, transactions.bits[i]});
    }
  }

  detail::CountMap frequent;
  while (!level.empty()) {
    for (const auto& entry : level) {
      frequent.emplace(entry.items, entry.count);
      out.push_back(Itemset{entry.items, entry.count,
                            static_cast<double>(entry.count) /
                                static_cast<double>(n)});
    }
    if (level.front().items.size() >= rl_max) break;

    std::vector<Entry> next;
    for (std::size_t a = 0; a < level.size(); ++a) {
      for (std::size_t b = a + 1; b < level.size(); ++b) {
        const auto& ia = level[a].items;
        const auto& ib = level[b].items;
        // Join step: identical prefixes, differing last item.
        if (!std::equal(ia.begin(), ia.end() - 1, ib.begin())) break;

        std::vector<std::uint32_t> candidate = ia;
        candidate.push_back(ib.back());

        // Downward closure: every (k-1)-subset must be frequent.
        bool pruned = false;
        std::vector<std::uint32_t> subset(candidate.size() - 1);
        for (std::size_t skip = 0; skip + 2 < candidate.size(); ++skip) {
          std::size_t pos = 0;
          for (std::size_t j = 0; j < candidate.size(); ++j) {
            if (j != skip) subset[pos++] = candidate[j];
          }
          if (!frequent.count(subset)) {
            pruned = true;
            break;
          }
        }
        if (pruned) continue;

        Bitvec rows = level[a].rows;
        rows.and_with(level[b].rows);
        const std::uint64_t count = rows.count();
        if (count >= need) {
          next.push_back(Entry{std::move(candidate), count, std::move(rows)});
        }
      }
    }
    level = std::move(next);
  }
  return out;
}

/// Every split A -> F\A of every frequent itemset F with |F| >= 2, filtered
/// by confidence and lift. Confidence and lift come from exact row counts;
/// subset counts are guaranteed present by downward closure.
inline std::vector<Rule> generate_rules(const std::vector<Itemset>& frequent,
                                        const TransactionSet& transactions,
                                        const Thresholds& thresholds) {
  thresholds.validate();
  if (transactions.n_rows == 0) fail("arm", "empty transaction set");
  const double n = static_cast<double>(transactions.n_rows);

  detail::CountMap counts;
  for (const auto& itemset : frequent) {
    counts.emplace(itemset.items, itemset.count);
  }

  std::vector<Rule> rules;
  for (const auto& itemset : frequent) {
    const std::size_t m = itemset.items.size();
    if (m < 2 || m > thresholds.rl_max) continue;
    for (std::uint32_t mask = 1; mask + 1 < (1u << m); ++mask) {
      Rule rule;
      for (std::size_t j = 0; j < m; ++j) {
        ((mask >> j) & 1u ? rule.antecedent : rule.consequent)
            .push_back(itemset.items[j]);
      }
      auto ante = counts.find(rule.antecedent);
      auto cons = counts.find(rule.consequent);
      if (ante == counts.end() || cons == counts.end()) {
        fail("arm", "internal: subset of a frequent itemset is missing");
      }
      rule.count_full = itemset.count;
      rule.count_ante = ante->second;
      rule.count_cons = cons->second;
      rule.n_rows = transactions.n_rows;

      if (!ratio_at_least(static_cast<double>(rule.count_full),
                          static_cast<double>(rule.count_ante),
                          thresholds.c_min)) {
        continue;
      }
      // lift = (count_full * n) / (count_ante * count_cons); the products
      // stay below 2^53, so this is exact integer arithmetic in doubles.
      if (!ratio_at_least(static_cast<double>(rule.count_full) * n,
                          static_cast<double>(rule.count_ante) *
                              static_cast<double>(rule.count_cons),
                          thresholds.l_min)) {
        continue;
      }
      rule.support = static_cast<double>(rule.count_full) / n;
      rule.confidence = static_cast<double>(rule.count_full) /
                        static_cast<double>(rule.count_ante);
      rule.lift = static_cast<double>(rule.count_full) * n /
                  (static_cast<double>(rule.count_ante) *
                   static_cast<double>(rule.count_cons));
      rules.push_back(std::move(rule));
    }
  }
  return rules;
}

inline std::string join_item_names(const std::vector<std::uint32_t>& items,
                                   const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += " + ";
    out += names[items[i]];
  }
  return out;
}

/// Descending lift; ties by confidence, then support, then item names.
inline std::vector<Rule> rank_rules(std::vector<Rule> rules,
                                    const std::vector<std::string>& item_names,
                                    std::size_t top_n) {
  auto key = [&](const Rule& r) {
    return std::make_tuple(join_item_names(r.antecedent, item_names),
                           join_item_names(r.consequent, item_names));
  };
  std::sort(rules.begin(), rules.end(), [&](const Rule& a, const Rule& b) {
    if (a.lift != b.lift) return a.lift > b.lift;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.support != b.support) return a.support > b.support;
    return key(a) < key(b);
  });
  if (rules.size() > top_n) rules.resize(top_n);
  return rules;
}

}  // namespace crashrules
