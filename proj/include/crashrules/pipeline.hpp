#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "crashrules/apriori.hpp"
#include "crashrules/common.hpp"
#include "crashrules/config.hpp"
#include "crashrules/encode.hpp"
#include "crashrules/ingest.hpp"
#include "crashrules/kmeans.hpp"
#include "crashrules/parallel.hpp"

namespace crashrules {

// ---------------------------------------------------------------------------
// Cluster profiles: the modal value (and its share) of every column, per
// cluster. Ties go to the lexicographically smallest value.

struct ProfileEntry {
  std::string column;
  std::string value;
  double share = 0.0;
};

struct ClusterProfile {
  std::uint32_t cluster = 0;
  std::size_t size = 0;
  std::vector<ProfileEntry> modal;  // one entry per column, in table order
};

inline std::vector<ClusterProfile> profile_clusters(
    const FeatureTable& table, const std::vector<std::uint32_t>& assignments,
    std::uint32_t k) {
  if (assignments.size() != table.rows.size()) {
    fail("pipeline", "assignments do not match the table rows");
  }
  std::vector<ClusterProfile> profiles(k);
  for (std::uint32_t c = 0; c < k; ++c) profiles[c].cluster = c;
  for (std::uint32_t a : assignments) {
    if (a >= k) fail("pipeline", "assignment out of range");
    ++profiles[a].size;
  }
  for (std::size_t col = 0; col < table.columns.size(); ++col) {
    std::vector<std::map<std::string, std::size_t>> counts(k);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      ++counts[assignments[r]][table.rows[r][col]];
    }
    for (std::uint32_t c = 0; c < k; ++c) {
      if (profiles[c].size == 0) continue;
      const std::string* value = nullptr;
      std::size_t best = 0;
      for (const auto& [candidate, count] : counts[c]) {
        if (count > best) {  // map order makes ties lexicographic
          best = count;
          value = &candidate;
        }
      }
      profiles[c].modal.push_back(
          ProfileEntry{table.columns[col], *value,
                       static_cast<double>(best) /
                           static_cast<double>(profiles[c].size)});
    }
  }
  return profiles;
}

// ---------------------------------------------------------------------------
// Exploratory summaries.

struct FrequencyEntry {
  std::string value;
  std::size_t count = 0;
};

struct ColumnFrequency {
  std::string column;
  std::vector<FrequencyEntry> entries;  // count desc, then value asc
};

inline std::vector<ColumnFrequency> column_frequencies(
    const FeatureTable& table) {
  std::vector<ColumnFrequency> out;
  out.reserve(table.columns.size());
  for (std::size_t col = 0; col < table.columns.size(); ++col) {
    std::map<std::string, std::size_t> counts;
    for (const auto& row : table.rows) ++counts[row[col]];
    ColumnFrequency freq;
    freq.column = table.columns[col];
    for (const auto& [value, count] : counts) {
      freq.entries.push_back({value, count});
    }
    std::stable_sort(freq.entries.begin(), freq.entries.end(),
                     [](const FrequencyEntry& a, const FrequencyEntry& b) {
                       return a.count > b.count;
                     });
    out.push_back(std::move(freq));
  }
  return out;
}

struct HourMonthMatrix {
  bool available = false;
  std::vector<std::string> hours;   // row labels
  std::vector<std::string> months;  // column labels, calendar order
  std::vector<std::size_t> counts;  // hours x months, row-major

  std::size_t at(std::size_t hour, std::size_t month) const {
    return counts[hour * months.size() + month];
  }
};

/// Crash counts by hour of day and month; empty (available = false) when the
/// table has no Hour or Month column. Month labels follow the calendar,
/// anything unrecognized (e.g. "Unknown") goes last; hour labels sort
/// numerically where possible.
inline HourMonthMatrix hour_by_month(const FeatureTable& table,
                                     const std::string& hour_column = "Hour",
                                     const std::string& month_column = "Month") {
  HourMonthMatrix out;
  auto hour_idx = table.find_column(hour_column);
  auto month_idx = table.find_column(month_column);
  if (!hour_idx || !month_idx) return out;

  std::map<std::string, std::size_t> hour_set, month_set;
  for (const auto& row : table.rows) {
    hour_set.emplace(row[*hour_idx], 0);
    month_set.emplace(row[*month_idx], 0);
  }

  for (const auto& [label, _] : hour_set) out.hours.push_back(label);
  std::stable_sort(out.hours.begin(), out.hours.end(),
                   [](const std::string& a, const std::string& b) {
                     auto na = parse_number(a), nb = parse_number(b);
                     if (na && nb) return *na < *nb;
                     return na.has_value() > nb.has_value();
                   });
  for (const auto& [label, _] : month_set) out.months.push_back(label);
  std::stable_sort(out.months.begin(), out.months.end(),
                   [](const std::string& a, const std::string& b) {
                     const int ia = month_index(a), ib = month_index(b);
                     if (ia && ib) return ia < ib;
                     return ia > ib;  // real months before everything else
                   });

  std::size_t next = 0;
  for (const auto& label : out.hours) hour_set[label] = next++;
  next = 0;
  for (const auto& label : out.months) month_set[label] = next++;

  out.counts.assign(out.hours.size() * out.months.size(), 0);
  for (const auto& row : table.rows) {
    ++out.counts[hour_set[row[*hour_idx]] * out.months.size() +
                 month_set[row[*month_idx]]];
  }
  out.available = true;
  return out;
}

// ---------------------------------------------------------------------------
// Per-cluster association rule mining.

/// Drops items whose in-set support is below `floor`. Mining a cluster where
/// nothing clears the floor is a configuration problem, not an empty result.
inline TransactionSet filter_sparse(const TransactionSet& transactions,
                                    double floor, const std::string& context) {
  if (transactions.n_rows == 0) fail("arm", context + ": no transactions");
  const std::uint64_t need = min_support_count(floor, transactions.n_rows);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < transactions.bits.size(); ++i) {
    if (transactions.bits[i].count() >= need) keep.push_back(i);
  }
  if (keep.empty()) {
    fail("arm", context + ": every item falls below the sparse floor");
  }
  return transactions.select_items(keep);
}

struct RankedRule {
  std::vector<std::string> antecedent;  // item names, canonical order
  std::vector<std::string> consequent;
  std::uint64_t count_full = 0;
  std::uint64_t count_ante = 0;
  std::uint64_t count_cons = 0;
  std::size_t n_rows = 0;
  double support = 0.0;
  double confidence = 0.0;
  double lift = 0.0;
};

struct ClusterRules {
  std::uint32_t cluster = 0;
  std::size_t size = 0;               // transactions mined
  std::size_t items_kept = 0;         // after the sparse filter
  std::size_t frequent_itemsets = 0;
  std::size_t rules_generated = 0;    // before the top-n cut
  std::vector<RankedRule> top_rules;
};

/// Sparse filter -> Apriori -> rule generation -> ranking, over one
/// transaction set (a cluster, or the whole table).
inline ClusterRules mine_transactions(const TransactionSet& transactions,
                                      std::uint32_t cluster_id,
                                      const MiningConfig& mining) {
  ClusterRules out;
  out.cluster = cluster_id;
  out.size = transactions.n_rows;

  const std::string context = "cluster " + std::to_string(cluster_id);
  TransactionSet filtered =
      filter_sparse(transactions, mining.sparse_floor, context);
  out.items_kept = filtered.items.size();

  auto frequent =
      apriori(filtered, mining.thresholds.s_min, mining.thresholds.rl_max);
  out.frequent_itemsets = frequent.size();

  auto rules = generate_rules(frequent, filtered, mining.thresholds);
  out.rules_generated = rules.size();

  auto names = [&](const std::vector<std::uint32_t>& ids) {
    std::vector<std::string> list;
    list.reserve(ids.size());
    for (std::uint32_t id : ids) list.push_back(filtered.items[id]);
    return list;
  };
  for (const Rule& rule :
       rank_rules(std::move(rules), filtered.items, mining.top_n)) {
    out.top_rules.push_back(RankedRule{
        names(rule.antecedent), names(rule.consequent), rule.count_full,
        rule.count_ante, rule.count_cons, rule.n_rows, rule.support,
        rule.confidence, rule.lift});
  }
  return out;
}

// ---------------------------------------------------------------------------
// End-to-end run.

struct PipelineResult {
  FeatureTable table;
  LabelEncodedMatrix encoded;
  ElbowCurve curve;  // no points when fixed_k skipped the sweep
  ClusterModel model;
  std::vector<ClusterProfile> profiles;
  std::vector<ClusterRules> cluster_rules;
};

inline KMeansOptions kmeans_options(const PipelineConfig& cfg) {
  KMeansOptions opts;
  opts.seed = cfg.seed;
  opts.max_iter = cfg.cluster.max_iter;
  opts.restarts = cfg.cluster.restarts;
  return opts;
}

/// Encode + choose k (elbow sweep unless fixed) + final fit.
inline void run_cluster_stage(PipelineResult& result,
                              const PipelineConfig& cfg) {
  result.encoded = label_encode(result.table);
  const Matrix matrix = result.encoded.to_matrix(cfg.cluster.scale);
  const KMeansOptions opts = kmeans_options(cfg);

  std::uint32_t k;
  if (cfg.cluster.fixed_k) {
    k = *cfg.cluster.fixed_k;
    result.curve.chosen_k = k;
  } else {
    result.curve = wcss_sweep(matrix, cfg.cluster.k_min, cfg.cluster.k_max,
                              opts);
    k = result.curve.chosen_k;
  }
  result.model = kmeans_fit(matrix, k, opts);
}

inline PipelineResult run_pipeline(const csv::Table& input,
                                   const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult result;
  result.table = run_ingest(input, cfg.ingest);
  if (result.table.rows.empty()) {
    fail("pipeline", "no rows left after cleaning");
  }
  run_cluster_stage(result, cfg);

  const std::uint32_t k = result.model.k;
  result.profiles = profile_clusters(result.table, result.model.assignments, k);

  const TransactionSet full = one_hot(result.table);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t r = 0; r < result.model.assignments.size(); ++r) {
    members[result.model.assignments[r]].push_back(r);
  }
  result.cluster_rules.resize(k);
  parallel_for(k, [&](std::size_t c) {
    result.cluster_rules[c] = mine_transactions(
        full.subset(members[c]), static_cast<std::uint32_t>(c), cfg.mining);
  });
  return result;
}

}  // namespace crashrules
