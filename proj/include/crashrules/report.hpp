#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashrules/config.hpp"
#include "crashrules/csv.hpp"
#include "crashrules/pipeline.hpp"
#include "crashrules/version.hpp"

namespace crashrules {

using nlohmann::json;

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("io", "cannot write " + path.string());
  return out;
}

// ---------------------------------------------------------------------------
// JSON views of the result pieces.

inline json provenance_to_json(const Provenance& prov) {
  json dropped = json::array();
  for (const auto& col : prov.dropped_columns) {
    json entry = {{"name", col.name}, {"reason", col.reason}};
    if (col.reason == "missing" || col.reason == "all-missing") {
      entry["missing_fraction"] = col.missing_fraction;
    }
    dropped.push_back(std::move(entry));
  }
  return json{{"input_rows", prov.input_rows},
              {"duplicates_removed", prov.duplicates_removed},
              {"dropped_columns", std::move(dropped)},
              {"imputed_numeric", prov.imputed_numeric},
              {"imputed_categorical", prov.imputed_categorical},
              {"unparsed_cells", prov.unparsed_cells},
              {"skipped_bins", prov.skipped_bins},
              {"rows_excluded", prov.rows_excluded},
              {"output_rows", prov.output_rows},
              {"output_columns", prov.output_columns}};
}

inline json model_to_json(const ClusterModel& model,
                          const std::vector<std::string>& columns) {
  json centroids = json::array();
  for (std::uint32_t c = 0; c < model.k; ++c) {
    json row = json::array();
    for (std::size_t d = 0; d < model.dims; ++d) {
      row.push_back(model.centroids[c * model.dims + d]);
    }
    centroids.push_back(std::move(row));
  }
  json sizes = json::array();
  for (std::uint32_t c = 0; c < model.k; ++c) {
    sizes.push_back(model.cluster_size(c));
  }
  return json{{"k", model.k},
              {"columns", columns},
              {"wcss", model.wcss},
              {"iterations", model.iterations},
              {"seed", model.seed},
              {"sizes", std::move(sizes)},
              {"centroids", std::move(centroids)},
              {"assignments", model.assignments}};
}

inline json curve_to_json(const ElbowCurve& curve) {
  json points = json::array();
  for (const auto& p : curve.points) {
    points.push_back({{"k", p.k}, {"wcss", p.wcss}});
  }
  return json{{"chosen_k", curve.chosen_k}, {"points", std::move(points)}};
}

inline json profiles_to_json(const std::vector<ClusterProfile>& profiles) {
  json out = json::array();
  for (const auto& profile : profiles) {
    json modal = json::array();
    for (const auto& entry : profile.modal) {
      modal.push_back({{"column", entry.column},
                       {"value", entry.value},
                       {"share", entry.share}});
    }
    out.push_back({{"cluster", profile.cluster},
                   {"size", profile.size},
                   {"modal", std::move(modal)}});
  }
  return out;
}

inline json rule_to_json(const RankedRule& rule) {
  return json{{"antecedent", rule.antecedent},
              {"consequent", rule.consequent},
              {"support", rule.support},
              {"confidence", rule.confidence},
              {"lift", rule.lift},
              {"count_full", rule.count_full},
              {"count_antecedent", rule.count_ante},
              {"count_consequent", rule.count_cons},
              {"rows", rule.n_rows}};
}

inline json cluster_rules_to_json(const ClusterRules& mined) {
  json rules = json::array();
  for (const auto& rule : mined.top_rules) rules.push_back(rule_to_json(rule));
  return json{{"cluster", mined.cluster},
              {"size", mined.size},
              {"items_kept", mined.items_kept},
              {"frequent_itemsets", mined.frequent_itemsets},
              {"rules_generated", mined.rules_generated},
              {"rules", std::move(rules)}};
}

inline json report_to_json(const PipelineResult& result,
                           const PipelineConfig& cfg) {
  json clusters = json::array();
  for (const auto& mined : result.cluster_rules) {
    clusters.push_back(cluster_rules_to_json(mined));
  }
  return json{
      {"provenance", provenance_to_json(result.table.provenance)},
      {"columns", result.table.columns},
      {"clustering",
       {{"elbow", curve_to_json(result.curve)},
        {"model", model_to_json(result.model, result.encoded.columns)}}},
      {"profiles", profiles_to_json(result.profiles)},
      {"mining",
       {{"min_support", cfg.mining.thresholds.s_min},
        {"min_confidence", cfg.mining.thresholds.c_min},
        {"min_lift", cfg.mining.thresholds.l_min},
        {"max_rule_len", cfg.mining.thresholds.rl_max},
        {"sparse_floor", cfg.mining.sparse_floor},
        {"top_n", cfg.mining.top_n},
        {"clusters", std::move(clusters)}}}};
}

inline json dictionaries_to_json(const LabelEncodedMatrix& encoded) {
  json out;
  for (std::size_t c = 0; c < encoded.columns.size(); ++c) {
    out[encoded.columns[c]] = encoded.dictionaries[c];
  }
  return out;
}

/// Input + resolved config fingerprint of a run. Content-derived only, so a
/// rerun of the same input and config reproduces it byte for byte.
inline json manifest_to_json(const std::string& command,
                             const PipelineConfig& cfg,
                             const std::string& input_path,
                             std::uint64_t input_hash,
                             const std::vector<std::string>& outputs) {
  return json{{"tool", "crash-rules"},
              {"version", kVersion},
              {"command", command},
              {"config_hash", to_hex(config_hash(cfg))},
              {"config", config_to_json(cfg)},
              {"input", {{"path", input_path}, {"fnv1a64", to_hex(input_hash)}}},
              {"outputs", outputs}};
}

// ---------------------------------------------------------------------------
// CSV artifacts.

inline void write_feature_csv(std::ostream& out, const FeatureTable& table) {
  csv::write_row(out, table.columns);
  for (const auto& row : table.rows) csv::write_row(out, row);
}

inline void write_elbow_csv(std::ostream& out, const ElbowCurve& curve) {
  out << "k,wcss\n";
  for (const auto& p : curve.points) {
    csv::write_row(out, {std::to_string(p.k), format_number(p.wcss)});
  }
}

inline std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += " + ";
    out += names[i];
  }
  return out;
}

inline void write_rules_header(std::ostream& out) {
  out << "cluster,antecedent,consequent,support,confidence,lift\n";
}

inline void write_rules_rows(std::ostream& out, const ClusterRules& mined) {
  for (const auto& rule : mined.top_rules) {
    csv::write_row(out, {std::to_string(mined.cluster),
                         join_names(rule.antecedent),
                         join_names(rule.consequent),
                         format_number(rule.support),
                         format_number(rule.confidence),
                         format_number(rule.lift)});
  }
}

inline void write_frequencies_csv(std::ostream& out,
                                  const std::vector<ColumnFrequency>& freqs) {
  out << "column,value,count\n";
  for (const auto& freq : freqs) {
    for (const auto& entry : freq.entries) {
      csv::write_row(out,
                     {freq.column, entry.value, std::to_string(entry.count)});
    }
  }
}

inline void write_hour_month_csv(std::ostream& out,
                                 const HourMonthMatrix& matrix) {
  std::vector<std::string> header = {"Hour"};
  header.insert(header.end(), matrix.months.begin(), matrix.months.end());
  csv::write_row(out, header);
  for (std::size_t h = 0; h < matrix.hours.size(); ++h) {
    std::vector<std::string> row = {matrix.hours[h]};
    for (std::size_t m = 0; m < matrix.months.size(); ++m) {
      row.push_back(std::to_string(matrix.at(h, m)));
    }
    csv::write_row(out, row);
  }
}

// ---------------------------------------------------------------------------
// Run directory: everything a full pipeline run produces, under a
// config-hash-derived name so distinct configurations never collide.

inline std::filesystem::path run_directory(const std::filesystem::path& base,
                                           const PipelineConfig& cfg) {
  return base / ("run-" + to_hex(config_hash(cfg)));
}

inline std::filesystem::path write_run_outputs(
    const std::filesystem::path& base, const PipelineResult& result,
    const PipelineConfig& cfg, const std::string& input_path,
    std::uint64_t input_hash) {
  const std::filesystem::path dir = run_directory(base, cfg);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail("io", "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::string> outputs = {"report.json", "cleaned.csv",
                                      "elbow.csv", "profiles.json"};
  {
    auto out = open_out(dir / "report.json");
    out << report_to_json(result, cfg).dump(2) << '\n';
  }
  {
    auto out = open_out(dir / "cleaned.csv");
    write_feature_csv(out, result.table);
  }
  {
    auto out = open_out(dir / "elbow.csv");
    write_elbow_csv(out, result.curve);
  }
  {
    auto out = open_out(dir / "profiles.json");
    out << profiles_to_json(result.profiles).dump(2) << '\n';
  }
  for (const auto& mined : result.cluster_rules) {
    const std::string name =
        "cluster_" + std::to_string(mined.cluster) + "_rules.csv";
    auto out = open_out(dir / name);
    write_rules_header(out);
    write_rules_rows(out, mined);
    outputs.push_back(name);
  }
  {
    outputs.push_back("manifest.json");
    auto out = open_out(dir / "manifest.json");
    out << manifest_to_json("pipeline", cfg, input_path, input_hash, outputs)
               .dump(2)
        << '\n';
  }
  return dir;
}

}  // namespace crashrules
