#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crashrules/apriori.hpp"
#include "crashrules/common.hpp"
#include "crashrules/ingest.hpp"

namespace crashrules {

struct ClusterConfig {
  std::uint32_t k_min = 2;
  std::uint32_t k_max = 10;
  std::optional<std::uint32_t> fixed_k;  // set = skip the elbow sweep
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  bool scale = false;  // min-max scale the label codes before clustering
};

struct MiningConfig {
  Thresholds thresholds;
  double sparse_floor = 0.05;  // in-cluster support below this drops the item
  std::size_t top_n = 10;
};

struct PipelineConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;
  IngestSpec ingest;
  ClusterConfig cluster;
  MiningConfig mining;

  void validate() const {
    if (schema_version != 1) {
      fail("config", "unsupported schema_version " +
                         std::to_string(schema_version));
    }
    if (cluster.k_min < 1 || cluster.k_min > cluster.k_max) {
      fail("config", "cluster k range must satisfy 1 <= k_min <= k_max");
    }
    if (cluster.fixed_k && *cluster.fixed_k < 1) {
      fail("config", "fixed_k must be >= 1");
    }
    if (cluster.restarts < 1) fail("config", "restarts must be >= 1");
    if (cluster.max_iter < 1) fail("config", "max_iter must be >= 1");
    mining.thresholds.validate();
    if (!(mining.sparse_floor > 0.0 &&
          mining.sparse_floor <= mining.thresholds.s_min)) {
      fail("config", "sparse_floor must be in (0, min_support]");
    }
    if (mining.top_n < 1) fail("config", "top_n must be >= 1");
    if (ingest.missing_threshold <= 0.0 || ingest.missing_threshold > 1.0) {
      fail("config", "missing_threshold must be in (0, 1]");
    }
  }
};

// ---------------------------------------------------------------------------
// JSON loading. Unknown keys are rejected at every level so typos fail loudly
// instead of silently reverting a setting to its default.

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& obj, const std::string& ctx,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail("config", ctx + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail("config", "unknown key '" + it.key() + "' in " + ctx);
  }
}

/// Member lookup; a JSON null counts as absent.
inline const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

inline std::string as_string(const json& v, const std::string& ctx) {
  if (!v.is_string()) fail("config", ctx + " must be a string");
  return v.get<std::string>();
}

inline double as_number(const json& v, const std::string& ctx) {
  if (!v.is_number()) fail("config", ctx + " must be a number");
  return v.get<double>();
}

inline std::uint64_t as_uint(const json& v, const std::string& ctx) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v.get<long long>());
  }
  fail("config", ctx + " must be a non-negative integer");
}

inline bool as_bool(const json& v, const std::string& ctx) {
  if (!v.is_boolean()) fail("config", ctx + " must be a boolean");
  return v.get<bool>();
}

inline const json& as_array(const json& v, const std::string& ctx) {
  if (!v.is_array()) fail("config", ctx + " must be an array");
  return v;
}

inline std::vector<std::string> string_list(const json& v,
                                            const std::string& ctx) {
  std::vector<std::string> out;
  for (const auto& item : as_array(v, ctx)) {
    out.push_back(as_string(item, ctx + " entry"));
  }
  return out;
}

inline ColumnKind parse_kind(const std::string& text, const std::string& ctx) {
  if (text == "categorical") return ColumnKind::Categorical;
  if (text == "numeric") return ColumnKind::Numeric;
  if (text == "timestamp") return ColumnKind::Timestamp;
  if (text == "narrative") return ColumnKind::Narrative;
  fail("config", ctx + ": unknown column kind '" + text + "'");
}

inline ColumnRole parse_role(const std::string& text, const std::string& ctx) {
  if (text == "keep") return ColumnRole::Keep;
  if (text == "redundant") return ColumnRole::DropRedundant;
  fail("config", ctx + ": unknown column role '" + text + "'");
}

inline const char* kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Numeric: return "numeric";
    case ColumnKind::Timestamp: return "timestamp";
    case ColumnKind::Narrative: return "narrative";
  }
  return "categorical";
}

inline const char* role_name(ColumnRole role) {
  return role == ColumnRole::DropRedundant ? "redundant" : "keep";
}

inline IngestSpec parse_ingest(const json& obj) {
  check_keys(obj, "ingest",
             {"id_column", "missing_sentinels", "missing_threshold", "columns",
              "temporal", "automation", "bins", "exclude"});
  IngestSpec spec;
  spec.automation = AutomationSpec::defaults();

  if (auto* v = find(obj, "id_column")) {
    spec.id_column = as_string(*v, "ingest.id_column");
  }
  if (auto* v = find(obj, "missing_sentinels")) {
    spec.missing_sentinels = string_list(*v, "ingest.missing_sentinels");
  }
  if (auto* v = find(obj, "missing_threshold")) {
    spec.missing_threshold = as_number(*v, "ingest.missing_threshold");
  }
  if (auto* v = find(obj, "columns")) {
    for (const auto& col : as_array(*v, "ingest.columns")) {
      check_keys(col, "ingest.columns entry", {"name", "kind", "role"});
      ColumnSpec out;
      auto* name = find(col, "name");
      if (!name) fail("config", "ingest.columns entry is missing 'name'");
      out.name = as_string(*name, "column name");
      if (auto* kind = find(col, "kind")) {
        out.kind = parse_kind(as_string(*kind, "column kind"), out.name);
      }
      if (auto* role = find(col, "role")) {
        out.role = parse_role(as_string(*role, "column role"), out.name);
      }
      spec.columns.push_back(std::move(out));
    }
  }
  if (auto* v = find(obj, "temporal")) {
    check_keys(*v, "ingest.temporal", {"date_column", "time_column"});
    if (auto* d = find(*v, "date_column")) {
      spec.temporal.date_column = as_string(*d, "ingest.temporal.date_column");
    }
    if (auto* t = find(*v, "time_column")) {
      spec.temporal.time_column = as_string(*t, "ingest.temporal.time_column");
    }
  }
  if (auto* v = find(obj, "automation")) {
    check_keys(*v, "ingest.automation",
               {"version_column", "narrative_column", "system_column",
                "output_column", "rules", "system_fallback"});
    auto& autom = spec.automation;
    if (auto* c = find(*v, "version_column")) {
      autom.version_column = as_string(*c, "automation.version_column");
    }
    if (auto* c = find(*v, "narrative_column")) {
      autom.narrative_column = as_string(*c, "automation.narrative_column");
    }
    if (auto* c = find(*v, "system_column")) {
      autom.system_column = as_string(*c, "automation.system_column");
    }
    if (auto* c = find(*v, "output_column")) {
      autom.output_column = as_string(*c, "automation.output_column");
    }
    if (auto* c = find(*v, "rules")) {
      autom.rules.clear();
      for (const auto& rule : as_array(*c, "automation.rules")) {
        check_keys(rule, "automation.rules entry", {"level", "patterns"});
        auto* level = find(rule, "level");
        auto* patterns = find(rule, "patterns");
        if (!level || !patterns) {
          fail("config", "automation rule needs 'level' and 'patterns'");
        }
        autom.rules.push_back(KeywordRule{
            as_string(*level, "automation rule level"),
            string_list(*patterns, "automation rule patterns")});
      }
    }
    if (auto* c = find(*v, "system_fallback")) {
      autom.system_fallback.clear();
      for (const auto& entry : as_array(*c, "automation.system_fallback")) {
        check_keys(entry, "automation.system_fallback entry",
                   {"system", "level"});
        auto* system = find(entry, "system");
        auto* level = find(entry, "level");
        if (!system || !level) {
          fail("config", "system_fallback entry needs 'system' and 'level'");
        }
        autom.system_fallback.emplace_back(
            as_string(*system, "system_fallback system"),
            as_string(*level, "system_fallback level"));
      }
    }
  }
  if (auto* v = find(obj, "bins")) {
    for (const auto& bin : as_array(*v, "ingest.bins")) {
      check_keys(bin, "ingest.bins entry", {"column", "output", "bins"});
      BinSpec out;
      auto* column = find(bin, "column");
      auto* bins = find(bin, "bins");
      if (!column || !bins) {
        fail("config", "bin spec needs 'column' and 'bins'");
      }
      out.column = as_string(*column, "bin column");
      if (auto* o = find(bin, "output")) {
        out.output = as_string(*o, "bin output");
      }
      for (const auto& b : as_array(*bins, "bin list")) {
        check_keys(b, "bin entry", {"label", "upper"});
        auto* label = find(b, "label");
        if (!label) fail("config", "bin entry is missing 'label'");
        Bin parsed;
        parsed.label = as_string(*label, "bin label");
        if (auto* upper = find(b, "upper")) {
          parsed.upper = as_number(*upper, "bin upper");
        }
        out.bins.push_back(std::move(parsed));
      }
      spec.bins.push_back(std::move(out));
    }
  }
  if (auto* v = find(obj, "exclude")) {
    check_keys(*v, "ingest.exclude", {"column", "values"});
    if (auto* c = find(*v, "column")) {
      spec.exclude.column = as_string(*c, "exclude.column");
    }
    if (auto* c = find(*v, "values")) {
      spec.exclude.values = string_list(*c, "exclude.values");
    }
  }
  return spec;
}

inline ClusterConfig parse_cluster(const json& obj) {
  check_keys(obj, "cluster",
             {"k_min", "k_max", "fixed_k", "restarts", "max_iter", "scale"});
  ClusterConfig cfg;
  if (auto* v = find(obj, "k_min")) {
    cfg.k_min = static_cast<std::uint32_t>(as_uint(*v, "cluster.k_min"));
  }
  if (auto* v = find(obj, "k_max")) {
    cfg.k_max = static_cast<std::uint32_t>(as_uint(*v, "cluster.k_max"));
  }
  if (auto* v = find(obj, "fixed_k")) {
    cfg.fixed_k = static_cast<std::uint32_t>(as_uint(*v, "cluster.fixed_k"));
  }
  if (auto* v = find(obj, "restarts")) {
    cfg.restarts = as_uint(*v, "cluster.restarts");
  }
  if (auto* v = find(obj, "max_iter")) {
    cfg.max_iter = as_uint(*v, "cluster.max_iter");
  }
  if (auto* v = find(obj, "scale")) {
    cfg.scale = as_bool(*v, "cluster.scale");
  }
  return cfg;
}

inline MiningConfig parse_mining(const json& obj) {
  check_keys(obj, "mining",
             {"min_support", "min_confidence", "min_lift", "max_rule_len",
              "sparse_floor", "top_n"});
  MiningConfig cfg;
  bool floor_set = false;
  if (auto* v = find(obj, "min_support")) {
    cfg.thresholds.s_min = as_number(*v, "mining.min_support");
  }
  if (auto* v = find(obj, "min_confidence")) {
    cfg.thresholds.c_min = as_number(*v, "mining.min_confidence");
  }
  if (auto* v = find(obj, "min_lift")) {
    cfg.thresholds.l_min = as_number(*v, "mining.min_lift");
  }
  if (auto* v = find(obj, "max_rule_len")) {
    cfg.thresholds.rl_max =
        static_cast<std::uint32_t>(as_uint(*v, "mining.max_rule_len"));
  }
  if (auto* v = find(obj, "sparse_floor")) {
    cfg.sparse_floor = as_number(*v, "mining.sparse_floor");
    floor_set = true;
  }
  if (auto* v = find(obj, "top_n")) {
    cfg.top_n = as_uint(*v, "mining.top_n");
  }
  if (!floor_set) cfg.sparse_floor = cfg.thresholds.s_min;
  return cfg;
}

}  // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& root) {
  detail::check_keys(root, "config",
                     {"schema_version", "seed", "ingest", "cluster", "mining"});
  PipelineConfig cfg;
  auto* version = detail::find(root, "schema_version");
  if (!version) fail("config", "missing schema_version");
  cfg.schema_version =
      static_cast<int>(detail::as_uint(*version, "schema_version"));
  if (auto* v = detail::find(root, "seed")) {
    cfg.seed = detail::as_uint(*v, "seed");
  }
  if (auto* v = detail::find(root, "ingest")) {
    cfg.ingest = detail::parse_ingest(*v);
  } else {
    cfg.ingest.automation = AutomationSpec::defaults();
  }
  if (auto* v = detail::find(root, "cluster")) {
    cfg.cluster = detail::parse_cluster(*v);
  }
  if (auto* v = detail::find(root, "mining")) {
    cfg.mining = detail::parse_mining(*v);
  }
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("config", "cannot open " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail("config", path + ": " + e.what());
  }
  return parse_config(root);
}

/// Fully resolved config echo: every field explicit, keys sorted by the json
/// library, so equal configs always serialize identically.
inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
  using detail::json;
  json ingest;
  ingest["id_column"] = cfg.ingest.id_column;
  ingest["missing_sentinels"] = cfg.ingest.missing_sentinels;
  ingest["missing_threshold"] = cfg.ingest.missing_threshold;
  json columns = json::array();
  for (const auto& col : cfg.ingest.columns) {
    columns.push_back({{"name", col.name},
                       {"kind", detail::kind_name(col.kind)},
                       {"role", detail::role_name(col.role)}});
  }
  ingest["columns"] = std::move(columns);
  ingest["temporal"] = {{"date_column", cfg.ingest.temporal.date_column},
                        {"time_column", cfg.ingest.temporal.time_column}};
  json rules = json::array();
  for (const auto& rule : cfg.ingest.automation.rules) {
    rules.push_back({{"level", rule.level}, {"patterns", rule.patterns}});
  }
  json fallback = json::array();
  for (const auto& [system, level] : cfg.ingest.automation.system_fallback) {
    fallback.push_back({{"system", system}, {"level", level}});
  }
  ingest["automation"] = {
      {"version_column", cfg.ingest.automation.version_column},
      {"narrative_column", cfg.ingest.automation.narrative_column},
      {"system_column", cfg.ingest.automation.system_column},
      {"output_column", cfg.ingest.automation.output_column},
      {"rules", std::move(rules)},
      {"system_fallback", std::move(fallback)}};
  json bins = json::array();
  for (const auto& bin_spec : cfg.ingest.bins) {
    json list = json::array();
    for (const auto& bin : bin_spec.bins) {
      json entry = {{"label", bin.label}};
      if (bin.upper) entry["upper"] = *bin.upper;
      list.push_back(std::move(entry));
    }
    bins.push_back({{"column", bin_spec.column},
                    {"output", bin_spec.output},
                    {"bins", std::move(list)}});
  }
  ingest["bins"] = std::move(bins);
  ingest["exclude"] = {{"column", cfg.ingest.exclude.column},
                       {"values", cfg.ingest.exclude.values}};

  json cluster = {{"k_min", cfg.cluster.k_min},
                  {"k_max", cfg.cluster.k_max},
                  {"restarts", cfg.cluster.restarts},
                  {"max_iter", cfg.cluster.max_iter},
                  {"scale", cfg.cluster.scale}};
  if (cfg.cluster.fixed_k) cluster["fixed_k"] = *cfg.cluster.fixed_k;

  json mining = {{"min_support", cfg.mining.thresholds.s_min},
                 {"min_confidence", cfg.mining.thresholds.c_min},
                 {"min_lift", cfg.mining.thresholds.l_min},
                 {"max_rule_len", cfg.mining.thresholds.rl_max},
                 {"sparse_floor", cfg.mining.sparse_floor},
                 {"top_n", cfg.mining.top_n}};

  return json{{"schema_version", cfg.schema_version},
              {"seed", cfg.seed},
              {"ingest", std::move(ingest)},
              {"cluster", std::move(cluster)},
              {"mining", std::move(mining)}};
}

inline std::uint64_t config_hash(const PipelineConfig& cfg) {
  return fnv1a64(config_to_json(cfg).dump());
}

}  // namespace crashrules
