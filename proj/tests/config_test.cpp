#include "crashrules/config.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "crashrules/common.hpp"
#include "crashrules/synthetic.hpp"

using namespace crashrules;
using nlohmann::json;

namespace {

json minimal() { return json{{"schema_version", 1}}; }

std::string error_message(const json& doc) {
  try {
    parse_config(doc);
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "config");
    return e.what();
  }
  ADD_FAILURE() << "expected parse_config to throw";
  return "";
}

TEST(Parse, MinimalConfigGetsAllDefaults) {
  const PipelineConfig cfg = parse_config(minimal());
  EXPECT_EQ(cfg.schema_version, 1);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_EQ(cfg.cluster.k_min, 2u);
  EXPECT_EQ(cfg.cluster.k_max, 10u);
  EXPECT_FALSE(cfg.cluster.fixed_k.has_value());
  EXPECT_EQ(cfg.cluster.restarts, 10u);
  EXPECT_DOUBLE_EQ(cfg.mining.thresholds.s_min, 0.05);
  EXPECT_DOUBLE_EQ(cfg.mining.thresholds.c_min, 0.6);
  EXPECT_DOUBLE_EQ(cfg.mining.thresholds.l_min, 1.2);
  EXPECT_EQ(cfg.mining.thresholds.rl_max, 3u);
  EXPECT_DOUBLE_EQ(cfg.mining.sparse_floor, 0.05);
  EXPECT_EQ(cfg.mining.top_n, 10u);
  EXPECT_EQ(cfg.ingest.id_column, "Report ID");
  EXPECT_DOUBLE_EQ(cfg.ingest.missing_threshold, 0.5);
  // The automation defaults ship even when the section is absent.
  EXPECT_FALSE(cfg.ingest.automation.rules.empty());
}

TEST(Parse, SchemaVersionIsRequired) {
  EXPECT_NE(error_message(json::object()).find("schema_version"),
            std::string::npos);
  json doc = {{"schema_version", 2}};
  EXPECT_NE(error_message(doc).find("unsupported"), std::string::npos);
}

TEST(Parse, UnknownKeysAreRejectedEverywhere) {
  json doc = minimal();
  doc["typo"] = 1;
  EXPECT_NE(error_message(doc).find("'typo'"), std::string::npos);

  doc = minimal();
  doc["ingest"] = {{"id_col", "x"}};
  EXPECT_NE(error_message(doc).find("'id_col'"), std::string::npos);

  doc = minimal();
  doc["cluster"] = {{"kmin", 2}};
  EXPECT_NE(error_message(doc).find("'kmin'"), std::string::npos);

  doc = minimal();
  doc["mining"] = {{"support", 0.1}};
  EXPECT_NE(error_message(doc).find("'support'"), std::string::npos);

  doc = minimal();
  doc["ingest"] = {{"temporal", {{"date", "Crash Date"}}}};
  EXPECT_NE(error_message(doc).find("'date'"), std::string::npos);

  doc = minimal();
  doc["ingest"] = {{"automation", {{"keyword_rules", json::array()}}}};
  EXPECT_NE(error_message(doc).find("'keyword_rules'"), std::string::npos);

  doc = minimal();
  doc["ingest"] = {
      {"columns", json::array({{{"name", "A"}, {"type", "numeric"}}})}};
  EXPECT_NE(error_message(doc).find("'type'"), std::string::npos);
}

TEST(Parse, NullMeansAbsent) {
  json doc = minimal();
  doc["seed"] = nullptr;
  doc["cluster"] = {{"fixed_k", nullptr}, {"k_max", 4}};
  const PipelineConfig cfg = parse_config(doc);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_FALSE(cfg.cluster.fixed_k.has_value());
  EXPECT_EQ(cfg.cluster.k_max, 4u);
}

TEST(Parse, TypeErrorsAreCaught) {
  json doc = minimal();
  doc["seed"] = "zero";
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["seed"] = -3;
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["cluster"] = {{"scale", 1}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["mining"] = {{"min_support", "lots"}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["ingest"] = {{"missing_sentinels", "N/A"}};
  EXPECT_THROW(parse_config(doc), Error);
}

TEST(Parse, SemanticValidationRejectsBadRanges) {
  json doc = minimal();
  doc["cluster"] = {{"k_min", 5}, {"k_max", 2}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["cluster"] = {{"k_min", 0}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["cluster"] = {{"restarts", 0}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["mining"] = {{"min_support", 0.0}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["mining"] = {{"min_confidence", 1.5}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["mining"] = {{"max_rule_len", 1}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["mining"] = {{"sparse_floor", 0.2}};  // above the 0.05 default support
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["mining"] = {{"top_n", 0}};
  EXPECT_THROW(parse_config(doc), Error);

  doc = minimal();
  doc["ingest"] = {{"missing_threshold", 0.0}};
  EXPECT_THROW(parse_config(doc), Error);
}

TEST(Parse, SparseFloorDefaultsToMinSupport) {
  json doc = minimal();
  doc["mining"] = {{"min_support", 0.2}};
  EXPECT_DOUBLE_EQ(parse_config(doc).mining.sparse_floor, 0.2);

  doc["mining"]["sparse_floor"] = 0.1;
  EXPECT_DOUBLE_EQ(parse_config(doc).mining.sparse_floor, 0.1);
}

TEST(Parse, AutomationRulesReplaceTheDefaults) {
  json doc = minimal();
  doc["ingest"] = {
      {"automation",
       {{"version_column", "Version"},
        {"rules",
         json::array({{{"level", "5"}, {"patterns", {"level 5"}}}})}}}};
  const PipelineConfig cfg = parse_config(doc);
  ASSERT_EQ(cfg.ingest.automation.rules.size(), 1u);
  EXPECT_EQ(cfg.ingest.automation.rules[0].level, "5");
  // Fallback table still carries the defaults.
  EXPECT_FALSE(cfg.ingest.automation.system_fallback.empty());
}

TEST(RoundTrip, EchoParsesBackToTheSameConfig) {
  const PipelineConfig cfg = synthetic_config(42);
  const json echo = config_to_json(cfg);
  const PipelineConfig back = parse_config(echo);
  EXPECT_EQ(config_hash(cfg), config_hash(back));
  EXPECT_EQ(config_to_json(back).dump(), echo.dump());
  EXPECT_EQ(back.ingest.columns.size(), cfg.ingest.columns.size());
  EXPECT_EQ(back.ingest.bins.size(), cfg.ingest.bins.size());
}

TEST(RoundTrip, FixedKSurvivesOnlyWhenSet) {
  PipelineConfig cfg = synthetic_config(1);
  EXPECT_FALSE(config_to_json(cfg)["cluster"].contains("fixed_k"));
  cfg.cluster.fixed_k = 3;
  const json echo = config_to_json(cfg);
  EXPECT_EQ(echo["cluster"]["fixed_k"], 3);
  EXPECT_EQ(parse_config(echo).cluster.fixed_k, std::optional<std::uint32_t>{3});
}

TEST(Hash, StableForEqualConfigsSensitiveToChanges) {
  const PipelineConfig a = synthetic_config(7);
  const PipelineConfig b = synthetic_config(7);
  EXPECT_EQ(config_hash(a), config_hash(b));

  PipelineConfig c = synthetic_config(7);
  c.seed = 8;
  EXPECT_NE(config_hash(a), config_hash(c));

  PipelineConfig d = synthetic_config(7);
  d.mining.thresholds.s_min = 0.04;
  d.mining.sparse_floor = 0.04;
  EXPECT_NE(config_hash(a), config_hash(d));
}

TEST(LoadConfig, ReadsAFileAndWrapsJsonErrors) {
  const std::string dir = testing::TempDir();
  const std::string good = dir + "/cfg_good.json";
  const std::string bad = dir + "/cfg_bad.json";
  {
    std::ofstream out(good);
    out << config_to_json(synthetic_config(3)).dump(2);
  }
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  EXPECT_EQ(config_hash(load_config(good)), config_hash(synthetic_config(3)));
  try {
    load_config(bad);
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "config");
    EXPECT_NE(std::string(e.what()).find("cfg_bad.json"), std::string::npos);
  }
  EXPECT_THROW(load_config(dir + "/does_not_exist.json"), Error);
  std::remove(good.c_str());
  std::remove(bad.c_str());
}

}  // namespace
