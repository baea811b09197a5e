#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crashrules/config.hpp"
#include "crashrules/csv.hpp"
#include "crashrules/ingest.hpp"
#include "crashrules/rng.hpp"

namespace crashrules {

/// A rule the generator guarantees (confidence 1.0 wherever the antecedent
/// occurs), expressed as "Column=Value" item names on the cleaned table.
struct PlantedRule {
  std::vector<std::string> antecedent;
  std::vector<std::string> consequent;
};

struct SyntheticData {
  csv::Table csv;  // messy raw input; duplicate report ids appended at the end
  // Planted cluster per row that survives dedup + the Level-3 exclusion,
  // aligned with the cleaned table's row order.
  std::vector<std::uint32_t> planted;
  std::vector<PlantedRule> rules;
  std::size_t duplicate_rows = 0;
  std::size_t level3_rows = 0;  // removed by the default row exclusion
};

/// Ingest spec matching make_synthetic()'s header.
inline IngestSpec synthetic_ingest_spec() {
  IngestSpec spec;
  spec.id_column = "Report ID";
  spec.missing_sentinels = {"N/A", "UNK"};
  spec.columns = {
      {"Report ID", ColumnKind::Categorical, ColumnRole::Keep},
      {"VIN", ColumnKind::Categorical, ColumnRole::DropRedundant},
      {"Make", ColumnKind::Categorical, ColumnRole::Keep},
      {"Model", ColumnKind::Categorical, ColumnRole::Keep},
      {"Automation System", ColumnKind::Categorical, ColumnRole::Keep},
      {"Version", ColumnKind::Categorical, ColumnRole::Keep},
      {"Narrative", ColumnKind::Narrative, ColumnRole::Keep},
      {"Crash Date", ColumnKind::Timestamp, ColumnRole::Keep},
      {"Crash Time", ColumnKind::Timestamp, ColumnRole::Keep},
      {"City", ColumnKind::Categorical, ColumnRole::Keep},
      {"State", ColumnKind::Categorical, ColumnRole::Keep},
      {"Roadway Type", ColumnKind::Categorical, ColumnRole::Keep},
      {"Posted Speed Limit", ColumnKind::Numeric, ColumnRole::Keep},
      {"Lighting", ColumnKind::Categorical, ColumnRole::Keep},
      {"Weather", ColumnKind::Categorical, ColumnRole::Keep},
      {"Roadway Surface", ColumnKind::Categorical, ColumnRole::Keep},
      {"SV Contact Area", ColumnKind::Categorical, ColumnRole::Keep},
      {"Mileage", ColumnKind::Numeric, ColumnRole::Keep},
      {"Media", ColumnKind::Categorical, ColumnRole::Keep},
  };
  spec.temporal = {"Crash Date", "Crash Time"};
  spec.automation = AutomationSpec::defaults();
  spec.automation.version_column = "Version";
  spec.automation.narrative_column = "Narrative";
  spec.automation.system_column = "Automation System";
  spec.bins = {
      {"Posted Speed Limit", "Speed Band",
       {{"0-30", 30.0}, {"31-50", 50.0}, {"51+", std::nullopt}}},
      {"Mileage", "Mileage Band",
       {{"low", 20000.0}, {"mid", 50000.0}, {"high", std::nullopt}}},
  };
  spec.exclude = {"Automation Level", {"3"}};
  return spec;
}

inline PipelineConfig synthetic_config(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.seed = seed;
  cfg.ingest = synthetic_ingest_spec();
  return cfg;
}

namespace detail {

struct ClusterRecipe {
  const char* make;
  std::array<const char*, 2> models;
  const char* system;
  std::array<const char*, 2> versions;  // both must tag the same level
  const char* city;
  const char* state;
  const char* roadway;
  std::array<int, 3> speeds;
  const char* lighting;
  const char* contact;
  std::array<int, 2> hours;
  std::array<int, 2> mileages;
};

inline const std::array<ClusterRecipe, 3>& cluster_recipes() {
  static const std::array<ClusterRecipe, 3> recipes = {{
      {"Tesla",
       {"Model 3", "Model Y"},
       "ADAS",
       {"Highway Assist Level 2", "Highway Assist Level 2.4"},
       "Austin",
       "TX",
       "Highway",
       {55, 65, 70},
       "Daylight",
       "Front",
       {13, 14},
       {8000, 18000}},
      {"Jaguar",
       {"I-PACE", "I-PACE LR"},
       "ADS",
       {"L4 robotaxi stack", "L4 robotaxi stack rev B"},
       "San Francisco",
       "CA",
       "Intersection",
       {25, 25, 30},
       "Dark - Lighted",
       "Left",
       {21, 22},
       {25000, 45000}},
      {"Ford",
       {"Shuttle 100", "Shuttle 200"},
       "ADS",
       {"4th Gen shuttle software", "4th Gen shuttle software beta"},
       "Phoenix",
       "AZ",
       "Street",
       {35, 40, 45},
       "Dusk",
       "Rear",
       {17, 18},
       {60000, 70000}},
  }};
  return recipes;
}

}  // namespace detail

/// Deterministic messy crash-report table with three planted clusters and a
/// handful of guaranteed weather rules (rainy crashes always report a wet
/// roadway). Includes everything the cleaning stage must cope with: duplicate
/// report ids, a mostly-missing column, unparseable numbers and dates, free
/// text, and a few Level-3 rows for the exclusion filter. `scale` multiplies
/// every row count.
inline SyntheticData make_synthetic(std::uint64_t seed, std::size_t scale = 1) {
  const auto& recipes = detail::cluster_recipes();
  const std::array<std::size_t, 3> sizes = {70 * scale, 65 * scale, 65 * scale};
  const std::size_t level3_per_cluster = 2 * scale;

  SyntheticData data;
  data.csv.header = {"Report ID", "VIN",        "Make",
                     "Model",     "Automation System", "Version",
                     "Narrative", "Crash Date", "Crash Time",
                     "City",      "State",      "Roadway Type",
                     "Posted Speed Limit",      "Lighting",
                     "Weather",   "Roadway Surface",   "SV Contact Area",
                     "Mileage",   "Media"};

  struct PendingRow {
    std::uint32_t cluster;
    bool level3;
  };
  std::vector<PendingRow> plan;
  for (std::uint32_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < sizes[c]; ++i) plan.push_back({c, false});
    for (std::size_t i = 0; i < level3_per_cluster; ++i) {
      plan.push_back({c, true});
    }
  }
  Rng rng(Rng::mix(seed, 0xC5A8));
  for (std::size_t i = plan.size(); i > 1; --i) {  // Fisher-Yates
    std::swap(plan[i - 1], plan[rng.next_below(i)]);
  }

  const char* months[3] = {"02", "07", "10"};
  const char* narratives[3] = {
      "SV was struck, while proceeding straight, near the crosswalk.",
      "Contact occurred with a fixed object; the \"hands-on\" alert had fired.",
      "Another vehicle merged, then braked suddenly in front of the SV."};

  std::vector<std::size_t> per_cluster_index = {0, 0, 0};
  for (std::size_t r = 0; r < plan.size(); ++r) {
    const auto& recipe = recipes[plan[r].cluster];
    const std::size_t nth =
        plan[r].level3 ? std::size_t(-1) : per_cluster_index[plan[r].cluster]++;

    std::string version = recipe.versions[rng.next_below(2)];
    std::string system = recipe.system;
    std::string narrative = narratives[rng.next_below(3)];
    if (plan[r].level3) {
      version = "Level 3 traffic jam pilot";
    } else if (nth == 0 && plan[r].cluster != 2) {
      // No version string; the narrative carries the level.
      version = "";
      narrative = "The system was engaged, operating at level 2, per the log.";
    } else if (nth == 1 && plan[r].cluster != 2) {
      version = "";  // falls through to the ADAS/ADS system fallback
    } else if (nth == 2 && plan[r].cluster == 0) {
      version = "";
      system = "";  // nothing to go on: tagged Unknown
    }

    const bool rain = rng.next_below(100) < 32;
    std::string weather = rain ? "Rain"
                          : rng.next_below(2) ? "Clear"
                                              : "Cloudy";
    if (!rain && rng.next_below(60) == 0) weather = "N/A";  // sentinel
    const std::string surface = rain ? "Wet" : "Dry";

    const int year = 2021 + static_cast<int>(rng.next_below(2));
    const char* month = months[rng.next_below(3)];
    const int day = std::array<int, 3>{4, 13, 26}[rng.next_below(3)];
    std::string date;
    if (rng.next_below(50) == 0) {
      date = "not-a-date";
    } else if (r % 2 == 0) {
      date = std::to_string(year) + "-" + month + "-" +
             (day < 10 ? "0" : "") + std::to_string(day);
    } else {
      date = std::string(month) + "/" + std::to_string(day) + "/" +
             std::to_string(year);
    }

    std::string time;
    if (rng.next_below(20) != 0) {
      const std::uint64_t minute = rng.next_below(60);
      time = std::to_string(recipe.hours[rng.next_below(2)]) + ":" +
             (minute < 10 ? "0" : "") + std::to_string(minute);
    }

    std::string mileage;
    if (rng.next_below(97) == 0) {
      mileage = "12k";  // unparseable on purpose
    } else if (rng.next_below(18) != 0) {
      mileage = std::to_string(recipe.mileages[rng.next_below(2)]);
    }

    // Index-based so the missing share is exactly 3/5 regardless of seed.
    const std::string media =
        (r % 5 < 3) ? "" : (r % 5 == 3 ? "Photo" : "Video");

    std::string id = "CR-" + std::to_string(10000 + r);
    std::string vin = "5YJ" + std::to_string(700000 + r * 37);

    data.csv.rows.push_back(
        {std::move(id), std::move(vin), recipe.make,
         recipe.models[rng.next_below(2)], std::move(system),
         std::move(version), std::move(narrative), std::move(date),
         std::move(time), recipe.city, recipe.state, recipe.roadway,
         std::to_string(recipe.speeds[rng.next_below(3)]), recipe.lighting,
         std::move(weather), std::move(surface), recipe.contact,
         std::move(mileage), media});

    if (plan[r].level3) {
      ++data.level3_rows;
    } else {
      data.planted.push_back(plan[r].cluster);
    }
  }

  // Duplicate report ids: exact copies appended last, so dedup (first wins)
  // drops the copies and the planted labels stay aligned.
  data.duplicate_rows = 7 * scale;
  for (std::size_t i = 0; i < data.duplicate_rows; ++i) {
    data.csv.rows.push_back(data.csv.rows[rng.next_below(plan.size())]);
  }

  data.rules = {
      {{"Weather=Rain"}, {"Roadway Surface=Wet"}},
      {{"Roadway Surface=Wet"}, {"Weather=Rain"}},
      {{"Month=February", "Weather=Rain"}, {"Roadway Surface=Wet"}},
  };
  return data;
}

}  // namespace crashrules
