#pragma once

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "crashrules/common.hpp"
#include "crashrules/csv.hpp"

namespace crashrules {

enum class ColumnKind { Categorical, Numeric, Timestamp, Narrative };
enum class ColumnRole { Keep, DropRedundant };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::Categorical;
  ColumnRole role = ColumnRole::Keep;
};

struct TemporalSpec {
  std::string date_column;  // empty = not configured
  std::string time_column;
};

struct KeywordRule {
  std::string level;                  // label written to the output column
  std::vector<std::string> patterns;  // case-insensitive substrings
};

struct AutomationSpec {
  std::string version_column;
  std::string narrative_column;
  std::string system_column;
  std::string output_column = "Automation Level";
  std::vector<KeywordRule> rules;
  // exact (case-insensitive) system value -> level, checked in order
  std::vector<std::pair<std::string, std::string>> system_fallback;

  bool enabled() const {
    return !version_column.empty() || !narrative_column.empty() ||
           !system_column.empty();
  }

  static AutomationSpec defaults() {
    AutomationSpec spec;
    spec.rules = {
        {"2", {"level 2", "l2"}},
        {"3", {"level 3", "l3"}},
        {"4", {"level 4", "l4", "4th", "5th gen"}},
    };
    spec.system_fallback = {{"ADAS", "2"}, {"ADS", "4"}};
    return spec;
  }
};

struct Bin {
  std::string label;
  std::optional<double> upper;  // inclusive upper edge; last bin has none
};

struct BinSpec {
  std::string column;
  std::string output;  // empty = replace in place under the same name
  std::vector<Bin> bins;
};

struct RowExclusion {
  std::string column;
  std::vector<std::string> values;
};

struct IngestSpec {
  std::string id_column = "Report ID";
  std::vector<std::string> missing_sentinels;  // "" is always missing
  double missing_threshold = 0.5;
  std::vector<ColumnSpec> columns;
  TemporalSpec temporal;
  AutomationSpec automation;
  std::vector<BinSpec> bins;
  RowExclusion exclude;
};

// ---------------------------------------------------------------------------
// Working representation between CSV and the finished FeatureTable.

struct Cell {
  enum class State { Missing, Text, Number };
  State state = State::Missing;
  std::string text;
  double number = 0.0;

  bool missing() const { return state == State::Missing; }

  static Cell make_missing() { return Cell{}; }
  static Cell of_text(std::string value) {
    return Cell{State::Text, std::move(value), 0.0};
  }
  static Cell of_number(double value) {
    return Cell{State::Number, {}, value};
  }
};

struct RawRecord {
  std::string report_id;
  std::vector<Cell> cells;  // aligned with RawTable::columns
};

struct RawColumn {
  std::string name;
  ColumnKind kind;
};

struct RawTable {
  std::vector<RawColumn> columns;
  std::vector<RawRecord> records;

  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].name == name) return i;
    }
    return std::nullopt;
  }

  void erase_column(std::size_t index) {
    columns.erase(columns.begin() + static_cast<std::ptrdiff_t>(index));
    for (auto& record : records) {
      record.cells.erase(record.cells.begin() +
                         static_cast<std::ptrdiff_t>(index));
    }
  }
};

struct DroppedColumn {
  std::string name;
  std::string reason;
  double missing_fraction = 0.0;
};

struct Provenance {
  std::size_t input_rows = 0;
  std::size_t duplicates_removed = 0;
  std::vector<DroppedColumn> dropped_columns;
  std::map<std::string, std::size_t> imputed_numeric;
  std::map<std::string, std::size_t> imputed_categorical;
  std::map<std::string, std::size_t> unparsed_cells;
  std::vector<std::string> skipped_bins;  // bin specs whose column was dropped
  std::size_t rows_excluded = 0;
  std::size_t output_rows = 0;
  std::size_t output_columns = 0;
};

/// Cleaned, fully categorical table. No missing cells by construction.
struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  Provenance provenance;

  std::optional<std::size_t> find_column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------

namespace detail {

inline const char* kMonthNames[12] = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

inline bool is_sentinel(const std::string& text, const IngestSpec& spec) {
  if (text.empty()) return true;
  for (const auto& s : spec.missing_sentinels) {
    if (text == s) return true;
  }
  return false;
}

struct DateParts {
  int year, month, day;
};

inline std::optional<DateParts> parse_date(const std::string& text) {
  int y = 0, m = 0, d = 0;
  char extra = 0;
  // ISO 8601 first, then US month/day/year.
  if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) == 3 ||
      std::sscanf(text.c_str(), "%d/%d/%d%c", &m, &d, &y, &extra) == 3) {
    if (m >= 1 && m <= 12 && d >= 1 && d <= 31 && y >= 1000 && y <= 9999) {
      return DateParts{y, m, d};
    }
  }
  return std::nullopt;
}

inline std::optional<int> parse_hour(const std::string& text) {
  int h = 0, mi = 0, s = 0;
  char extra = 0;
  int n = std::sscanf(text.c_str(), "%d:%d:%d%c", &h, &mi, &s, &extra);
  if ((n == 2 || n == 3) && h >= 0 && h <= 23 && mi >= 0 && mi <= 59) {
    return h;
  }
  return std::nullopt;
}

inline void require_fresh_column(const RawTable& table,
                                 const std::string& name) {
  if (table.find_column(name)) {
    fail("ingest", "engineered column '" + name +
                       "' collides with an existing column");
  }
}

}  // namespace detail

inline std::string month_name(int month) {
  return detail::kMonthNames[month - 1];
}

/// Calendar position of a month label, or 0 if it is not a month name.
inline int month_index(const std::string& label) {
  for (int i = 0; i < 12; ++i) {
    if (label == detail::kMonthNames[i]) return i + 1;
  }
  return 0;
}

inline void validate_ingest_spec(const IngestSpec& spec,
                                 const std::vector<std::string>& header) {
  if (spec.missing_threshold <= 0.0 || spec.missing_threshold > 1.0) {
    fail("ingest", "missing_threshold must be in (0, 1]");
  }
  std::unordered_map<std::string, const ColumnSpec*> by_name;
  for (const auto& col : spec.columns) {
    if (!by_name.emplace(col.name, &col).second) {
      fail("ingest", "duplicate column spec: " + col.name);
    }
  }
  std::unordered_set<std::string> seen_header;
  for (const auto& name : header) {
    if (!seen_header.insert(name).second) {
      fail("csv", "duplicated header name: " + name);
    }
    if (!by_name.count(name)) {
      fail("ingest", "unknown column: " + name);
    }
  }
  if (!seen_header.count(spec.id_column)) {
    fail("ingest", "id column '" + spec.id_column + "' not found in header");
  }
  // Timestamp columns must be claimed by the temporal spec; anything else
  // would silently reach the feature table as free text.
  for (const auto& name : header) {
    const ColumnSpec* col = by_name.at(name);
    if (col->kind == ColumnKind::Timestamp && name != spec.temporal.date_column &&
        name != spec.temporal.time_column) {
      fail("ingest", "timestamp column '" + name +
                         "' is not referenced by the temporal spec");
    }
  }
  auto check_ref = [&](const std::string& name, const char* what,
                       std::optional<ColumnKind> kind) {
    if (name.empty()) return;
    if (!seen_header.count(name)) {
      fail("ingest", std::string(what) + " column '" + name +
                         "' not found in header");
    }
    if (kind && by_name.at(name)->kind != *kind) {
      fail("ingest", std::string(what) + " column '" + name +
                         "' has the wrong kind");
    }
  };
  check_ref(spec.temporal.date_column, "date", ColumnKind::Timestamp);
  check_ref(spec.temporal.time_column, "time", ColumnKind::Timestamp);
  check_ref(spec.automation.version_column, "automation version", std::nullopt);
  check_ref(spec.automation.narrative_column, "automation narrative",
            std::nullopt);
  check_ref(spec.automation.system_column, "automation system", std::nullopt);
  for (const auto& bin : spec.bins) {
    check_ref(bin.column, "binning", ColumnKind::Numeric);
    if (bin.bins.empty()) {
      fail("ingest", "bin spec for '" + bin.column + "' has no bins");
    }
    if (bin.bins.back().upper.has_value()) {
      fail("ingest",
           "bin spec for '" + bin.column + "' must end with an unbounded bin");
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < bin.bins.size(); ++i) {
      if (!bin.bins[i].upper.has_value()) {
        fail("ingest", "only the last bin of '" + bin.column +
                           "' may be unbounded");
      }
      if (*bin.bins[i].upper <= prev) {
        fail("ingest", "bin edges for '" + bin.column +
                           "' must be strictly increasing");
      }
      prev = *bin.bins[i].upper;
    }
  }
}

/// CSV -> RawRecords. Sentinel cells become missing; numeric cells that do
/// not parse become missing as well (and are counted in the provenance).
/// The id column is peeled off into RawRecord::report_id.
inline RawTable load_csv(const csv::Table& input, const IngestSpec& spec,
                         Provenance& prov) {
  validate_ingest_spec(spec, input.header);

  std::unordered_map<std::string, const ColumnSpec*> by_name;
  for (const auto& col : spec.columns) by_name.emplace(col.name, &col);

  RawTable table;
  std::size_t id_index = 0;
  for (std::size_t i = 0; i < input.header.size(); ++i) {
    if (input.header[i] == spec.id_column) {
      id_index = i;
      continue;
    }
    table.columns.push_back(
        RawColumn{input.header[i], by_name.at(input.header[i])->kind});
  }
  prov.dropped_columns.push_back({spec.id_column, "identifier", 0.0});

  prov.input_rows = input.rows.size();
  table.records.reserve(input.rows.size());
  for (std::size_t r = 0; r < input.rows.size(); ++r) {
    const auto& row = input.rows[r];
    RawRecord record;
    record.report_id = row[id_index];
    if (detail::is_sentinel(record.report_id, spec)) {
      fail("ingest", "row " + std::to_string(r + 2) +
                         ": missing or empty report id");
    }
    record.cells.reserve(table.columns.size());
    std::size_t out_col = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == id_index) continue;
      const RawColumn& col = table.columns[out_col++];
      if (detail::is_sentinel(row[c], spec)) {
        record.cells.push_back(Cell::make_missing());
      } else if (col.kind == ColumnKind::Numeric) {
        if (auto value = parse_number(row[c])) {
          record.cells.push_back(Cell::of_number(*value));
        } else {
          record.cells.push_back(Cell::make_missing());
          ++prov.unparsed_cells[col.name];
        }
      } else {
        record.cells.push_back(Cell::of_text(row[c]));
      }
    }
    table.records.push_back(std::move(record));
  }
  return table;
}

/// First occurrence of each report id wins.
inline void dedupe(RawTable& table, Provenance& prov) {
  std::unordered_set<std::string> seen;
  std::vector<RawRecord> kept;
  kept.reserve(table.records.size());
  for (auto& record : table.records) {
    if (seen.insert(record.report_id).second) {
      kept.push_back(std::move(record));
    } else {
      ++prov.duplicates_removed;
    }
  }
  table.records = std::move(kept);
}

inline void drop_redundant(RawTable& table, const IngestSpec& spec,
                           Provenance& prov) {
  std::unordered_set<std::string> redundant;
  for (const auto& col : spec.columns) {
    if (col.role == ColumnRole::DropRedundant) redundant.insert(col.name);
  }
  for (std::size_t i = table.columns.size(); i-- > 0;) {
    if (redundant.count(table.columns[i].name)) {
      prov.dropped_columns.push_back({table.columns[i].name, "redundant", 0.0});
      table.erase_column(i);
    }
  }
}

/// Splits the configured date/time columns into Year, Month, Day, Hour and
/// drops the sources. Cells that do not parse flow into the missing-value
/// policy downstream.
inline void extract_temporal(RawTable& table, const IngestSpec& spec,
                             Provenance& prov) {
  const auto& temporal = spec.temporal;
  if (temporal.date_column.empty() && temporal.time_column.empty()) return;

  std::optional<std::size_t> date_idx, time_idx;
  if (!temporal.date_column.empty()) {
    date_idx = table.find_column(temporal.date_column);
  }
  if (!temporal.time_column.empty()) {
    time_idx = table.find_column(temporal.time_column);
  }

  if (date_idx) {
    for (const char* name : {"Year", "Month", "Day"}) {
      detail::require_fresh_column(table, name);
    }
    table.columns.push_back({"Year", ColumnKind::Numeric});
    table.columns.push_back({"Month", ColumnKind::Categorical});
    table.columns.push_back({"Day", ColumnKind::Numeric});
  }
  if (time_idx) {
    detail::require_fresh_column(table, "Hour");
    table.columns.push_back({"Hour", ColumnKind::Numeric});
  }

  for (auto& record : table.records) {
    if (date_idx) {
      const Cell& cell = record.cells[*date_idx];
      std::optional<detail::DateParts> parts;
      if (!cell.missing()) {
        parts = detail::parse_date(cell.text);
        if (!parts) ++prov.unparsed_cells[temporal.date_column];
      }
      if (parts) {
        record.cells.push_back(Cell::of_number(parts->year));
        record.cells.push_back(Cell::of_text(month_name(parts->month)));
        record.cells.push_back(Cell::of_number(parts->day));
      } else {
        record.cells.push_back(Cell::make_missing());
        record.cells.push_back(Cell::make_missing());
        record.cells.push_back(Cell::make_missing());
      }
    }
    if (time_idx) {
      const Cell& cell = record.cells[*time_idx];
      std::optional<int> hour;
      if (!cell.missing()) {
        hour = detail::parse_hour(cell.text);
        if (!hour) ++prov.unparsed_cells[temporal.time_column];
      }
      record.cells.push_back(hour ? Cell::of_number(*hour)
                                  : Cell::make_missing());
    }
  }

  // Erase higher index first so the lower one stays valid.
  std::vector<std::size_t> sources;
  if (date_idx) sources.push_back(*date_idx);
  if (time_idx) sources.push_back(*time_idx);
  std::sort(sources.rbegin(), sources.rend());
  for (std::size_t idx : sources) {
    prov.dropped_columns.push_back(
        {table.columns[idx].name, "temporal-source", 0.0});
    table.erase_column(idx);
  }
}

/// Keyword tagging of the automation level: ordered rules against the
/// version field, then the narrative, then an exact-match fallback on the
/// automation system column. "Unknown" is the sink. All narrative-kind
/// columns are dropped afterwards; free text never becomes a feature.
inline void tag_automation_level(RawTable& table, const IngestSpec& spec,
                                 Provenance& prov) {
  const auto& autom = spec.automation;
  if (autom.enabled()) {
    detail::require_fresh_column(table, autom.output_column);
    std::optional<std::size_t> version_idx, narrative_idx, system_idx;
    if (!autom.version_column.empty()) {
      version_idx = table.find_column(autom.version_column);
    }
    if (!autom.narrative_column.empty()) {
      narrative_idx = table.find_column(autom.narrative_column);
    }
    if (!autom.system_column.empty()) {
      system_idx = table.find_column(autom.system_column);
    }

    auto match_rules =
        [&](const Cell& cell) -> std::optional<std::string> {
      if (cell.missing() || cell.state != Cell::State::Text) {
        return std::nullopt;
      }
      for (const auto& rule : autom.rules) {
        for (const auto& pattern : rule.patterns) {
          if (contains_ci(cell.text, pattern)) return rule.level;
        }
      }
      return std::nullopt;
    };

    table.columns.push_back({autom.output_column, ColumnKind::Categorical});
    for (auto& record : table.records) {
      std::optional<std::string> level;
      if (version_idx) level = match_rules(record.cells[*version_idx]);
      if (!level && narrative_idx) {
        level = match_rules(record.cells[*narrative_idx]);
      }
      if (!level && system_idx) {
        const Cell& cell = record.cells[*system_idx];
        if (!cell.missing() && cell.state == Cell::State::Text) {
          for (const auto& [system, fallback_level] : autom.system_fallback) {
            if (lower(cell.text) == lower(system)) {
              level = fallback_level;
              break;
            }
          }
        }
      }
      record.cells.push_back(Cell::of_text(level ? *level : "Unknown"));
    }
  }

  for (std::size_t i = table.columns.size(); i-- > 0;) {
    if (table.columns[i].kind == ColumnKind::Narrative) {
      prov.dropped_columns.push_back({table.columns[i].name, "narrative", 0.0});
      table.erase_column(i);
    }
  }
}

/// Columns whose missing fraction exceeds the threshold are dropped; the
/// survivors are imputed: numeric -> column mode (ties -> smallest value),
/// categorical -> the literal "Unknown".
inline void apply_missing_policy(RawTable& table, const IngestSpec& spec,
                                 Provenance& prov) {
  const std::size_t n = table.records.size();
  for (std::size_t i = table.columns.size(); i-- > 0;) {
    std::size_t missing = 0;
    for (const auto& record : table.records) {
      if (record.cells[i].missing()) ++missing;
    }
    const double fraction =
        n == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(n);
    if (fraction > spec.missing_threshold) {
      prov.dropped_columns.push_back(
          {table.columns[i].name, "missing", fraction});
      table.erase_column(i);
      continue;
    }
    if (missing == 0) continue;

    if (table.columns[i].kind == ColumnKind::Numeric) {
      std::map<double, std::size_t> counts;
      for (const auto& record : table.records) {
        if (!record.cells[i].missing()) ++counts[record.cells[i].number];
      }
      if (counts.empty()) {
        // Only reachable with threshold == 1: nothing to impute from.
        prov.dropped_columns.push_back(
            {table.columns[i].name, "all-missing", fraction});
        table.erase_column(i);
        continue;
      }
      double mode = counts.begin()->first;
      std::size_t best = counts.begin()->second;
      for (const auto& [value, count] : counts) {
        if (count > best) {  // ties keep the smallest value
          best = count;
          mode = value;
        }
      }
      for (auto& record : table.records) {
        if (record.cells[i].missing()) {
          record.cells[i] = Cell::of_number(mode);
          ++prov.imputed_numeric[table.columns[i].name];
        }
      }
    } else {
      for (auto& record : table.records) {
        if (record.cells[i].missing()) {
          record.cells[i] = Cell::of_text("Unknown");
          ++prov.imputed_categorical[table.columns[i].name];
        }
      }
    }
  }
}

/// Label for `value` under `bins`: the first bin whose inclusive upper edge
/// admits it, the unbounded last bin otherwise.
inline const std::string& bin_label(const std::vector<Bin>& bins,
                                    double value) {
  for (const auto& bin : bins) {
    if (!bin.upper.has_value() || value <= *bin.upper) return bin.label;
  }
  return bins.back().label;
}

inline void bin_numeric(RawTable& table, const IngestSpec& spec,
                        Provenance& prov) {
  for (const auto& bin_spec : spec.bins) {
    auto idx = table.find_column(bin_spec.column);
    if (!idx) {
      // Column was dropped by an earlier step (e.g. missing policy).
      prov.skipped_bins.push_back(bin_spec.column);
      continue;
    }
    const std::string output =
        bin_spec.output.empty() ? bin_spec.column : bin_spec.output;
    if (output != bin_spec.column) detail::require_fresh_column(table, output);
    for (auto& record : table.records) {
      Cell& cell = record.cells[*idx];
      if (cell.missing()) continue;  // policy runs first; kept for safety
      cell = Cell::of_text(bin_label(bin_spec.bins, cell.number));
    }
    table.columns[*idx] = {output, ColumnKind::Categorical};
  }
}

inline void exclude_rows(RawTable& table, const IngestSpec& spec,
                         Provenance& prov) {
  if (spec.exclude.column.empty() || spec.exclude.values.empty()) return;
  auto idx = table.find_column(spec.exclude.column);
  if (!idx) {
    fail("ingest",
         "exclusion column '" + spec.exclude.column + "' not found");
  }
  std::vector<RawRecord> kept;
  kept.reserve(table.records.size());
  for (auto& record : table.records) {
    const Cell& cell = record.cells[*idx];
    bool excluded = false;
    if (!cell.missing() && cell.state == Cell::State::Text) {
      excluded = std::find(spec.exclude.values.begin(),
                           spec.exclude.values.end(),
                           cell.text) != spec.exclude.values.end();
    }
    if (excluded) {
      ++prov.rows_excluded;
    } else {
      kept.push_back(std::move(record));
    }
  }
  table.records = std::move(kept);
}

inline FeatureTable to_feature_table(RawTable&& table, Provenance&& prov) {
  FeatureTable out;
  out.columns.reserve(table.columns.size());
  for (const auto& col : table.columns) out.columns.push_back(col.name);
  out.rows.reserve(table.records.size());
  for (const auto& record : table.records) {
    std::vector<std::string> row;
    row.reserve(record.cells.size());
    for (const auto& cell : record.cells) {
      switch (cell.state) {
        case Cell::State::Text:
          row.push_back(cell.text);
          break;
        case Cell::State::Number:
          row.push_back(format_number(cell.number));
          break;
        case Cell::State::Missing:
          fail("ingest", "internal: missing cell survived the missing policy");
      }
    }
    out.rows.push_back(std::move(row));
  }
  prov.output_rows = out.rows.size();
  prov.output_columns = out.columns.size();
  out.provenance = std::move(prov);
  return out;
}

/// Full cleaning pass: dedup, redundant-column drop, temporal split,
/// automation tagging, missing policy, binning, row exclusion.
inline FeatureTable run_ingest(const csv::Table& input,
                               const IngestSpec& spec) {
  Provenance prov;
  RawTable table = load_csv(input, spec, prov);
  dedupe(table, prov);
  drop_redundant(table, spec, prov);
  extract_temporal(table, spec, prov);
  tag_automation_level(table, spec, prov);
  apply_missing_policy(table, spec, prov);
  bin_numeric(table, spec, prov);
  exclude_rows(table, spec, prov);
  return to_feature_table(std::move(table), std::move(prov));
}

inline FeatureTable run_ingest_file(const std::string& path,
                                    const IngestSpec& spec) {
  return run_ingest(csv::read_file(path), spec);
}

}  // namespace crashrules
