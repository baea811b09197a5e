#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crashrules/config.hpp"
#include "crashrules/csv.hpp"
#include "crashrules/pipeline.hpp"
#include "crashrules/report.hpp"
#include "crashrules/version.hpp"

namespace crashrules::cli {

struct Options {
  std::string command;
  std::string config_path;
  std::string input_path;
  std::string out_dir = "runs";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> k;
  std::optional<double> min_support;
  std::optional<double> min_confidence;
  std::optional<double> min_lift;
  std::optional<std::uint32_t> max_len;
  std::optional<std::size_t> top_n;
};

namespace detail {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io", "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

inline PipelineConfig resolve_config(const Options& opt) {
  PipelineConfig cfg = load_config(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.k) cfg.cluster.fixed_k = *opt.k;
  if (opt.min_support) {
    cfg.mining.thresholds.s_min = *opt.min_support;
    // Keep the floor consistent; it may never exceed the support threshold.
    cfg.mining.sparse_floor =
        std::min(cfg.mining.sparse_floor, *opt.min_support);
  }
  if (opt.min_confidence) cfg.mining.thresholds.c_min = *opt.min_confidence;
  if (opt.min_lift) cfg.mining.thresholds.l_min = *opt.min_lift;
  if (opt.max_len) cfg.mining.thresholds.rl_max = *opt.max_len;
  if (opt.top_n) cfg.mining.top_n = *opt.top_n;
  cfg.validate();
  return cfg;
}

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path path(dir);
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) fail("io", "cannot create " + dir + ": " + ec.message());
  return path;
}

inline void write_manifest(const std::filesystem::path& dir,
                           const std::string& command,
                           const PipelineConfig& cfg, const Options& opt,
                           std::uint64_t input_hash,
                           std::vector<std::string> outputs) {
  outputs.push_back("manifest.json");
  auto out = open_out(dir / "manifest.json");
  out << manifest_to_json(command, cfg, opt.input_path, input_hash, outputs)
             .dump(2)
      << '\n';
}

inline int execute(const Options& opt) {
  const PipelineConfig cfg = resolve_config(opt);
  const std::string raw = slurp(opt.input_path);
  const std::uint64_t input_hash = fnv1a64(raw);
  std::istringstream stream(raw);
  const csv::Table input = csv::read(stream);

  if (opt.command == "pipeline") {
    const PipelineResult result = run_pipeline(input, cfg);
    const auto dir = write_run_outputs(ensure_dir(opt.out_dir), result, cfg,
                                       opt.input_path, input_hash);
    const auto& prov = result.table.provenance;
    std::cout << "rows: " << prov.output_rows << " kept of "
              << prov.input_rows << "\n";
    std::cout << "k: " << result.model.k
              << (cfg.cluster.fixed_k ? " (fixed)" : " (elbow)") << "\n";
    for (const auto& mined : result.cluster_rules) {
      std::cout << "cluster " << mined.cluster << ": " << mined.size
                << " rows, " << mined.rules_generated << " rules ("
                << mined.top_rules.size() << " kept)\n";
    }
    std::cout << "wrote: " << dir.string() << "\n";
    return 0;
  }

  const auto dir = ensure_dir(opt.out_dir);
  const FeatureTable table = run_ingest(input, cfg.ingest);
  if (table.rows.empty()) fail("pipeline", "no rows left after cleaning");

  if (opt.command == "prepare") {
    const LabelEncodedMatrix encoded = label_encode(table);
    const TransactionSet transactions = one_hot(table);
    {
      auto out = open_out(dir / "cleaned.csv");
      write_feature_csv(out, table);
    }
    {
      auto out = open_out(dir / "provenance.json");
      out << provenance_to_json(table.provenance).dump(2) << '\n';
    }
    {
      auto out = open_out(dir / "labels.csv");
      write_labels_csv(out, encoded);
    }
    {
      auto out = open_out(dir / "label_dictionaries.json");
      out << dictionaries_to_json(encoded).dump(2) << '\n';
    }
    {
      auto out = open_out(dir / "transactions.csv");
      write_transactions_csv(out, transactions);
    }
    write_manifest(dir, "prepare", cfg, opt, input_hash,
                   {"cleaned.csv", "provenance.json", "labels.csv",
                    "label_dictionaries.json", "transactions.csv"});
    std::cout << "rows: " << table.rows.size() << ", columns: "
              << table.columns.size() << ", items: "
              << transactions.items.size() << "\n";
    std::cout << "wrote: " << dir.string() << "\n";
    return 0;
  }

  if (opt.command == "cluster" || opt.command == "profile") {
    PipelineResult result;
    result.table = table;
    run_cluster_stage(result, cfg);
    if (opt.command == "cluster") {
      {
        auto out = open_out(dir / "elbow.csv");
        write_elbow_csv(out, result.curve);
      }
      {
        auto out = open_out(dir / "model.json");
        out << model_to_json(result.model, result.encoded.columns).dump(2)
            << '\n';
      }
      write_manifest(dir, "cluster", cfg, opt, input_hash,
                     {"elbow.csv", "model.json"});
    } else {
      const auto profiles = profile_clusters(
          result.table, result.model.assignments, result.model.k);
      auto out = open_out(dir / "profiles.json");
      out << profiles_to_json(profiles).dump(2) << '\n';
      write_manifest(dir, "profile", cfg, opt, input_hash, {"profiles.json"});
    }
    std::cout << "k: " << result.model.k
              << (cfg.cluster.fixed_k ? " (fixed)" : " (elbow)")
              << ", wcss: " << format_number(result.model.wcss) << "\n";
    std::cout << "wrote: " << dir.string() << "\n";
    return 0;
  }

  if (opt.command == "mine") {
    // The whole cleaned table as a single transaction set (cluster 0).
    const ClusterRules mined =
        mine_transactions(one_hot(table), 0, cfg.mining);
    {
      auto out = open_out(dir / "rules.csv");
      write_rules_header(out);
      write_rules_rows(out, mined);
    }
    write_manifest(dir, "mine", cfg, opt, input_hash, {"rules.csv"});
    std::cout << "rows: " << mined.size << ", frequent itemsets: "
              << mined.frequent_itemsets << ", rules: "
              << mined.rules_generated << " (" << mined.top_rules.size()
              << " kept)\n";
    std::cout << "wrote: " << dir.string() << "\n";
    return 0;
  }

  if (opt.command == "explore") {
    {
      auto out = open_out(dir / "frequencies.csv");
      write_frequencies_csv(out, column_frequencies(table));
    }
    std::vector<std::string> outputs = {"frequencies.csv"};
    const HourMonthMatrix matrix = hour_by_month(table);
    if (matrix.available) {
      auto out = open_out(dir / "hour_by_month.csv");
      write_hour_month_csv(out, matrix);
      outputs.push_back("hour_by_month.csv");
    } else {
      std::cout << "hour/month matrix: not available (no Hour or Month "
                   "column)\n";
    }
    write_manifest(dir, "explore", cfg, opt, input_hash, std::move(outputs));
    std::cout << "rows: " << table.rows.size() << ", columns: "
              << table.columns.size() << "\n";
    std::cout << "wrote: " << dir.string() << "\n";
    return 0;
  }

  fail("cli", "unknown command: " + opt.command);
}

inline void add_common_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "pipeline config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--input", opt.input_path, "input crash-report CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "override the config seed");
  cmd->add_option("--k", opt.k, "fix the cluster count (skips the elbow)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--min-support", opt.min_support,
                  "minimum rule support, (0, 1]")
      ->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--min-confidence", opt.min_confidence,
                  "minimum rule confidence, (0, 1]")
      ->check(CLI::Range(1e-9, 1.0));
  cmd->add_option("--min-lift", opt.min_lift, "minimum rule lift")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-len", opt.max_len,
                  "maximum rule length (antecedent + consequent)")
      ->check(CLI::Range(2u, 1000000u));
  cmd->add_option("--top-n", opt.top_n, "ranked rules kept per cluster")
      ->check(CLI::PositiveNumber);
}

}  // namespace detail

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline int run(int argc, const char* const* argv) {
  Options opt;
  CLI::App app{"crash-rules: clean crash-report CSVs, cluster them, and mine "
               "per-cluster association rules.\nSet CRASH_RULES_THREADS to "
               "cap worker threads (0 or unset = all cores)."};
  app.require_subcommand(1);

  const std::vector<std::pair<const char*, const char*>> verbs = {
      {"prepare", "clean + encode only; writes the cleaned table, label "
                  "codes, and one-hot transactions"},
      {"cluster", "choose k by the elbow method and fit k-means"},
      {"mine", "mine association rules over the whole cleaned table"},
      {"profile", "cluster, then write per-cluster modal-value profiles"},
      {"explore", "value frequencies and the hour-by-month crash matrix"},
      {"pipeline", "full run: clean, cluster, mine each cluster; writes a "
                   "run directory named by the config hash"},
  };
  for (const auto& [name, description] : verbs) {
    detail::add_common_options(app.add_subcommand(name, description), opt);
  }
  app.set_version_flag("--version", kVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  opt.command = app.get_subcommands().front()->get_name();

  try {
    return detail::execute(opt);
  } catch (const Error& e) {
    std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace crashrules::cli
