// Writes a synthetic crash-report CSV plus a matching pipeline config, so the
// CLI can be tried end to end without real data:
//
//   crashrules-synth out_dir [seed] [scale]
//   crash-rules pipeline --config out_dir/config.json --input out_dir/crashes.csv

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "crashrules/config.hpp"
#include "crashrules/csv.hpp"
#include "crashrules/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc == 2 &&
      (std::string(argv[1]) == "--help" || std::string(argv[1]) == "-h")) {
    std::cout << "usage: crashrules-synth out_dir [seed] [scale]\n";
    return 0;
  }
  if (argc < 2 || argc > 4) {
    std::cerr << "usage: crashrules-synth out_dir [seed] [scale]\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;
  const std::size_t scale =
      argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;
  if (scale < 1) {
    std::cerr << "scale must be >= 1\n";
    return 2;
  }

  try {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      std::cerr << "cannot create " << dir << ": " << ec.message() << "\n";
      return 1;
    }
    const auto data = crashrules::make_synthetic(seed, scale);
    crashrules::csv::write_file((dir / "crashes.csv").string(), data.csv);

    const auto cfg = crashrules::synthetic_config(seed);
    std::ofstream out(dir / "config.json", std::ios::binary);
    out << crashrules::config_to_json(cfg).dump(2) << '\n';

    std::cout << "wrote " << (dir / "crashes.csv").string() << " ("
              << data.csv.rows.size() << " rows, " << data.duplicate_rows
              << " duplicates, " << data.level3_rows << " Level-3 rows)\n";
    std::cout << "wrote " << (dir / "config.json").string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
