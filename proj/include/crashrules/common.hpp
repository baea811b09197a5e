#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crashrules {

/// Error carrying the pipeline stage it originated from. The CLI prints
/// these as "error [stage]: message" and exits 1.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

[[noreturn]] inline void fail(std::string stage, const std::string& message) {
  throw Error(std::move(stage), message);
}

// FNV-1a, used for config hashes and input fingerprints in manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

/// Shortest round-trip formatting; integral doubles print without a
/// decimal point so category labels stay readable ("2021", not "2021.0").
inline std::string format_number(double value) {
  if (std::isfinite(value) && value == std::floor(value) &&
      std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

inline std::optional<double> parse_number(std::string_view text) {
  // strtod accepts leading whitespace; trim both ends so "42 " parses too.
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return std::nullopt;
  std::size_t end = text.find_last_not_of(" \t\r\n");
  std::string owned(text.substr(begin, end - begin + 1));
  char* stop = nullptr;
  double value = std::strtod(owned.c_str(), &stop);
  if (stop != owned.c_str() + owned.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

inline std::string lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  return lower(haystack).find(lower(needle)) != std::string::npos;
}

}  // namespace crashrules
