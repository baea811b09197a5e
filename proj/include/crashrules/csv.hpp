#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "crashrules/common.hpp"

namespace crashrules::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

// Reads one record (which may span physical lines inside quotes).
// Returns false on clean EOF before any character of a new record.
inline bool read_record(std::istream& in, std::vector<std::string>& fields,
                        std::size_t& line_no) {
  fields.clear();
  int first = in.peek();
  if (first == EOF) return false;

  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool any = false;
  ++line_no;
  const std::size_t record_line = line_no;

  for (;;) {
    int ci = in.get();
    if (ci == EOF) {
      if (in_quotes) {
        fail("csv", "unterminated quoted field in row starting at line " +
                        std::to_string(record_line));
      }
      if (any || !field.empty()) fields.push_back(std::move(field));
      return !fields.empty();
    }
    char c = static_cast<char>(ci);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          fail("csv", "stray quote in row at line " + std::to_string(line_no));
        }
        in_quotes = true;
        field_was_quoted = true;
        break;
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        any = true;
        break;
      case '\r':
        if (in.peek() == '\n') in.get();
        [[fallthrough]];
      case '\n':
        fields.push_back(std::move(field));
        return true;
      default:
        if (field_was_quoted) {
          fail("csv", "text after closing quote in row at line " +
                          std::to_string(line_no));
        }
        field.push_back(c);
    }
  }
}

}  // namespace detail

/// Parses a full CSV document: header row plus zero or more data rows.
/// Every data row must have exactly as many fields as the header.
inline Table read(std::istream& in) {
  Table table;
  std::size_t line_no = 0;
  if (!detail::read_record(in, table.header, line_no)) {
    fail("csv", "empty input: no header row");
  }
  std::vector<std::string> fields;
  while (detail::read_record(in, fields, line_no)) {
    if (fields.size() != table.header.size()) {
      fail("csv", "row at line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
    fields.clear();
  }
  return table;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("csv", "cannot open file: " + path);
  return read(in);
}

inline void write_field(std::ostream& out, std::string_view field) {
  bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quotes) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_row(std::ostream& out,
                      const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

inline void write(std::ostream& out, const Table& table) {
  write_row(out, table.header);
  for (const auto& row : table.rows) write_row(out, row);
}

inline void write_file(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("csv", "cannot write file: " + path);
  write(out, table);
}

}  // namespace crashrules::csv
