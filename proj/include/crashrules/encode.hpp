#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "crashrules/bitvec.hpp"
#include "crashrules/common.hpp"
#include "crashrules/csv.hpp"
#include "crashrules/ingest.hpp"

namespace crashrules {

/// Dense row-major matrix of doubles, the input shape for k-means.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
};

/// Integer label encoding. Dictionaries are sorted lexicographically so the
/// codes (and therefore k-means distances) do not depend on row order.
struct LabelEncodedMatrix {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> dictionaries;  // per column, sorted
  std::size_t n_rows = 0;
  std::vector<std::uint32_t> codes;  // row-major n_rows x columns

  std::uint32_t code(std::size_t row, std::size_t col) const {
    return codes[row * columns.size() + col];
  }

  const std::string& decode(std::size_t row, std::size_t col) const {
    return dictionaries[col][code(row, col)];
  }

  /// Codes as doubles. With `minmax_scale` each column is mapped onto
  /// [0, 1]; constant columns collapse to 0.
  Matrix to_matrix(bool minmax_scale = false) const {
    Matrix m(n_rows, columns.size());
    for (std::size_t r = 0; r < n_rows; ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        double value = static_cast<double>(code(r, c));
        if (minmax_scale) {
          const double span =
              static_cast<double>(dictionaries[c].size()) - 1.0;
          value = span > 0.0 ? value / span : 0.0;
        }
        m.at(r, c) = value;
      }
    }
    return m;
  }
};

inline LabelEncodedMatrix label_encode(const FeatureTable& table) {
  LabelEncodedMatrix out;
  out.columns = table.columns;
  out.n_rows = table.rows.size();
  out.dictionaries.resize(table.columns.size());

  std::vector<std::map<std::string, std::uint32_t>> index(
      table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    for (const auto& row : table.rows) index[c].emplace(row[c], 0);
    std::uint32_t next = 0;
    for (auto& [value, code] : index[c]) {
      code = next++;
      out.dictionaries[c].push_back(value);
    }
  }
  out.codes.resize(out.n_rows * table.columns.size());
  for (std::size_t r = 0; r < out.n_rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out.codes[r * table.columns.size() + c] = index[c].at(table.rows[r][c]);
    }
  }
  return out;
}

/// One-hot transactions: one boolean item per (column, value) pair, stored
/// as per-item bit columns so itemset supports reduce to popcounts.
struct TransactionSet {
  std::vector<std::string> items;            // "column=value"
  std::vector<std::uint32_t> item_column;    // source column index per item
  std::size_t n_rows = 0;
  std::vector<Bitvec> bits;                  // per item, length n_rows

  bool get(std::size_t item, std::size_t row) const {
    return bits[item].get(row);
  }

  /// Row subset (e.g. one cluster), keeping all item columns.
  TransactionSet subset(const std::vector<std::size_t>& rows) const {
    TransactionSet out;
    out.items = items;
    out.item_column = item_column;
    out.n_rows = rows.size();
    out.bits.reserve(bits.size());
    for (const auto& column : bits) out.bits.push_back(column.gather(rows));
    return out;
  }

  /// Keeps only the selected items (used by the sparse-column filter).
  TransactionSet select_items(const std::vector<std::size_t>& keep) const {
    TransactionSet out;
    out.n_rows = n_rows;
    out.items.reserve(keep.size());
    out.item_column.reserve(keep.size());
    out.bits.reserve(keep.size());
    for (std::size_t idx : keep) {
      out.items.push_back(items[idx]);
      out.item_column.push_back(item_column[idx]);
      out.bits.push_back(bits[idx]);
    }
    return out;
  }
};

inline TransactionSet one_hot(const FeatureTable& table) {
  const LabelEncodedMatrix encoded = label_encode(table);
  TransactionSet out;
  out.n_rows = table.rows.size();

  std::vector<std::size_t> item_base(encoded.columns.size());
  for (std::size_t c = 0; c < encoded.columns.size(); ++c) {
    item_base[c] = out.items.size();
    for (const auto& value : encoded.dictionaries[c]) {
      out.items.push_back(encoded.columns[c] + "=" + value);
      out.item_column.push_back(static_cast<std::uint32_t>(c));
      out.bits.emplace_back(out.n_rows);
    }
  }
  for (std::size_t r = 0; r < out.n_rows; ++r) {
    for (std::size_t c = 0; c < encoded.columns.size(); ++c) {
      out.bits[item_base[c] + encoded.code(r, c)].set(r);
    }
  }
  return out;
}

inline void write_transactions_csv(std::ostream& out,
                                   const TransactionSet& transactions) {
  csv::write_row(out, transactions.items);
  std::vector<std::string> row(transactions.items.size());
  for (std::size_t r = 0; r < transactions.n_rows; ++r) {
    for (std::size_t i = 0; i < transactions.items.size(); ++i) {
      row[i] = transactions.get(i, r) ? "1" : "0";
    }
    csv::write_row(out, row);
  }
}

inline void write_labels_csv(std::ostream& out,
                             const LabelEncodedMatrix& encoded) {
  csv::write_row(out, encoded.columns);
  std::vector<std::string> row(encoded.columns.size());
  for (std::size_t r = 0; r < encoded.n_rows; ++r) {
    for (std::size_t c = 0; c < encoded.columns.size(); ++c) {
      row[c] = std::to_string(encoded.code(r, c));
    }
    csv::write_row(out, row);
  }
}

}  // namespace crashrules
