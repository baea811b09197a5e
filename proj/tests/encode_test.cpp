#include "crashrules/encode.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "crashrules/ingest.hpp"

using namespace crashrules;

namespace {

FeatureTable table_of(std::vector<std::string> columns,
                      std::vector<std::vector<std::string>> rows) {
  FeatureTable t;
  t.columns = std::move(columns);
  t.rows = std::move(rows);
  return t;
}

TEST(LabelEncode, DictionariesAreSortedAndCodesMatch) {
  const auto table = table_of({"Make", "Weather"}, {{"Tesla", "Rain"},
                                                    {"Ford", "Clear"},
                                                    {"Tesla", "Clear"},
                                                    {"Jaguar", "Rain"}});
  const LabelEncodedMatrix encoded = label_encode(table);

  ASSERT_EQ(encoded.columns, (std::vector<std::string>{"Make", "Weather"}));
  EXPECT_EQ(encoded.dictionaries[0],
            (std::vector<std::string>{"Ford", "Jaguar", "Tesla"}));
  EXPECT_EQ(encoded.dictionaries[1],
            (std::vector<std::string>{"Clear", "Rain"}));

  EXPECT_EQ(encoded.code(0, 0), 2u);  // Tesla
  EXPECT_EQ(encoded.code(1, 0), 0u);  // Ford
  EXPECT_EQ(encoded.code(3, 0), 1u);  // Jaguar
  EXPECT_EQ(encoded.code(0, 1), 1u);  // Rain
  EXPECT_EQ(encoded.code(1, 1), 0u);  // Clear

  EXPECT_EQ(encoded.decode(0, 0), "Tesla");
  EXPECT_EQ(encoded.decode(3, 1), "Rain");
}

TEST(LabelEncode, ToMatrixCarriesCodesAsDoubles) {
  const auto table = table_of({"A"}, {{"x"}, {"z"}, {"y"}});
  const Matrix m = label_encode(table).to_matrix();
  ASSERT_EQ(m.rows, 3u);
  ASSERT_EQ(m.cols, 1u);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0.0);  // x
  EXPECT_DOUBLE_EQ(m.at(1, 0), 2.0);  // z
  EXPECT_DOUBLE_EQ(m.at(2, 0), 1.0);  // y
}

TEST(LabelEncode, MinMaxScalingMapsToUnitIntervalAndConstantsToZero) {
  const auto table = table_of({"A", "Const"}, {{"a", "same"},
                                               {"b", "same"},
                                               {"c", "same"},
                                               {"e", "same"}});
  const Matrix m = label_encode(table).to_matrix(true);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.at(1, 0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.at(3, 0), 1.0);
  for (std::size_t r = 0; r < 4; ++r) {
    EXPECT_DOUBLE_EQ(m.at(r, 1), 0.0);  // single-value column
  }
}

TEST(OneHot, ItemsFollowColumnThenDictionaryOrder) {
  const auto table = table_of({"Make", "Weather"}, {{"Tesla", "Rain"},
                                                    {"Ford", "Clear"},
                                                    {"Tesla", "Clear"}});
  const TransactionSet txns = one_hot(table);

  EXPECT_EQ(txns.items,
            (std::vector<std::string>{"Make=Ford", "Make=Tesla",
                                      "Weather=Clear", "Weather=Rain"}));
  EXPECT_EQ(txns.item_column,
            (std::vector<std::uint32_t>{0, 0, 1, 1}));
  EXPECT_EQ(txns.n_rows, 3u);

  EXPECT_TRUE(txns.get(1, 0));   // row 0 is a Tesla
  EXPECT_FALSE(txns.get(0, 0));
  EXPECT_TRUE(txns.get(3, 0));   // row 0 in rain
  EXPECT_TRUE(txns.get(0, 1));
  EXPECT_TRUE(txns.get(2, 1));
  EXPECT_TRUE(txns.get(1, 2));
  EXPECT_TRUE(txns.get(2, 2));
}

TEST(OneHot, ExactlyOneItemPerColumnPerRow) {
  const auto table = table_of({"A", "B"}, {{"x", "q"},
                                           {"y", "q"},
                                           {"x", "r"},
                                           {"z", "s"}});
  const TransactionSet txns = one_hot(table);
  for (std::size_t r = 0; r < txns.n_rows; ++r) {
    std::size_t a_items = 0, b_items = 0;
    for (std::size_t i = 0; i < txns.items.size(); ++i) {
      if (!txns.get(i, r)) continue;
      (txns.item_column[i] == 0 ? a_items : b_items) += 1;
    }
    EXPECT_EQ(a_items, 1u);
    EXPECT_EQ(b_items, 1u);
  }
}

TEST(TransactionSet, SubsetKeepsSelectedRows) {
  const auto table = table_of({"A"}, {{"x"}, {"y"}, {"x"}, {"y"}});
  const TransactionSet txns = one_hot(table);
  const TransactionSet sub = txns.subset({0, 2});
  EXPECT_EQ(sub.n_rows, 2u);
  EXPECT_EQ(sub.items, txns.items);
  EXPECT_TRUE(sub.get(0, 0));   // A=x
  EXPECT_TRUE(sub.get(0, 1));
  EXPECT_FALSE(sub.get(1, 0));  // A=y never set
  EXPECT_EQ(sub.bits[0].count(), 2u);
  EXPECT_EQ(sub.bits[1].count(), 0u);
}

TEST(TransactionSet, SelectItemsKeepsOrderAndColumns) {
  const auto table = table_of({"A", "B"}, {{"x", "q"}, {"y", "r"}});
  const TransactionSet txns = one_hot(table);
  const TransactionSet kept = txns.select_items({3, 0});
  EXPECT_EQ(kept.items, (std::vector<std::string>{"B=r", "A=x"}));
  EXPECT_EQ(kept.item_column, (std::vector<std::uint32_t>{1, 0}));
  EXPECT_TRUE(kept.get(0, 1));
  EXPECT_TRUE(kept.get(1, 0));
}

TEST(Writers, LabelsCsvHasOneCodeRowPerRecord) {
  const auto table = table_of({"A"}, {{"x"}, {"y"}});
  std::ostringstream out;
  write_labels_csv(out, label_encode(table));
  EXPECT_EQ(out.str(), "A\n0\n1\n");
}

TEST(Writers, TransactionsCsvIsZeroOne) {
  const auto table = table_of({"A"}, {{"x"}, {"y"}});
  std::ostringstream out;
  write_transactions_csv(out, one_hot(table));
  EXPECT_EQ(out.str(), "A=x,A=y\n1,0\n0,1\n");
}

}  // namespace
