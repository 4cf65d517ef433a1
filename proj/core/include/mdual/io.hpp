#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mdual/matrix.hpp"

namespace mdual {

/// A matrix with the labels of its row and column states.
struct LabeledMatrix {
  RationalMatrix matrix;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

/// Labels "0".."n-1" on both sides.
LabeledMatrix with_index_labels(RationalMatrix m);
LabeledMatrix with_labels(RationalMatrix m, const std::vector<std::string>& labels);

/// {"rows", "cols", "row_labels", "col_labels", "entries"} with entries as
/// "p/q" strings.
std::string to_json(const LabeledMatrix& m, int indent = 2);
/// Accepts "p/q" strings and JSON integers. Floats and decimal strings are
/// rejected with ParseError; labels default to indices when absent.
LabeledMatrix matrix_from_json(std::string_view text);

/// Header row ",c1,c2,...", then one "label,p/q,..." row per state. Fields
/// containing commas or quotes are quoted.
std::string to_csv(const LabeledMatrix& m);
LabeledMatrix matrix_from_csv(std::string_view text);

/// Aligned plain-text table; integers print without a denominator.
std::string to_pretty(const LabeledMatrix& m);

std::string read_file(const std::string& path);

}  // namespace mdual
