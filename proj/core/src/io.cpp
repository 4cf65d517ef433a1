#include "mdual/io.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mdual/errors.hpp"

namespace mdual {

namespace {

std::vector<std::string> index_labels(std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::to_string(i);
  return out;
}

std::vector<std::string> labels_from(const nlohmann::json& doc, const char* key, std::size_t n) {
  if (!doc.contains(key)) return index_labels(n);
  const auto& arr = doc.at(key);
  if (!arr.is_array() || arr.size() != n) throw ParseError(std::string(key) + " must be an array of " + std::to_string(n) + " strings");
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) throw ParseError(std::string(key) + " entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  return fields;
}

std::string pretty_entry(const Rational& v) {
  return v.get_den() == 1 ? v.get_num().get_str() : format_rational(v);
}

}  // namespace

LabeledMatrix with_index_labels(RationalMatrix m) {
  LabeledMatrix out{std::move(m), {}, {}};
  out.row_labels = index_labels(out.matrix.rows());
  out.col_labels = index_labels(out.matrix.cols());
  return out;
}

LabeledMatrix with_labels(RationalMatrix m, const std::vector<std::string>& labels) {
  if (labels.size() != m.rows() || labels.size() != m.cols()) throw DimensionMismatch("label count differs from matrix size");
  return {std::move(m), labels, labels};
}

std::string to_json(const LabeledMatrix& m, int indent) {
  nlohmann::ordered_json doc;
  doc["rows"] = m.matrix.rows();
  doc["cols"] = m.matrix.cols();
  doc["row_labels"] = m.row_labels;
  doc["col_labels"] = m.col_labels;
  auto entries = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < m.matrix.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < m.matrix.cols(); ++c) row.push_back(format_rational(m.matrix(r, c)));
    entries.push_back(std::move(row));
  }
  doc["entries"] = std::move(entries);
  return doc.dump(indent);
}

LabeledMatrix matrix_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc.at("entries").is_array())
    throw ParseError("matrix JSON needs an \"entries\" array");
  const auto& entries = doc.at("entries");
  const std::size_t rows = entries.size();
  const std::size_t cols = rows ? entries.at(0).size() : 0;
  if (doc.contains("rows") && doc.at("rows") != rows) throw ParseError("\"rows\" disagrees with \"entries\"");
  if (doc.contains("cols") && doc.at("cols") != cols) throw ParseError("\"cols\" disagrees with \"entries\"");

  RationalMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = entries.at(r);
    if (!row.is_array() || row.size() != cols) throw ParseError("row " + std::to_string(r) + " has the wrong length");
    for (std::size_t c = 0; c < cols; ++c) {
      const auto& v = row.at(c);
      if (v.is_string()) {
        m(r, c) = parse_rational(v.get<std::string>());
      } else if (v.is_number_integer()) {
        m(r, c) = parse_rational(v.dump());
      } else if (v.is_number_float()) {
        throw ParseError("floating-point entry " + v.dump() + " at (" + std::to_string(r) + "," + std::to_string(c) +
                         "); write exact values as \"p/q\" strings");
      } else {
        throw ParseError("entry (" + std::to_string(r) + "," + std::to_string(c) + ") is not a rational");
      }
    }
  }
  return {std::move(m), labels_from(doc, "row_labels", rows), labels_from(doc, "col_labels", cols)};
}

std::string to_csv(const LabeledMatrix& m) {
  std::string out;
  for (const auto& l : m.col_labels) out += "," + csv_field(l);
  out += "\n";
  for (std::size_t r = 0; r < m.matrix.rows(); ++r) {
    out += csv_field(m.row_labels[r]);
    for (std::size_t c = 0; c < m.matrix.cols(); ++c) out += "," + format_rational(m.matrix(r, c));
    out += "\n";
  }
  return out;
}

LabeledMatrix matrix_from_csv(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    if (!line.empty() && line != "\r") lines.push_back(split_csv_line(line));
    pos = end + 1;
  }
  if (lines.empty()) throw ParseError("empty CSV");
  LabeledMatrix out;
  out.col_labels.assign(lines[0].begin() + 1, lines[0].end());
  const std::size_t cols = out.col_labels.size();
  out.matrix = RationalMatrix(lines.size() - 1, cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].size() != cols + 1) throw ParseError("CSV row " + std::to_string(r) + " has the wrong length");
    out.row_labels.push_back(lines[r][0]);
    for (std::size_t c = 0; c < cols; ++c) out.matrix(r - 1, c) = parse_rational(lines[r][c + 1]);
  }
  return out;
}

std::string to_pretty(const LabeledMatrix& m) {
  std::vector<std::vector<std::string>> cells(m.matrix.rows() + 1, std::vector<std::string>(m.matrix.cols() + 1));
  for (std::size_t c = 0; c < m.matrix.cols(); ++c) cells[0][c + 1] = m.col_labels[c];
  for (std::size_t r = 0; r < m.matrix.rows(); ++r) {
    cells[r + 1][0] = m.row_labels[r];
    for (std::size_t c = 0; c < m.matrix.cols(); ++c) cells[r + 1][c + 1] = pretty_entry(m.matrix(r, c));
  }
  std::vector<std::size_t> width(m.matrix.cols() + 1, 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      out << std::string(width[c] - row[c].size(), ' ') << row[c];
    }
    out << "\n";
  }
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mdual
