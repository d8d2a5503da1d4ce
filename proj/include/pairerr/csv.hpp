// Copyright 2026 The pairerr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pairerr/error.hpp"
#include "pairerr/matrices.hpp"

namespace pairerr {

inline constexpr int kSchemaVersion = 1;

namespace csv {

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out << ',';
    out << quote(fields[k]);
  }
  out << "\r\n";
}

inline void write_schema_comment(std::ostream& out) { out << "# schema_version: " << kSchemaVersion << "\r\n"; }

/// RFC-4180 reader. Lines starting with '#' before the first record are
/// treated as comments.
inline std::vector<std::vector<std::string>> read(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos < content.size() && rows.empty() && content[pos] == '#') {
    const auto nl = content.find('\n', pos);
    pos = nl == std::string::npos ? content.size() : nl + 1;
  }
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  for (; pos < content.size(); ++pos) {
    const char c = content[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < content.size() && content[pos + 1] == '"') {
          field += '"';
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r') {
      // part of CRLF
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kInvalidInput, "unterminated quoted CSV field");
  if (field_started || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::vector<std::string>> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidInput, "cannot open CSV '" + path + "'");
  return read(in);
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidInput, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::kInvalidInput, "not a number: '" + s + "'");
  return v;
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.rfind("-0.", 0) == 0 && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace csv

/// Texts are identified by their index unless the caller supplies names.
inline std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  return ids;
}

namespace detail {
inline void write_skew_csv(std::ostream& out, const SkewMatrix& m, std::vector<std::string> ids, bool integral) {
  if (ids.empty()) ids = default_ids(m.size());
  if (ids.size() != m.size()) throw Error(ErrorCode::kLengthMismatch, "identifier count does not match matrix size");
  csv::write_schema_comment(out);
  csv::write_row(out, ids);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < m.size(); ++j)
      row.push_back(integral ? std::to_string(m.numerator(i, j) / 2) : csv::fixed(m.value(i, j), 6));
    csv::write_row(out, row);
  }
}
}  // namespace detail

/// N x N matrix CSV: one header row of text identifiers, then N rows of
/// entries. Z is written as integers, W with six fractional digits.
inline void write_matrix_csv(std::ostream& out, const ConsensusMatrixZ& z, std::vector<std::string> ids = {}) {
  detail::write_skew_csv(out, z, std::move(ids), true);
}

inline void write_matrix_csv(std::ostream& out, const SkewMatrix& m, std::vector<std::string> ids = {}) {
  detail::write_skew_csv(out, m, std::move(ids), false);
}

inline void write_matrix_csv(std::ostream& out, const StrengthMatrixX& x, std::vector<std::string> ids = {}) {
  if (ids.empty()) ids = default_ids(x.size());
  csv::write_schema_comment(out);
  csv::write_row(out, ids);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < x.size(); ++j) row.push_back(std::to_string(x.wins(i, j)));
    csv::write_row(out, row);
  }
}

struct MatrixTable {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> values;
};

inline MatrixTable read_matrix_table(std::istream& in) {
  auto rows = csv::read(in);
  if (rows.empty()) throw Error(ErrorCode::kInvalidInput, "empty matrix CSV");
  MatrixTable t;
  t.ids = rows.front();
  const std::size_t n = t.ids.size();
  if (rows.size() != n + 1)
    throw Error(ErrorCode::kInvalidInput, "matrix CSV has " + std::to_string(rows.size() - 1) + " rows for " +
                                              std::to_string(n) + " identifiers");
  for (std::size_t i = 1; i <= n; ++i) {
    if (rows[i].size() != n) throw Error(ErrorCode::kInvalidInput, "matrix CSV row " + std::to_string(i) + " is ragged");
    std::vector<double> r;
    for (const auto& f : rows[i]) r.push_back(csv::parse_double(f));
    t.values.push_back(std::move(r));
  }
  return t;
}

namespace detail {
inline int to_numerator(double v, int denom) {
  const double scaled = v * denom;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-4 * denom)
    throw Error(ErrorCode::kInvalidInput, "entry " + csv::fixed(v, 6) + " is not on the 1/" + std::to_string(denom) + " grid");
  return static_cast<int>(rounded);
}
}  // namespace detail

inline ConsensusMatrixZ read_z_csv(std::istream& in, std::vector<std::string>* ids = nullptr) {
  const auto t = read_matrix_table(in);
  ConsensusMatrixZ z(t.ids.size());
  for (std::size_t i = 0; i < t.ids.size(); ++i) {
    for (std::size_t j = 0; j < t.ids.size(); ++j) {
      const int v = detail::to_numerator(t.values[i][j], 1);
      if (i == j) {
        if (v != 0) throw Error(ErrorCode::kInvalidInput, "Z diagonal must be zero");
        continue;
      }
      if (v != -detail::to_numerator(t.values[j][i], 1)) throw Error(ErrorCode::kInvalidInput, "Z is not antisymmetric");
      if (i < j) z.set_entry(i, j, v);
    }
  }
  if (ids) *ids = t.ids;
  return z;
}

inline RepeatedMatrixW read_w_csv(std::istream& in, int k_plus, int k_minus, std::vector<std::string>* ids = nullptr) {
  const auto t = read_matrix_table(in);
  RepeatedMatrixW w(t.ids.size(), k_plus, k_minus);
  for (std::size_t i = 0; i < t.ids.size(); ++i) {
    for (std::size_t j = i + 1; j < t.ids.size(); ++j) {
      const int v = detail::to_numerator(t.values[i][j], k_plus + k_minus);
      if (v != -detail::to_numerator(t.values[j][i], k_plus + k_minus))
        throw Error(ErrorCode::kInvalidInput, "W is not antisymmetric");
      w.set_numerator(i, j, v);
    }
  }
  if (ids) *ids = t.ids;
  return w;
}

inline StrengthMatrixX read_x_csv(std::istream& in, std::vector<std::string>* ids = nullptr) {
  const auto t = read_matrix_table(in);
  StrengthMatrixX x(t.ids.size());
  for (std::size_t i = 0; i < t.ids.size(); ++i)
    for (std::size_t j = 0; j < t.ids.size(); ++j) {
      if (i == j) continue;
      const double v = t.values[i][j];
      if (v < 0 || std::round(v) != v) throw Error(ErrorCode::kInvalidInput, "X entries must be nonnegative integers");
      x.set_wins(i, j, static_cast<long>(v));
    }
  if (ids) *ids = t.ids;
  return x;
}

}  // namespace pairerr
