#pragma once

// Minimal CSV tables with a mandatory header row. Numbers are written with 17
// significant digits so they parse back to the same double.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qrobust/errors.hpp"

namespace qrobust::io {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest decimal that round-trips; used where readability matters.
inline std::string format_shortest(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  const std::string tmp(s);
  if (tmp.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  void add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) {
      throw DataError("CSV row has " + std::to_string(row.size()) + " cells, header has " +
                      std::to_string(header_.size()));
    }
    rows_.push_back(std::move(row));
  }

  bool has_column(std::string_view name) const {
    for (const auto& h : header_)
      if (h == name) return true;
    return false;
  }

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
      if (header_[i] == name) return i;
    throw DataError("missing CSV column '" + std::string(name) + "'");
  }

  const std::string& cell(std::size_t row, std::string_view name) const {
    return rows_.at(row)[column(name)];
  }

  double number(std::size_t row, std::string_view name) const {
    double v = 0.0;
    if (!parse_double(cell(row, name), v)) {
      throw DataError("non-numeric value '" + cell(row, name) + "' in column '" +
                      std::string(name) + "', row " + std::to_string(row + 1));
    }
    return v;
  }

  std::vector<double> numbers(std::string_view name) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r) out.push_back(number(r, name));
    return out;
  }

  std::string to_string() const {
    std::string out;
    write_line(out, header_);
    for (const auto& r : rows_) write_line(out, r);
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << to_string();
    if (!f) throw DataError("write failed: " + path);
  }

  static CsvTable parse(const std::string& text, const std::string& source = "<csv>") {
    std::vector<std::vector<std::string>> lines;
    std::vector<std::string> cur;
    std::string cell;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            cell += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cell += c;
        }
        continue;
      }
      if (c == '"') {
        quoted = true;
        any = true;
      } else if (c == ',') {
        cur.push_back(std::move(cell));
        cell.clear();
        any = true;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
        if (any || !cell.empty()) {
          cur.push_back(std::move(cell));
          lines.push_back(std::move(cur));
        }
        cur.clear();
        cell.clear();
        any = false;
      } else {
        cell += c;
        any = true;
      }
    }
    if (quoted) throw DataError(source + ": unterminated quoted field");
    if (any || !cell.empty()) {
      cur.push_back(std::move(cell));
      lines.push_back(std::move(cur));
    }
    if (lines.empty()) throw DataError(source + ": missing header row");
    CsvTable t(std::move(lines.front()));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].size() != t.header_.size()) {
        throw DataError(source + ": line " + std::to_string(i + 1) + " has " +
                        std::to_string(lines[i].size()) + " cells, expected " +
                        std::to_string(t.header_.size()));
      }
      t.rows_.push_back(std::move(lines[i]));
    }
    return t;
  }

  static CsvTable read(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

 private:
  static void write_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      const auto& c = cells[i];
      if (c.find_first_of(",\"\n\r") == std::string::npos) {
        out += c;
      } else {
        out += '"';
        for (char ch : c) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      }
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace qrobust::io
