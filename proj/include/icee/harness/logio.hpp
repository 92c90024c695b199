#pragma once

#include <fstream>
#include <map>
#include <string>

#include <json.hpp>

#include "icee/common.hpp"

namespace icee::harness {

// Append-only line-delimited JSON log (training and evaluation records).
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path, bool append = false)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw IoError("cannot open log for writing: " + path);
  }
  void write(const nlohmann::json& j) {
    out_ << j.dump() << "\n";
    if (!out_) throw IoError("failed writing log record");
  }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

inline nlohmann::json config_header_json(const std::map<std::string, std::string>& resolved,
                                         int workers) {
  nlohmann::json j;
  j["type"] = "header";
  j["workers"] = workers;
  j["config"] = resolved;
  return j;
}

// Minimal CSV I/O. The first line is the comma-separated column header.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return int(i);
    throw SchemaError("missing CSV column: " + name);
  }
  double num(size_t row, int c) const { return std::stod(rows[row][c]); }
};

inline void write_csv(const CsvTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open CSV for writing: " + path);
  out.precision(12);
  for (size_t i = 0; i < t.columns.size(); ++i)
    out << t.columns[i] << (i + 1 < t.columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) out << row[i] << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV: " + path);
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        parts.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    parts.push_back(cur);
    return parts;
  };
  if (!std::getline(in, line) || line.empty()) throw SchemaError("empty CSV: " + path);
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.columns.size()) throw SchemaError("ragged CSV row in " + path);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace icee::harness
