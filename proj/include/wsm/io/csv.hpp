#pragma once

//! CSV output: '#'-prefixed metadata lines, one header row, values in
//! scientific notation with 17 significant digits.

#include "wsm/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <unistd.h>

namespace wsm::io {

using Cell = std::variant<double, long long, std::string>;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string format_cell(const Cell &c) {
  if (const auto *d = std::get_if<double>(&c))
    return format_double(*d);
  if (const auto *i = std::get_if<long long>(&c))
    return std::to_string(*i);
  return std::get<std::string>(c);
}

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void meta(const std::string &key, const std::string &value) {
    meta_.emplace_back(key, value);
  }
  void row(std::vector<Cell> cells) {
    if (cells.size() != columns_.size())
      throw std::logic_error("CSV row has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(columns_.size()));
    rows_.push_back(std::move(cells));
  }
  [[nodiscard]] std::size_t size() const { return rows_.size(); }

  [[nodiscard]] std::string str() const {
    std::string s;
    for (const auto &[k, v] : meta_)
      s += "# " + k + ": " + v + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i)
      s += (i ? "," : "") + columns_[i];
    s += "\n";
    for (const auto &r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i)
        s += (i ? "," : "") + format_cell(r[i]);
      s += "\n";
    }
    return s;
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<Cell>> rows_;
};

/// Writes through a temporary file and rename, so readers never see a
/// partial file.
inline void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw ValidationError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out)
      throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

} // namespace wsm::io
