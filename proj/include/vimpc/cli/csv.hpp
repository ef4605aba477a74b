#pragma once

// Minimal RFC 4180 writer: comma separated, LF line endings, quoting only when
// a field needs it. Numbers use the shortest representation that round-trips,
// independent of the locale.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vimpc/errors.hpp"

namespace vimpc::cli {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
  public:
    Row& add(std::string_view s) {
      cells_.push_back(quote(s));
      return *this;
    }
    Row& add(const char* s) { return add(std::string_view(s)); }
    Row& add(const std::string& s) { return add(std::string_view(s)); }
    Row& add(double v) {
      cells_.push_back(format_number(v));
      return *this;
    }
    Row& add(const std::optional<double>& v) {
      cells_.push_back(format_number(v));
      return *this;
    }
    Row& add(bool b) {
      cells_.push_back(b ? "true" : "false");
      return *this;
    }
    Row& add(std::size_t n) {
      cells_.push_back(std::to_string(n));
      return *this;
    }

  private:
    friend class CsvTable;
    std::vector<std::string> cells_;
  };

  Row& row() { return rows_.emplace_back(); }

  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

  std::string str() const {
    std::string out;
    append_line(out, header_);
    for (const auto& r : rows_) {
      if (r.cells_.size() != header_.size()) {
        throw Error("CSV row has " + std::to_string(r.cells_.size()) + " cells, header has " +
                    std::to_string(header_.size()));
      }
      append_line(out, r.cells_);
    }
    return out;
  }

  void write(const std::filesystem::path& path) const {
    const std::string text = str();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("failed writing " + path.string());
  }

private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

}  // namespace vimpc::cli
