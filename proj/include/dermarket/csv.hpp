// Minimal CSV reading/writing with deterministic number formatting.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dermarket/error.hpp"

namespace dermarket {

/// Formats a double with enough digits to round-trip typical market data
/// while producing byte-identical output across runs.
inline std::string fmt_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

inline std::string fmt_num(long long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", v);
  return std::string(buf);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }

  int require_column(const std::string& name, const std::string& path) const {
    int c = column(name);
    if (c < 0)
      throw Error(Errc::bad_value,
                  "column '" + name + "' missing in " + path);
    return c;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    size_t b = field.find_first_not_of(" \t\r");
    size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (first) {
      t.header = fields;
      first = false;
    } else {
      if (fields.size() != t.header.size())
        throw Error(Errc::bad_value, "ragged row in " + path + ": " + line);
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) throw Error(Errc::bad_value, "empty csv: " + path);
  return t;
}

inline double parse_num(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size())
      throw Error(Errc::bad_value, "trailing junk in number '" + s + "' (" + context + ")");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(Errc::bad_value, "cannot parse number '" + s + "' (" + context + ")");
  }
}

inline long long parse_int(const std::string& s, const std::string& context) {
  try {
    size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size())
      throw Error(Errc::bad_value, "trailing junk in integer '" + s + "' (" + context + ")");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(Errc::bad_value, "cannot parse integer '" + s + "' (" + context + ")");
  }
}

/// Streaming CSV writer; caller supplies already-formatted fields.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw Error(Errc::missing_file, "cannot open for write: " + path);
    write_row_(header);
  }

  void row(const std::vector<std::string>& fields) { write_row_(fields); }

 private:
  void write_row_(const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }
  std::ofstream out_;
};

}  // namespace dermarket
