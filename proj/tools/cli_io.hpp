#pragma once

// Output plumbing for the gfstop tool: RFC-4180 CSV with a mandatory header
// row, 12-significant-digit floats, "inf"/"-inf" encoding, and a JSON
// sidecar <name>.meta.json holding the fully resolved configuration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace cli {

using nlohmann::json;

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

inline double parse_double(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

// Doubles enter the sidecar as numbers, except infinities which JSON cannot
// carry and which follow the CSV convention.
inline json json_num(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

inline double num_from_json(const json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << quoted(cells[i]);
    }
    out_ << "\r\n";
  }

 private:
  static std::string quoted(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string q = "\"";
    for (char ch : cell) {
      q += ch;
      if (ch == '"') q += '"';
    }
    q += '"';
    return q;
  }

  std::ofstream out_;
};

// One scenario's outputs: <name>.csv and <name>.meta.json under --out.
class Output {
 public:
  Output(std::string out_dir, std::string name, std::string command)
      : dir_(std::move(out_dir)),
        name_(std::move(name)),
        started_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(dir_);
    meta_["command"] = std::move(command);
    meta_["version"] = "0.1.0";
  }

  CsvWriter csv() { return CsvWriter(dir_ / (name_ + ".csv")); }
  std::filesystem::path csv_path() const { return dir_ / (name_ + ".csv"); }

  json& params() { return meta_["params"]; }

  void finish() {
    const auto elapsed = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - started_);
    meta_["wall_time_ms"] = elapsed.count();
    std::ofstream out(dir_ / (name_ + ".meta.json"));
    out << meta_.dump(2) << "\n";
  }

 private:
  std::filesystem::path dir_;
  std::string name_;
  json meta_;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace cli
