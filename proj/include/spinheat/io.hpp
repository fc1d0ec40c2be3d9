#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spinheat/errors.hpp"

namespace spinheat {

inline constexpr const char* kVersion = "0.1.0";

// Full-precision decimal form; 17 significant digits round-trip a double.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw config_error("cannot open " + path.string());
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path,
                       const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace spinheat
