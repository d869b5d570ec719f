#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdrvm/types.hpp"

namespace sdrvm {

/// One metric value of one method at one sweep point.
struct ResultRow {
  std::string sweep_param;
  std::string method;
  std::string metric;
  double value = 0.0;
  long trials = 0;
  std::uint64_t seed = 0;
};

using ResultTable = std::vector<ResultRow>;

/// Shortest round-trip decimal form, so identical runs produce identical files.
inline std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  double readback = 0.0;
  std::sscanf(buf, "%lf", &readback);
  if (readback == value) {
    for (int digits = 1; digits < 17; ++digits) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", digits, value);
      std::sscanf(shorter, "%lf", &readback);
      if (readback == value) return shorter;
    }
  }
  return buf;
}

inline void write_csv(const ResultTable& table, std::ostream& out) {
  out << "sweep_param,method,metric,value,trials,seed\n";
  for (const auto& row : table)
    out << row.sweep_param << ',' << row.method << ',' << row.metric << ','
        << format_double(row.value) << ',' << row.trials << ',' << row.seed << '\n';
}

inline void write_json(const ResultTable& table, std::ostream& out) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table) {
    rows.push_back({{"sweep_param", row.sweep_param},
                    {"method", row.method},
                    {"metric", row.metric},
                    {"value", row.value},
                    {"trials", row.trials},
                    {"seed", row.seed}});
  }
  out << rows.dump(2) << '\n';
}

inline void write_table(const ResultTable& table, const std::string& path,
                        const std::string& format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  if (format == "json")
    write_json(table, out);
  else
    write_csv(table, out);
}

}  // namespace sdrvm
