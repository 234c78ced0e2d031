#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lowrank/core/errors.hpp"

namespace lowrank {

struct CsvRow {
  std::string problem;
  std::string algo;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  int iter = 0;
  double rel_error = 0.0;  ///< NaN marks a singular stop, inf or > threshold a divergence
  std::optional<double> dist;
  double elapsed_s = 0.0;
};

inline constexpr const char* kCsvHeader = "problem,algo,kappa,seed,iter,rel_error,dist,elapsed_s";

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_csv(const std::vector<CsvRow>& rows, std::ostream& out) {
  std::string text;
  text.reserve(64 * (rows.size() + 1));
  text += kCsvHeader;
  text += '\n';
  for (const auto& row : rows) {
    text += row.problem;
    text += ',';
    text += row.algo;
    text += ',';
    text += format_double(row.kappa);
    text += ',';
    text += std::to_string(row.seed);
    text += ',';
    text += std::to_string(row.iter);
    text += ',';
    text += format_double(row.rel_error);
    text += ',';
    if (row.dist) text += format_double(*row.dist);
    text += ',';
    text += format_double(row.elapsed_s);
    text += '\n';
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed to write CSV output");
}

inline void write_csv(const std::vector<CsvRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(rows, out);
  out.close();
  if (!out) throw Error("failed to write '" + path + "'");
}

}  // namespace lowrank
