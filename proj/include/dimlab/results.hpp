#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dimlab/dimension_estimators.hpp"

namespace dimlab {

/// Version tag stamped into every emitted row.
inline constexpr const char* kVersionTag = "dimlab-1.0.0";

struct ResultRow {
  std::string experiment;
  std::string param_json;  ///< compact JSON with sorted keys; always includes "version"
  double value = 0;
  std::optional<double> reference;
  bool pass = false;
  std::uint64_t seed = 0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

/// A scale series attached to a table for plot-data output.
struct SeriesData {
  std::string label;
  ScaleSeries series;
};

struct ResultTable {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string param_json;
  std::vector<ResultRow> rows;
  std::vector<SeriesData> series;

  bool all_pass() const;
  void append(const ResultTable& other);
};

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_double(double v);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);

std::string to_csv(const ResultTable& table);
/// Writes the CSV; throws Error naming the path on I/O failure.
void emit_csv(const ResultTable& table, const std::string& path);

/// `#` header lines followed by one "x y" line per scale, x = n ln(base),
/// y = ln(count). Throws InvalidArgument when the table carries no series.
std::string to_plotdata(const ResultTable& table);
void emit_plotdata(const ResultTable& table, const std::string& path);

/// Splits CSV text into rows of unquoted fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace dimlab
