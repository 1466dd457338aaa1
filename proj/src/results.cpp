#include "dimlab/results.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dimlab {

bool ResultTable::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

void ResultTable::append(const ResultTable& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  series.insert(series.end(), other.series.begin(), other.series.end());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace

std::string to_csv(const ResultTable& table) {
  std::string out = "experiment,param_json,value,reference,pass,seed,ci_low,ci_high\n";
  for (const auto& r : table.rows) {
    out += csv_field(r.experiment) + ',' + csv_field(r.param_json) + ',' + format_double(r.value) + ',' +
           opt(r.reference) + ',' + (r.pass ? "true" : "false") + ',' + std::to_string(r.seed) + ',' + opt(r.ci_low) +
           ',' + opt(r.ci_high) + '\n';
  }
  return out;
}

void emit_csv(const ResultTable& table, const std::string& path) { write_file(path, to_csv(table)); }

std::string to_plotdata(const ResultTable& table) {
  if (table.series.empty()) throw InvalidArgument("plot data needs a scale-series experiment; '" + table.experiment + "' has none");
  std::ostringstream out;
  out << "# experiment " << table.experiment << '\n';
  out << "# version " << kVersionTag << '\n';
  out << "# seed " << table.seed << '\n';
  out << "# params " << table.param_json << '\n';
  for (const auto& s : table.series) {
    out << "# series " << s.label << " base " << s.series.base << '\n';
    out << "# x = n ln(base)  y = ln(count)\n";
    const double lb = std::log(static_cast<double>(s.series.base));
    for (const auto& [n, c] : s.series.entries)
      out << format_double(n * lb) << ' ' << format_double(std::log(static_cast<double>(c))) << '\n';
  }
  return out.str();
}

void emit_plotdata(const ResultTable& table, const std::string& path) { write_file(path, to_plotdata(table)); }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dimlab
