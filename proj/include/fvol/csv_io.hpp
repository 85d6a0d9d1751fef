#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fvol/fda_core.hpp"

namespace fvol {

// Comma-separated table with a header row. Blank lines and lines starting with
// '#' are skipped; fields may be double-quoted.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based line of each row

  // Index of a header column; SchemaError when absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::size_t col) const;
};

CsvTable parse_csv(std::istream& in, std::string source = "<stream>");
CsvTable read_csv(const std::string& path);

std::vector<std::string> split_csv_line(std::string_view line);

// Curve file: `id,<p value columns>`. An optional first data row whose id is
// `grid` carries the abscissae; otherwise the grid is 1..p.
struct CurveTable {
  std::vector<std::string> ids;
  GridPtr grid;
  std::vector<Curve> curves;
};
CurveTable read_curves_csv(const std::string& path);
CurveTable parse_curves_csv(std::istream& in, std::string source = "<stream>");
void write_curves_csv(std::ostream& os, const std::vector<std::string>& ids, const std::vector<Curve>& curves);

// Response file: `id,y,delta`. y may be empty or NA where delta is 0.
struct ResponseTable {
  std::vector<std::string> ids;
  std::vector<double> y;
  std::vector<bool> delta;
};
ResponseTable read_responses_csv(const std::string& path);
ResponseTable parse_responses_csv(std::istream& in, std::string source = "<stream>");
void write_responses_csv(std::ostream& os, const std::vector<std::string>& ids, const FdaDataset& data);

// Joins curves and responses on id (response order must match curve order).
FdaDataset make_dataset(const CurveTable& curves, const ResponseTable& responses);
FdaDataset read_dataset(const std::string& curves_path, const std::string& responses_path);

}  // namespace fvol
