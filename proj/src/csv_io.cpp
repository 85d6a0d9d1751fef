#include "fvol/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <ostream>

namespace fvol {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string location(const CsvTable& t, std::size_t row) {
  return t.source + ":" + std::to_string(t.line_numbers[row]);
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  fail(ErrorCode::kSchemaError, source + ": missing column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const std::string& f = rows[row][col];
  double v = 0;
  if (!parse_number(f, v) || !std::isfinite(v))
    fail(ErrorCode::kSchemaError, location(*this, row) + ": column '" + header[col] + "' is not a number: '" + f + "'");
  return v;
}

CsvTable parse_csv(std::istream& in, std::string source) {
  CsvTable t;
  t.source = std::move(source);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    auto fields = split_csv_line(s);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      fail(ErrorCode::kSchemaError, t.source + ":" + std::to_string(lineno) + ": expected " +
                                        std::to_string(t.header.size()) + " fields, found " +
                                        std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) fail(ErrorCode::kSchemaError, t.source + ": no header row");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  return parse_csv(in, path);
}

CurveTable parse_curves_csv(std::istream& in, std::string source) {
  const CsvTable t = parse_csv(in, std::move(source));
  if (t.header.size() < 3 || t.header[0] != "id")
    fail(ErrorCode::kSchemaError, t.source + ": curve file needs columns id,<at least 2 values>");
  const std::size_t p = t.header.size() - 1;

  CurveTable out;
  std::size_t first = 0;
  std::vector<double> pts(p);
  if (!t.rows.empty() && t.rows[0][0] == "grid") {
    for (std::size_t j = 0; j < p; ++j) pts[j] = t.number(0, j + 1);
    first = 1;
  } else {
    for (std::size_t j = 0; j < p; ++j) pts[j] = static_cast<double>(j + 1);
  }
  try {
    out.grid = std::make_shared<const Grid>(std::move(pts));
  } catch (const Error& e) {
    fail(ErrorCode::kSchemaError, t.source + ": invalid grid row: " + e.what());
  }
  for (std::size_t r = first; r < t.rows.size(); ++r) {
    std::vector<double> v(p);
    for (std::size_t j = 0; j < p; ++j) v[j] = t.number(r, j + 1);
    out.ids.push_back(t.rows[r][0]);
    out.curves.emplace_back(out.grid, std::move(v));
  }
  return out;
}

CurveTable read_curves_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  return parse_curves_csv(in, path);
}

void write_curves_csv(std::ostream& os, const std::vector<std::string>& ids, const std::vector<Curve>& curves) {
  if (ids.size() != curves.size()) fail(ErrorCode::kMismatchedLength, "one id per curve expected");
  if (curves.empty()) fail(ErrorCode::kEmptyDataset, "no curves to write");
  const Grid& g = curves.front().grid();
  os << "id";
  for (std::size_t j = 0; j < g.size(); ++j) os << ",l_" << (j + 1);
  os << "\ngrid";
  os << std::setprecision(17);
  for (double x : g.points()) os << ',' << x;
  os << '\n';
  for (std::size_t i = 0; i < curves.size(); ++i) {
    os << ids[i];
    for (double v : curves[i].values()) os << ',' << v;
    os << '\n';
  }
}

ResponseTable parse_responses_csv(std::istream& in, std::string source) {
  const CsvTable t = parse_csv(in, std::move(source));
  const std::size_t id = t.column("id");
  const std::size_t yc = t.column("y");
  const std::size_t dc = t.column("delta");
  ResponseTable out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& d = t.rows[r][dc];
    if (d != "0" && d != "1")
      fail(ErrorCode::kSchemaError, location(t, r) + ": delta must be 0 or 1, found '" + d + "'");
    const bool observed = d == "1";
    const std::string& y = t.rows[r][yc];
    double v = 0;
    if (observed) {
      v = t.number(r, yc);
    } else if (!y.empty() && y != "NA" && y != "nan" && y != "NaN") {
      v = t.number(r, yc);
    }
    out.ids.push_back(t.rows[r][id]);
    out.y.push_back(v);
    out.delta.push_back(observed);
  }
  return out;
}

ResponseTable read_responses_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
  return parse_responses_csv(in, path);
}

void write_responses_csv(std::ostream& os, const std::vector<std::string>& ids, const FdaDataset& data) {
  if (ids.size() != data.size()) fail(ErrorCode::kMismatchedLength, "one id per observation expected");
  os << "id,y,delta\n" << std::setprecision(17);
  for (std::size_t t = 0; t < data.size(); ++t) {
    os << ids[t] << ',';
    if (data[t].delta())
      os << *data[t].y() << ",1\n";
    else
      os << "NA,0\n";
  }
}

FdaDataset make_dataset(const CurveTable& curves, const ResponseTable& responses) {
  if (curves.curves.size() != responses.y.size())
    fail(ErrorCode::kMismatchedLength, std::to_string(curves.curves.size()) + " curves but " +
                                           std::to_string(responses.y.size()) + " responses");
  std::vector<FdaObservation> obs;
  obs.reserve(curves.curves.size());
  for (std::size_t t = 0; t < curves.curves.size(); ++t) {
    if (curves.ids[t] != responses.ids[t])
      fail(ErrorCode::kSchemaError, "row " + std::to_string(t + 1) + ": curve id '" + curves.ids[t] +
                                        "' does not match response id '" + responses.ids[t] + "'");
    obs.push_back(responses.delta[t] ? FdaObservation::observed(curves.curves[t], responses.y[t])
                                     : FdaObservation::missing(curves.curves[t]));
  }
  return FdaDataset(std::move(obs));
}

FdaDataset read_dataset(const std::string& curves_path, const std::string& responses_path) {
  return make_dataset(read_curves_csv(curves_path), read_responses_csv(responses_path));
}

}  // namespace fvol
