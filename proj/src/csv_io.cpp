#include "fdbreak/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "fdbreak/errors.hpp"

namespace fdbreak {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, const char* what, long line) {
  const std::string s = trim(raw);
  if (s.empty()) throw IngestError(std::string("empty ") + what + " field", line);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    throw IngestError(std::string("cannot parse ") + what + " value '" + s + "'", line);
  if (!std::isfinite(v))
    throw IngestError(std::string(what) + " value is not finite", line);
  return v;
}

long long parse_id(const std::string& raw, long line) {
  const std::string s = trim(raw);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IngestError("curve id '" + s + "' is not an integer", line);
  return v;
}

}  // namespace

IngestResult ingest_csv(const std::string& path, IngestOptions options) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'", 0);

  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw IngestError("empty file '" + path + "'", 0);
  ++line_no;
  {
    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);
    if (header.size() < 3 || header[0] != "curve" || header[1] != "x" || header[2] != "y")
      throw IngestError("expected header 'curve,x,y'", line_no);
  }

  std::map<long long, Curve> grouped;
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -std::numeric_limits<double>::infinity();

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 3) throw IngestError("expected 3 fields 'curve,x,y'", line_no);
    const long long id = parse_id(fields[0], line_no);
    const double x = parse_double(fields[1], "x", line_no);
    const double y = parse_double(fields[2], "y", line_no);
    if (!options.rescale_x && (x < 0.0 || x > 1.0))
      throw IngestError("x outside [0,1]; pass the rescale option to map it", line_no);
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    Curve& c = grouped[id];
    c.x.push_back(x);
    c.y.push_back(y);
  }
  if (grouped.empty()) throw IngestError("no data rows in '" + path + "'", line_no);

  IngestResult result{FunctionalDataset{[&] {
                        std::vector<Curve> curves;
                        curves.reserve(grouped.size());
                        for (auto& [id, c] : grouped) curves.push_back(std::move(c));
                        if (options.rescale_x) {
                          const double span = x_max - x_min;
                          for (Curve& c : curves)
                            for (double& x : c.x) x = span > 0.0 ? (x - x_min) / span : 0.5;
                        }
                        return curves;
                      }()},
                      options.rescale_x, x_min, x_max};
  return result;
}

void write_dataset_csv(const FunctionalDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << "curve,x,y\n";
  char buf[64];
  for (int i = 0; i < data.n(); ++i) {
    const Curve& c = data.curve(i);
    for (int j = 0; j < c.size(); ++j) {
      out << (i + 1) << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", c.x[static_cast<std::size_t>(j)]);
      out << buf << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", c.y[static_cast<std::size_t>(j)]);
      out << buf << '\n';
    }
  }
}

}  // namespace fdbreak
