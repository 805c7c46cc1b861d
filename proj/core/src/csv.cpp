#include "crflow/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "crflow/errors.hpp"

namespace crflow {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

std::string csv_header(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out + '\n';
}

std::string csv_row(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
  return out + '\n';
}

std::string flow_csv(const std::vector<SampleRow>& rows) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::string out = csv_header(flow_csv_columns());
  for (const auto& r : rows) {
    const auto& d = r.diag;
    const auto& f = r.fit;
    out += csv_row({d.t, d.lambda, d.energy, d.dissipation, d.volume, d.F2, d.F4, d.min_R_minus_lambda_f,
                    d.gamma_proxy, d.min_u, d.max_u, f.ok ? f.alpha : nan, f.ok ? f.eps : nan, f.ok ? f.a_x : nan,
                    f.ok ? f.a_y : nan, f.ok ? f.a_s : nan, f.ok ? f.residual : nan, f.ok ? f.zeta : nan});
  }
  return out;
}

std::string shadow_csv(const ShadowTrajectory& traj) {
  std::string out = csv_header(shadow_csv_columns());
  for (const auto& s : traj.samples) out += csv_row({s.t, s.eps, s.a.x, s.a.y, s.a.s, s.f_a, s.zeta});
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = cells;
      first = false;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      if (c == "nan") row.push_back(std::numeric_limits<double>::quiet_NaN());
      else if (c == "inf") row.push_back(INFINITY);
      else if (c == "-inf") row.push_back(-INFINITY);
      else {
        double v = 0.0;
        auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
        if (ec != std::errc() || p != c.data() + c.size()) throw ShapeError("parse_csv: bad number '" + c + "'");
        row.push_back(v);
      }
    }
    if (row.size() != t.header.size()) throw ShapeError("parse_csv: row length differs from header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace crflow
