#pragma once

#include <string>
#include <vector>

#include "crflow/flow.hpp"
#include "crflow/shadow.hpp"

namespace crflow {

// Shortest representation that parses back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);

inline const std::vector<std::string>& flow_csv_columns() {
  static const std::vector<std::string> cols{
      "t",     "lambda", "energy", "dissipation", "volume",  "F2",      "F4",      "min_R_minus_lambda_f", "gamma_proxy",
      "min_u", "max_u",  "alpha_fit", "eps_fit",  "a_fit_x", "a_fit_y", "a_fit_s", "fit_residual",         "zeta"};
  return cols;
}

inline const std::vector<std::string>& shadow_csv_columns() {
  static const std::vector<std::string> cols{"t", "eps", "a_x", "a_y", "a_s", "f_a", "zeta"};
  return cols;
}

std::string csv_row(const std::vector<double>& values);
std::string csv_header(const std::vector<std::string>& cols);

std::string flow_csv(const std::vector<SampleRow>& rows);
std::string shadow_csv(const ShadowTrajectory& traj);

// Splits a CSV produced by the writers above back into a header and numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable parse_csv(const std::string& text);

void write_file(const std::string& path, const std::string& content);

}  // namespace crflow
