// Copyright 2026 The heislab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "heislab/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "heislab/errors.hpp"

namespace heislab::report_io {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string learning_result_csv(const protocols::LearningResult& result) {
  std::ostringstream out;
  out << "name,truth,estimate,abs_error\n";
  for (const auto& c : result.coefficients) {
    out << c.name << ',' << (c.truth ? fmt(*c.truth) : "") << ',' << fmt(c.estimate) << ','
        << (c.abs_error ? fmt(*c.abs_error) : "") << '\n';
  }
  return out.str();
}

std::string learning_result_json(const protocols::LearningResult& result) {
  nlohmann::json j;
  j["scheme"] = result.scheme;
  j["total_evolution_time"] = result.total_evolution_time;
  j["total_shots"] = result.total_shots;
  j["coefficients"] = nlohmann::json::array();
  for (const auto& c : result.coefficients) {
    nlohmann::json entry;
    entry["name"] = c.name;
    entry["estimate"] = c.estimate;
    entry["variance"] = c.variance;
    if (c.truth) entry["truth"] = *c.truth;
    if (c.abs_error) entry["abs_error"] = *c.abs_error;
    j["coefficients"].push_back(entry);
  }
  if (!result.warnings.empty()) j["warnings"] = result.warnings;
  return j.dump(2);
}

std::string deviation_csv(const std::vector<rut::DeviationPoint>& table) {
  std::ostringstream out;
  out << "t,tau,R,mean_td,var_td,stderr,trials\n";
  for (const auto& row : table) {
    out << fmt(row.t) << ',' << fmt(row.tau) << ',' << row.r << ',' << fmt(row.mean_td) << ','
        << fmt(row.var_td) << ',' << fmt(row.stderr_td) << ',' << row.trials << '\n';
  }
  return out.str();
}

std::string scaling_csv(const std::vector<protocols::ScalingPoint>& points) {
  std::ostringstream out;
  out << "total_time,rmse,trials,target_epsilon\n";
  for (const auto& p : points) {
    out << fmt(p.total_time) << ',' << fmt(p.rmse) << ',' << p.trials << ','
        << fmt(p.target_epsilon) << '\n';
  }
  return out.str();
}

std::string spectrum_csv(const protocols::SpectrumResult& result,
                         const std::vector<double>& truth_lambda_x_sq) {
  double peak = 0.0;
  for (double v : truth_lambda_x_sq) peak = std::max(peak, v);
  std::ostringstream out;
  out << "mode,omega_tilde,lambda_x_sq_estimate,lambda_x_sq_truth,rel_error,peak_rel_error\n";
  for (std::size_t n = 0; n < result.rows.size(); ++n) {
    const auto& row = result.rows[n];
    const double truth = n < truth_lambda_x_sq.size() ? truth_lambda_x_sq[n] : 0.0;
    const double abs_err = std::abs(row.lambda_x_sq - truth);
    out << row.mode << ',' << fmt(row.omega_tilde) << ',' << fmt(row.lambda_x_sq) << ','
        << fmt(truth) << ',' << fmt(truth > 0.0 ? abs_err / truth : 0.0) << ','
        << fmt(peak > 0.0 ? abs_err / peak : 0.0) << '\n';
  }
  return out.str();
}

std::string homodyne_csv(const std::vector<std::vector<gaussian::HomodyneSample>>& trials) {
  std::ostringstream out;
  out << "trial,mode,quadrature,value\n";
  for (std::size_t trial = 0; trial < trials.size(); ++trial) {
    for (const auto& s : trials[trial]) {
      out << trial << ',' << s.mode << ','
          << (s.quadrature == gaussian::Quadrature::X ? 'X' : 'P') << ',' << fmt(s.value)
          << '\n';
    }
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << contents;
  if (!out) throw Error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace heislab::report_io
