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

#pragma once

#include <string>
#include <vector>

#include "heislab/protocols.hpp"
#include "heislab/rut.hpp"

namespace heislab::report_io {

/** %.17g rendering used for every floating-point field in emitted files. */
std::string fmt(double v);

std::string learning_result_csv(const protocols::LearningResult& result);
std::string learning_result_json(const protocols::LearningResult& result);

std::string deviation_csv(const std::vector<rut::DeviationPoint>& table);
std::string scaling_csv(const std::vector<protocols::ScalingPoint>& points);
std::string spectrum_csv(const protocols::SpectrumResult& result,
                         const std::vector<double>& truth_lambda_x_sq);

std::string homodyne_csv(const std::vector<std::vector<gaussian::HomodyneSample>>& trials);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace heislab::report_io
