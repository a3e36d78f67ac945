// Copyright 2026 The tmark Authors
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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace tmark {

// Flat "key = value" config: '#' comments, quoted strings, bare integers,
// floats and booleans, [1, 2, 3] integer lists (stored comma-joined).
struct ExperimentConfig {
    std::map<std::string, std::string> values;

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get_str(const std::string& key, const std::string& def) const;
    std::string require_str(const std::string& key) const;  // ArgError when absent
    int64_t get_int(const std::string& key, int64_t def) const;
    double get_double(const std::string& key, double def) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& def) const;
};

// Every experiment is a pure function of its config (the config carries the
// master seed); reports are byte-identical across reruns and thread counts.
struct ExperimentReport {
    std::string name;
    nlohmann::ordered_json summary;
    bool pass = false;
    std::map<std::string, std::string> files;  // relative file name -> contents
};

std::vector<std::string> experiment_names();
ExperimentReport run_experiment(const std::string& name, const ExperimentConfig& cfg);

// Writes every report file under out_dir (created if needed).
void write_report(const ExperimentReport& rep, const std::string& out_dir);

}  // namespace tmark
