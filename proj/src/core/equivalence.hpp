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

#include <optional>
#include <string>
#include <vector>

#include "core/machine.hpp"
#include "core/rng.hpp"

namespace tmark {

// Selection rule of the combined machine: the marker's answer wins unless it
// is the query mark "?", in which case the host's answer stands.
inline std::string select_output(const std::string& host_out, const std::string& marker_out) {
    return marker_out == "?" ? host_out : marker_out;
}

struct EquivalenceReport {
    std::optional<std::string> counterexample;  // first input where outcomes differ
    std::string lhs_at_counterexample;
    std::string rhs_at_counterexample;
    std::vector<std::string> incomparable;  // inputs where either run hit the budget
    uint64_t inputs_checked = 0;

    bool equivalent() const { return !counterexample.has_value(); }
};

// Exhaustive comparison over every input of length <= max_len, in
// length-then-lexicographic order. Budget-exceeded inputs are listed as
// incomparable, not counterexamples.
EquivalenceReport equivalent_on(const Machine& a, const Machine& b, int max_len,
                                uint64_t budget);

// Same comparison over an explicit input list.
EquivalenceReport equivalent_on_inputs(const Machine& a, const Machine& b,
                                       const std::vector<std::string>& inputs,
                                       uint64_t budget);

// Seeded random inputs with lengths in [min_len, max_len].
std::vector<std::string> sample_inputs(Rng& rng, int min_len, int max_len, int count);

// Human-readable outcome label used in counterexample reports: the output
// string for halting runs, else the status name.
std::string outcome_label(const RunOutcome& o);

}  // namespace tmark
