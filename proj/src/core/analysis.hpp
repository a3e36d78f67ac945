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

#include "core/infection.hpp"
#include "core/machine.hpp"
#include "core/signature.hpp"

namespace tmark {

// Byte-level n-gram comparison of serialized machines: a "static signature"
// is an n-gram present in every infected serialization and in no clean one.
struct ScanReport {
    int n = 0;
    size_t infected_count = 0;
    size_t clean_count = 0;
    size_t common_count = 0;         // n-grams shared by every infected sample
    size_t also_in_clean_count = 0;  // of those, how many a clean sample also has
    size_t signature_count = 0;      // common_count - also_in_clean_count
    bool signature_found = false;
    std::vector<std::string> signature_grams_hex;  // survivors, sorted, capped
};

// Exact intersection over the infected set minus the union over the clean
// set. Requires at least two infected samples and n no longer than the
// shortest serialization.
ScanReport static_scan(const std::vector<std::vector<uint8_t>>& infected,
                       const std::vector<std::vector<uint8_t>>& clean, int n,
                       size_t list_cap = 64);

// Brute-force recovery of the tuple encoding of a combined machine.
struct DecompositionResult {
    bool refused = false;
    std::string refusal_reason;
    uint64_t required_candidates = 0;  // |support|! (saturated at uint64 max)
    uint64_t candidates_tried = 0;
    // Each consistent candidate: opaque work symbol -> layout tuple name.
    std::vector<std::map<std::string, std::string>> consistent;
    bool planted_found = false;  // set when the planted mapping was supplied
    // Output table of the reconstructed marker on the test inputs, taken from
    // the first consistent candidate: (input, marker answer). Where the
    // combined machine agrees with the host the minimal marker answer is "?".
    std::vector<std::pair<std::string, std::string>> recovered_m2_behavior;
};

struct DecomposeOptions {
    uint64_t max_candidates = 40320;  // 8!
    int max_test_len = -1;            // -1: phases + 2
    uint64_t budget = 1000000;
    const std::map<std::string, std::string>* planted = nullptr;
};

// Enumerates every bijection between the machine's opaque work symbols and
// the given layout tuple names (the reduced phase-tagged layout), keeping
// those under which every test run's final work tape decodes to the canonical
// encoding of the input copy. Refuses when |support|! exceeds the cap.
DecompositionResult decompose_bruteforce(const Machine& m, const Machine& m1,
                                         const std::vector<std::string>& support,
                                         const DecomposeOptions& opts = {});

// The checker's probe inputs, read off a verdict trace: watching one
// in-the-clear check reveals these set elements verbatim.
std::vector<std::string> leakage_probe(const Verdict& trace);

// Key-less scanner assembled from leaked probe strings: runs the target on
// each string and applies the same central-band statistic as the checker.
struct ProbeScanner {
    std::vector<std::string> probes;
    double z = 3.0;
    uint64_t budget = 1000000;
};

Verdict probe_scan(const Machine& m, const ProbeScanner& scanner);

// The captured-infector detector: asks whether infect would refuse the
// target. AlreadyInfected means "target judged infected"; Indeterminate is
// propagated.
InfectStatus probe_detector(const Machine& target, const SignatureKey& key,
                            const CheckParams& params = {});

}  // namespace tmark
