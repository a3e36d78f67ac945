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

#include "core/combiner.hpp"
#include "core/machine.hpp"
#include "core/signature.hpp"

namespace tmark {

// Inclusive range of keyed-element lengths the marker answers for. Lengths
// must exceed the key's n0 (there are no set elements at or below it), and
// the range must reach K0-1 so every checker probe is covered.
struct MarkerWindow {
    int n_min = 7;
    int n_max = 70;
};

// Builds the recognizer for the key's element family over the window: a
// 3-tape scanner that walks the prefix trie of {element_at(key, n)} and, at
// the end of the input, writes the key's response bit on an exact match and
// "?" otherwise. Throws ArgError when the trie would exceed state_cap states.
Machine build_marker(const SignatureKey& key, const MarkerWindow& window,
                     int state_cap = 20000);

// Probe lengths used by the checker: n0+1 .. K0-1 inclusive.
std::vector<int> probe_lengths(int n0, int K0);

struct CheckParams {
    int n0 = 6;
    int K0 = 71;
    uint64_t budget = 1000000;
    double z = 3.0;
};

struct ProbeResult {
    int n = 0;
    std::string input;
    std::string status;  // Halted / BudgetExceeded / Stuck
    std::string output;
    bool hit = false;  // halted with output exactly "1"
};

struct Verdict {
    int n0 = 0, K0 = 0;
    double z = 0.0;
    int trials = 0;    // probes that finished within budget
    int hits = 0;      // trials that answered "1"
    int timeouts = 0;  // probes excluded for exceeding the budget
    int band_lo = 0, band_hi = 0;
    bool infected = false;
    bool indeterminate = false;  // every probe timed out
    std::vector<ProbeResult> probes;
};

// Runs the machine on each probe string, counts "1" answers among the runs
// that finish, and tests whether the count lands inside the central band
// [T/2 - z*sqrt(T)/2, T/2 + z*sqrt(T)/2]. The probe loop and band statistic
// shared by the checker and the key-less probe scanner.
Verdict band_verdict(const Machine& m, const std::vector<std::string>& probes, double z,
                     uint64_t budget);

// Runs the machine on every probe element and tests whether the "1"-answer
// count lands inside the central band [T/2 - z*sqrt(T)/2, T/2 + z*sqrt(T)/2].
// A machine that answers the pseudorandom probes like a fair coin is judged
// infected; a machine computing anything uncorrelated with the key family
// concentrates near all-0 or all-1 on these inputs only by chance.
Verdict check_infected(const Machine& m, const SignatureKey& key,
                       const CheckParams& params = {});

enum class InfectStatus { Infected, AlreadyInfected, Indeterminate };

struct InfectResult {
    InfectStatus status = InfectStatus::Infected;
    Verdict guard;  // the pre-check on the host
    std::optional<CombineOutput> output;
};

// Guarded embedding: refuses when the host already passes the infection
// check (or when the check is indeterminate), otherwise combines the host
// with the key's marker. The window must cover every probe length.
InfectResult infect(const Machine& host, const SignatureKey& key,
                    const MarkerWindow& window, const std::string& seed_hex,
                    const CheckParams& params = {});

}  // namespace tmark
