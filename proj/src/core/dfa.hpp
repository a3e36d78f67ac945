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

#include <string>
#include <vector>

#include "core/machine.hpp"
#include "core/rng.hpp"

namespace tmark {

// Total deterministic finite automaton over {0,1}; the host-corpus source.
struct Dfa {
    int start = 0;
    std::vector<int> next0;  // next0[q] = δ(q, '0'); -1 marks a partial entry
    std::vector<int> next1;
    std::vector<uint8_t> accept;

    int state_count() const { return static_cast<int>(next0.size()); }
    bool eval(const std::string& x) const;  // direct evaluation; the oracle
};

Dfa random_dfa(Rng& rng, int min_states, int max_states);

// Compiles a DFA into a 3-tape machine (input, 1-track work, output) that
// scans the input left to right and writes "1" iff the DFA accepts, then
// halts. Runs in exactly |x| + 1 steps. Rejects partial automata.
Machine compile_dfa(const Dfa& d, const std::string& name);

// Machine that ignores its input and outputs the given symbol ('0', '1' or
// '?') after scanning to the end. Same scan discipline as compile_dfa.
Machine constant_machine(char out, const std::string& name);

}  // namespace tmark
