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

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "core/machine.hpp"
#include "core/rng.hpp"

namespace tmark {

// Statically verified shape required of both combination operands: a 3-tape
// machine (input, quiescent k-track work, output) whose reachable part scans
// the input strictly left to right one cell per step, then on the end blank
// writes exactly one output symbol and halts. Equivalent to a total DFA with
// one end-of-input output per state.
struct ScanShape {
    int k = 1;                           // declared work track count
    std::vector<State> order;            // reachable non-final states in BFS order
    int start = 0;                       // index into order
    std::vector<std::array<int, 2>> next;  // per state index: successor on '0'/'1'
    std::vector<char> end_write;         // per state index: '0', '1' or '?'
};

// Throws ValidationError("layout mismatch: ...") when the machine does not
// fit the shape above.
ScanShape analyze_scan_shape(const Machine& m);

// Seeded bijection on the work-tape tuple support. Tuples are identified by
// their canonical joined name ("a,b,c"). The all-blank tuple is deliberately
// not in the support: its image is pinned to itself, because the machine
// header necessarily reveals the blank symbol and permuting it would add no
// search hardness (it would only shrink the candidate space the brute-force
// experiments count).
struct TuplePermutation {
    std::vector<std::string> support;  // canonical (sorted) order
    std::vector<int> map;              // support[i] |-> support[map[i]]

    int index_of(const std::string& tuple) const;  // -1 when off support
};

TuplePermutation sample_permutation(Rng rng, std::vector<std::string> support);
TuplePermutation identity_permutation(std::vector<std::string> support);
TuplePermutation inverse(const TuplePermutation& r);

// Construction metadata carried from build_product to the track compiler.
struct ProductInfo {
    int k = 1;
    State copy_state = -1;
    State rewind_state = -1;
    State select_state = -1;
    State halt_state = -1;
    std::vector<State> pair_state;              // product pair i -> machine state
    std::vector<std::array<int, 2>> pair_next;  // pair i -> pair index on '0'/'1'
    std::vector<std::pair<char, char>> pair_end;  // (host end write, marker end write)
    int start_pair = 0;
};

// Audit record of one combination. Secret test scaffolding: it is never
// embedded in the produced machine.
struct CombinationRecord {
    int k = 0;
    int t = 0;  // work track count of the intermediate layout (2k+8, or 1 in mini mode)
    std::string seed_hex;
    std::string host_preperm_seed;              // label of the host-renaming stream
    uint64_t host_hash = 0, marker_hash = 0;    // structural hashes of the operands
    uint64_t ma_hash = 0, mb_hash = 0, m_hash = 0;
    TuplePermutation permutation;
    // Final observable name of each permuted support tuple's image:
    // opaque_of[i] = name in the shipped machine of R(support[i]).
    std::vector<std::string> opaque_of;
    bool mini = false;
    int mini_phases = 0;
};

// Seeded renaming/reordering of states (work tuples of a quiescent work tape
// have no non-blank support, so the tuple side is the identity). Behavior
// preserved.
Machine prepermute_host(const Machine& m1, Rng rng);

// Pads both machines with seeded unreachable states/transitions until state
// and transition counts match, and widens both work tapes to the same track
// count. Behavior preserved.
std::pair<Machine, Machine> normalize_pair(const Machine& m1, const Machine& m2, Rng rng,
                                           int* k_out = nullptr);

// 7-tape product: tape 1 input, tape 2 a working copy of the input, tapes
// 3/4 the host's work and staged output, tapes 5/6 the marker's, tape 7 the
// real output. Both operands advance in lockstep (the verified scan shape
// makes their input consumption rates identical); at the end blank both
// staged outputs are written, then the selection step copies tape 6 unless
// it holds "?", in which case tape 4. Attaches ProductInfo.
Machine build_product(const Machine& host, const Machine& marker);

// Compiles the 7-tape product onto 3 tapes with one (2k+8)-track work tape:
// tracks 1-2 carry tape 2's contents and head marker, 3..k+3 tape 3,
// k+4..k+5 tape 4, k+6..2k+6 tape 5, 2k+7..2k+8 tape 6. Virtual heads are
// "^" marks on the head tracks; each simulated step is a bounded scan.
Machine to_three_tape(const Machine& m_a);

// Canonical joined-name list of every non-blank work-tape tuple appearing in
// the machine's transitions.
std::vector<std::string> work_support(const Machine& m);

// Re-encodes the work tape as a single track over an extended alphabet: the
// tuple u is stored as the opaque symbol standing for r(u). Tuples in the
// transitions must be covered by r's support (plus the pinned blank).
Machine permute_machine(const Machine& m_b, const TuplePermutation& r);

struct AppearanceOptions {
    int max_pad_states = 15;   // seeded count of extra unreachable states
    int max_spare_symbols = 7;  // seeded count of extra unused work symbols
};

// Seeded re-labeling pass applied to the final machine: random state and
// symbol names, shuffled state/symbol order, plus unreachable padding so no
// fixed byte pattern survives across seeds. Returns old-name -> new-name for
// the alphabet.
std::map<std::string, std::string> finalize_appearance(Machine& m, Rng rng,
                                                       const AppearanceOptions& opts);

struct CombineOutput {
    Machine machine;
    CombinationRecord record;
};

// Full pipeline with the intermediate stages kept for equivalence audits.
struct CombineStages {
    Machine ma;  // 7-tape product
    Machine mb;  // 3-tape compiled layout, pre-permutation
    Machine machine;
    CombinationRecord record;
};

CombineStages combine_stages(const Machine& host, const Machine& marker,
                             const std::string& seed_hex);

// Full pipeline: prepermute host -> normalize -> product -> 3-tape -> tuple
// permutation -> appearance pass. Pure function of (host, marker, seed).
CombineOutput combine(const Machine& host, const Machine& marker,
                      const std::string& seed_hex);

// Reduced layout for brute-force experiments: the work tape keeps one track
// whose cells hold (bit, position mod phases) fused symbols; the permutation
// support has exactly 2*phases tuples. No padding or spare symbols, so the
// support size is inferable from the shipped machine.
CombineOutput mini_combine(const Machine& host, const Machine& marker, int phases,
                           const std::string& seed_hex);

// Name of the fused layout symbol for (bit, phase).
std::string mini_symbol(int bit, int phase);

}  // namespace tmark
