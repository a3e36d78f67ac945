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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/util.hpp"

namespace tmark {

using Sym = int32_t;
using State = int32_t;
using Cell = int64_t;

enum class TapeRole : uint8_t { Input, Work, Output };
enum class Move : uint8_t { L, R, S };

inline char move_char(Move m) { return m == Move::L ? 'L' : (m == Move::R ? 'R' : 'S'); }

struct TapeDecl {
    TapeRole role;
    int tracks;
};

// Input symbols are fixed to {0,1}. Everything else (blank, the query mark,
// tuple-encoded work symbols) lives in the shared tape alphabet.
struct Alphabet {
    std::vector<std::string> symbols;
    std::map<std::string, Sym> index;
    Sym blank = -1;
    Sym query = -1;  // -1 when "?" is not part of this machine's alphabet
    Sym zero = -1;
    Sym one = -1;

    Sym intern(const std::string& name);
    Sym find(const std::string& name) const;  // -1 if absent
    const std::string& name(Sym s) const { return symbols[static_cast<size_t>(s)]; }
    bool is_input(Sym s) const { return s == zero || s == one; }
};

// Reads/writes are flattened across all tapes in declaration order; a tape
// with t tracks contributes t consecutive entries. Moves are per tape.
struct Transition {
    State from = 0;
    State to = 0;
    std::vector<Sym> read;
    std::vector<Sym> write;
    std::vector<Move> moves;
};

struct Violation {
    std::string where;
    std::string message;
};

struct ProductInfo;  // construction metadata attached by the product builder

struct Machine {
    std::string name;
    Alphabet alphabet;
    std::vector<std::string> states;
    State start = 0;
    std::vector<uint8_t> is_final;
    std::vector<TapeDecl> tapes;
    std::vector<Transition> transitions;

    // Present only on machines emitted by build_product; consumed by the
    // track-layout compiler. Never serialized.
    std::shared_ptr<const ProductInfo> product_info;

    // Derived by finalize().
    int total_tracks = 0;
    std::vector<int> track_offset;

    int state_count() const { return static_cast<int>(states.size()); }
    int tape_count() const { return static_cast<int>(tapes.size()); }
    int input_tape() const;
    int output_tape() const;
    bool final_state(State s) const { return is_final[static_cast<size_t>(s)] != 0; }

    // Sorts transitions by (from-state index, read tuple) and rebuilds the
    // lookup structures. Must be called after any structural change.
    void finalize();

    // Index of the unique transition matching (state, flattened reads), or -1.
    int find_transition(State s, const Sym* reads) const;

    std::vector<Violation> validate() const;
    void validate_or_throw() const;

private:
    std::unordered_map<uint64_t, int32_t> lookup_;
    std::vector<int32_t> overflow_;  // chain storage for colliding buckets

    uint64_t read_key_hash(State s, const Sym* reads) const;
    bool read_key_equal(const Transition& t, State s, const Sym* reads) const;
};

enum class RunStatus : uint8_t { Halted, BudgetExceeded, Stuck };

struct RunOutcome {
    RunStatus status = RunStatus::Stuck;
    uint64_t steps = 0;
    std::string output;  // meaningful when status == Halted
};

// One growable two-way-infinite tape; cells hold one symbol per track.
struct Tape {
    int tracks = 1;
    Sym blank = 0;
    std::vector<Sym> cells;
    Cell origin = 0;  // cell c lives at (c + origin) * tracks
    Cell lo = 0, hi = -1;  // allocated cell range [lo, hi]
    Cell head = 0;
    Cell head_min = 0, head_max = 0;

    void init(int tracks_, Sym blank_, Cell reserve_lo, Cell reserve_hi);
    void ensure(Cell c);
    const Sym* at(Cell c) const;  // may return nullptr for never-allocated (all blank)
    Sym* at_mut(Cell c);
    void note_head() {
        if (head < head_min) head_min = head;
        if (head > head_max) head_max = head;
    }
};

enum class StepStatus : uint8_t { Applied, Final, Stuck };

// Incremental executor; lets callers trace configurations step by step.
class Runner {
public:
    Runner(const Machine& m, const std::string& input);

    StepStatus step_once();
    RunOutcome finish(uint64_t budget);  // runs until halt/stuck/budget

    State state() const { return state_; }
    uint64_t steps() const { return steps_; }
    const Tape& tape(int i) const { return tapes_[static_cast<size_t>(i)]; }
    const Machine& machine() const { return *m_; }
    std::string output() const;

private:
    const Machine* m_;
    State state_;
    uint64_t steps_ = 0;
    std::vector<Tape> tapes_;
    std::vector<Sym> scratch_;
};

// Convenience wrapper: fresh run of m on input with a mandatory step budget.
RunOutcome run(const Machine& m, const std::string& input, uint64_t budget);

// Builds the string for an input index within length-then-lex enumeration.
std::vector<std::string> all_inputs_up_to(int max_len);

// Stable status name: "Halted", "BudgetExceeded" or "Stuck".
const char* run_status_name(RunStatus s);

}  // namespace tmark
