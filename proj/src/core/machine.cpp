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

#include "core/machine.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

namespace tmark {

Sym Alphabet::intern(const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    Sym s = static_cast<Sym>(symbols.size());
    symbols.push_back(name);
    index.emplace(name, s);
    if (name == "0") zero = s;
    if (name == "1") one = s;
    if (name == "?") query = s;
    return s;
}

Sym Alphabet::find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
}

int Machine::input_tape() const {
    for (int i = 0; i < tape_count(); ++i)
        if (tapes[static_cast<size_t>(i)].role == TapeRole::Input) return i;
    return -1;
}

int Machine::output_tape() const {
    for (int i = 0; i < tape_count(); ++i)
        if (tapes[static_cast<size_t>(i)].role == TapeRole::Output) return i;
    return -1;
}

uint64_t Machine::read_key_hash(State s, const Sym* reads) const {
    uint64_t h = 1469598103934665603ull;
    h ^= static_cast<uint32_t>(s);
    h *= 1099511628211ull;
    for (int i = 0; i < total_tracks; ++i) {
        h ^= static_cast<uint32_t>(reads[i]);
        h *= 1099511628211ull;
    }
    h ^= h >> 32;
    return h;
}

bool Machine::read_key_equal(const Transition& t, State s, const Sym* reads) const {
    if (t.from != s) return false;
    return std::memcmp(t.read.data(), reads,
                       sizeof(Sym) * static_cast<size_t>(total_tracks)) == 0;
}

void Machine::finalize() {
    track_offset.assign(tapes.size() + 1, 0);
    for (size_t i = 0; i < tapes.size(); ++i)
        track_offset[i + 1] = track_offset[i] + tapes[i].tracks;
    total_tracks = track_offset[tapes.size()];

    std::sort(transitions.begin(), transitions.end(),
              [](const Transition& a, const Transition& b) {
                  if (a.from != b.from) return a.from < b.from;
                  return a.read < b.read;
              });

    lookup_.clear();
    lookup_.reserve(transitions.size() * 2);
    overflow_.assign(transitions.size(), -1);
    for (int32_t i = 0; i < static_cast<int32_t>(transitions.size()); ++i) {
        const Transition& t = transitions[static_cast<size_t>(i)];
        uint64_t h = read_key_hash(t.from, t.read.data());
        auto [it, inserted] = lookup_.emplace(h, i);
        if (!inserted) {
            int32_t j = it->second;
            while (overflow_[static_cast<size_t>(j)] != -1) j = overflow_[static_cast<size_t>(j)];
            overflow_[static_cast<size_t>(j)] = i;
        }
    }
}

int Machine::find_transition(State s, const Sym* reads) const {
    auto it = lookup_.find(read_key_hash(s, reads));
    if (it == lookup_.end()) return -1;
    int32_t i = it->second;
    while (i != -1) {
        if (read_key_equal(transitions[static_cast<size_t>(i)], s, reads)) return i;
        i = overflow_[static_cast<size_t>(i)];
    }
    return -1;
}

namespace {

bool valid_token(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c == '#' || c == ',' || c == ':' || std::isspace(static_cast<unsigned char>(c)))
            return false;
    }
    return s != "->" && s != "moves";
}

}  // namespace

std::vector<Violation> Machine::validate() const {
    std::vector<Violation> out;
    auto bad = [&](const std::string& where, const std::string& msg) {
        out.push_back({where, msg});
    };

    if (states.empty()) bad("states", "machine has no states");
    if (is_final.size() != states.size())
        bad("states", "final-state table size does not match state count");
    {
        std::map<std::string, int> seen;
        for (size_t i = 0; i < states.size(); ++i) {
            if (!valid_token(states[i]))
                bad("states", "state name '" + states[i] + "' is not a valid token");
            if (!seen.emplace(states[i], static_cast<int>(i)).second)
                bad("states", "duplicate state name '" + states[i] + "'");
        }
    }
    if (start < 0 || start >= state_count()) bad("start", "start state out of range");

    int n_in = 0, n_out = 0;
    for (size_t i = 0; i < tapes.size(); ++i) {
        const TapeDecl& td = tapes[i];
        if (td.tracks < 1) bad("tapes", "tape " + std::to_string(i + 1) + " has no tracks");
        if (td.role == TapeRole::Input) {
            ++n_in;
            if (i != 0) bad("tapes", "input tape must be the first tape");
            if (td.tracks != 1) bad("tapes", "input tape must have exactly one track");
        } else if (td.role == TapeRole::Output) {
            ++n_out;
            if (i + 1 != tapes.size()) bad("tapes", "output tape must be the last tape");
            if (td.tracks != 1) bad("tapes", "output tape must have exactly one track");
        }
    }
    if (n_in != 1) bad("tapes", "machine must have exactly one input tape");
    if (n_out != 1) bad("tapes", "machine must have exactly one output tape");
    if (tapes.size() < 3) bad("tapes", "machine needs input, at least one work tape, and output");

    {
        std::map<std::string, int> seen;
        for (size_t i = 0; i < alphabet.symbols.size(); ++i) {
            const std::string& s = alphabet.symbols[i];
            if (!valid_token(s)) bad("alphabet", "symbol '" + s + "' is not a valid token");
            if (!seen.emplace(s, static_cast<int>(i)).second)
                bad("alphabet", "duplicate symbol '" + s + "'");
        }
    }
    if (alphabet.zero < 0 || alphabet.one < 0)
        bad("alphabet", "symbols '0' and '1' are required");
    if (alphabet.blank < 0 || alphabet.blank >= static_cast<Sym>(alphabet.symbols.size()))
        bad("alphabet", "blank symbol is not in the alphabet");
    if (alphabet.blank == alphabet.zero || alphabet.blank == alphabet.one)
        bad("alphabet", "blank symbol may not be '0' or '1'");

    // Local offsets so validation does not depend on finalize().
    std::vector<int> off(tapes.size() + 1, 0);
    for (size_t i = 0; i < tapes.size(); ++i) off[i + 1] = off[i] + std::max(1, tapes[i].tracks);
    int tracks = off[tapes.size()];
    int in_tape = input_tape();
    int out_tape = output_tape();
    Sym nsyms = static_cast<Sym>(alphabet.symbols.size());

    for (size_t ti = 0; ti < transitions.size(); ++ti) {
        const Transition& t = transitions[ti];
        std::string where = "transition " + std::to_string(ti + 1);
        if (t.from < 0 || t.from >= state_count() || t.to < 0 || t.to >= state_count()) {
            bad(where, "state index out of range");
            continue;
        }
        if (final_state(t.from))
            bad(where, "transition leaves final state '" + states[static_cast<size_t>(t.from)] +
                           "', which can never fire");
        if (static_cast<int>(t.read.size()) != tracks ||
            static_cast<int>(t.write.size()) != tracks ||
            t.moves.size() != tapes.size()) {
            bad(where, "read/write/move width does not match tape declarations");
            continue;
        }
        bool syms_ok = true;
        for (int k = 0; k < tracks; ++k) {
            if (t.read[static_cast<size_t>(k)] < 0 || t.read[static_cast<size_t>(k)] >= nsyms ||
                t.write[static_cast<size_t>(k)] < 0 || t.write[static_cast<size_t>(k)] >= nsyms) {
                bad(where, "symbol index out of range");
                syms_ok = false;
                break;
            }
        }
        if (!syms_ok) continue;
        if (in_tape >= 0) {
            int k = off[static_cast<size_t>(in_tape)];
            if (t.write[static_cast<size_t>(k)] != t.read[static_cast<size_t>(k)])
                bad(where, "input tape is read-only: write symbol must equal read symbol");
        }
        if (out_tape >= 0) {
            int k = off[static_cast<size_t>(out_tape)];
            if (t.moves[static_cast<size_t>(out_tape)] == Move::L)
                bad(where, "output head may not move left");
            Sym w = t.write[static_cast<size_t>(k)];
            if (w != t.read[static_cast<size_t>(k)] && w != alphabet.zero &&
                w != alphabet.one && w != alphabet.query)
                bad(where, "output writes are limited to '0', '1' and '?'");
        }
    }

    // Determinism: no two transitions may share (state, read tuple).
    {
        std::vector<size_t> idx(transitions.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
            const Transition &x = transitions[a], &y = transitions[b];
            if (x.from != y.from) return x.from < y.from;
            return x.read < y.read;
        });
        for (size_t i = 1; i < idx.size(); ++i) {
            const Transition &x = transitions[idx[i - 1]], &y = transitions[idx[i]];
            if (x.from == y.from && x.read == y.read)
                bad("transitions", "two transitions share state '" +
                                       states[static_cast<size_t>(x.from)] +
                                       "' and the same read tuple");
        }
    }

    return out;
}

void Machine::validate_or_throw() const {
    auto v = validate();
    if (v.empty()) return;
    std::ostringstream os;
    os << "machine '" << name << "' failed validation:";
    size_t show = std::min<size_t>(v.size(), 8);
    for (size_t i = 0; i < show; ++i) os << "\n  [" << v[i].where << "] " << v[i].message;
    if (v.size() > show) os << "\n  ... and " << (v.size() - show) << " more";
    throw ValidationError(os.str());
}

void Tape::init(int tracks_, Sym blank_, Cell reserve_lo, Cell reserve_hi) {
    tracks = tracks_;
    blank = blank_;
    lo = reserve_lo;
    hi = reserve_hi;
    origin = -lo;
    cells.assign(static_cast<size_t>((hi - lo + 1) * tracks), blank);
    head = 0;
    head_min = head_max = 0;
}

void Tape::ensure(Cell c) {
    if (c >= lo && c <= hi) return;
    Cell nlo = lo, nhi = hi;
    if (c < nlo) nlo = c - (hi - lo + 1) / 2 - 8;
    if (c > nhi) nhi = c + (hi - lo + 1) / 2 + 8;
    std::vector<Sym> fresh(static_cast<size_t>((nhi - nlo + 1) * tracks), blank);
    std::copy(cells.begin(), cells.end(),
              fresh.begin() + static_cast<size_t>((lo - nlo) * tracks));
    cells.swap(fresh);
    lo = nlo;
    hi = nhi;
    origin = -lo;
}

const Sym* Tape::at(Cell c) const {
    if (c < lo || c > hi) return nullptr;
    return &cells[static_cast<size_t>((c + origin) * tracks)];
}

Sym* Tape::at_mut(Cell c) {
    ensure(c);
    return &cells[static_cast<size_t>((c + origin) * tracks)];
}

Runner::Runner(const Machine& m, const std::string& input) : m_(&m), state_(m.start) {
    if (m.total_tracks == 0 || m.track_offset.size() != m.tapes.size() + 1)
        throw ArgError("machine must be finalized before running");
    tapes_.resize(m.tapes.size());
    Cell n = static_cast<Cell>(input.size());
    for (size_t i = 0; i < tapes_.size(); ++i) {
        const TapeDecl& td = m.tapes[i];
        bool is_input = td.role == TapeRole::Input;
        Cell res_hi = is_input ? n + 2 : 32;
        tapes_[i].init(td.tracks, m.alphabet.blank, -2, res_hi);
        if (is_input) {
            for (Cell c = 0; c < n; ++c) {
                char ch = input[static_cast<size_t>(c)];
                if (ch != '0' && ch != '1')
                    throw ArgError("input strings may contain only '0' and '1'");
                *tapes_[i].at_mut(c) = ch == '0' ? m.alphabet.zero : m.alphabet.one;
            }
        }
    }
    scratch_.resize(static_cast<size_t>(m.total_tracks));
}

StepStatus Runner::step_once() {
    if (m_->final_state(state_)) return StepStatus::Final;
    for (size_t i = 0; i < tapes_.size(); ++i) {
        Tape& tp = tapes_[i];
        const Sym* cell = tp.at(tp.head);
        Sym* dst = &scratch_[static_cast<size_t>(m_->track_offset[i])];
        if (cell) {
            std::copy(cell, cell + tp.tracks, dst);
        } else {
            std::fill(dst, dst + tp.tracks, tp.blank);
        }
    }
    int ti = m_->find_transition(state_, scratch_.data());
    if (ti < 0) return StepStatus::Stuck;
    const Transition& t = m_->transitions[static_cast<size_t>(ti)];
    for (size_t i = 0; i < tapes_.size(); ++i) {
        Tape& tp = tapes_[i];
        const Sym* w = &t.write[static_cast<size_t>(m_->track_offset[i])];
        const Sym* r = &t.read[static_cast<size_t>(m_->track_offset[i])];
        bool changes = std::memcmp(w, r, sizeof(Sym) * static_cast<size_t>(tp.tracks)) != 0;
        if (changes) {
            Sym* cell = tp.at_mut(tp.head);
            std::copy(w, w + tp.tracks, cell);
        }
        Move mv = t.moves[i];
        if (mv == Move::L) --tp.head;
        else if (mv == Move::R) ++tp.head;
        tp.note_head();
    }
    state_ = t.to;
    ++steps_;
    return StepStatus::Applied;
}

std::string Runner::output() const {
    int oi = m_->output_tape();
    if (oi < 0) return "";
    const Tape& tp = tapes_[static_cast<size_t>(oi)];
    std::string s;
    for (Cell c = 0;; ++c) {
        const Sym* cell = tp.at(c);
        if (!cell || *cell == tp.blank) break;
        s += m_->alphabet.name(*cell);
    }
    return s;
}

RunOutcome Runner::finish(uint64_t budget) {
    for (;;) {
        if (m_->final_state(state_)) return {RunStatus::Halted, steps_, output()};
        if (steps_ >= budget) return {RunStatus::BudgetExceeded, steps_, ""};
        StepStatus st = step_once();
        if (st == StepStatus::Stuck) return {RunStatus::Stuck, steps_, ""};
    }
}

RunOutcome run(const Machine& m, const std::string& input, uint64_t budget) {
    Runner r(m, input);
    return r.finish(budget);
}

std::vector<std::string> all_inputs_up_to(int max_len) {
    if (max_len < 0 || max_len > 24) throw ArgError("input enumeration length out of range");
    std::vector<std::string> out;
    out.reserve((size_t{2} << max_len));
    for (int len = 0; len <= max_len; ++len) {
        std::string s(static_cast<size_t>(len), '0');
        for (uint64_t v = 0; v < (uint64_t{1} << len); ++v) {
            for (int b = 0; b < len; ++b)
                s[static_cast<size_t>(b)] =
                    ((v >> (len - 1 - b)) & 1) ? '1' : '0';
            out.push_back(s);
        }
    }
    return out;
}

const char* run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Halted: return "Halted";
        case RunStatus::BudgetExceeded: return "BudgetExceeded";
        case RunStatus::Stuck: return "Stuck";
    }
    return "Unknown";
}

}  // namespace tmark
