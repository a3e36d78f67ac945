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

#include "core/dfa.hpp"

namespace tmark {

bool Dfa::eval(const std::string& x) const {
    int q = start;
    for (char c : x) {
        q = c == '0' ? next0[static_cast<size_t>(q)] : next1[static_cast<size_t>(q)];
        if (q < 0) throw ArgError("partial automaton has no move on '" + std::string(1, c) + "'");
    }
    return accept[static_cast<size_t>(q)] != 0;
}

Dfa random_dfa(Rng& rng, int min_states, int max_states) {
    if (min_states < 1 || max_states < min_states)
        throw ArgError("invalid automaton size bounds");
    int n = min_states + static_cast<int>(rng.below(
                             static_cast<uint64_t>(max_states - min_states + 1)));
    Dfa d;
    d.start = 0;
    d.next0.resize(static_cast<size_t>(n));
    d.next1.resize(static_cast<size_t>(n));
    d.accept.resize(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) {
        d.next0[static_cast<size_t>(q)] = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
        d.next1[static_cast<size_t>(q)] = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
        d.accept[static_cast<size_t>(q)] = rng.boolean() ? 1 : 0;
    }
    return d;
}

namespace {

// Shared skeleton: per-state scanning machine with a single end-of-input
// output write. 'out' gives the symbol written when the scan ends in state q.
Machine build_scanner(int n, int start, const std::vector<int>& next0,
                      const std::vector<int>& next1, const std::vector<char>& out,
                      const std::string& name) {
    Machine m;
    m.name = name;
    Sym s0 = m.alphabet.intern("0");
    Sym s1 = m.alphabet.intern("1");
    Sym sb = m.alphabet.intern("_");
    m.alphabet.blank = sb;
    bool needs_query = false;
    for (char c : out) needs_query = needs_query || c == '?';
    Sym sq = needs_query ? m.alphabet.intern("?") : -1;

    for (int q = 0; q < n; ++q) m.states.push_back("q" + std::to_string(q));
    m.states.push_back("halt");
    State halt = static_cast<State>(n);
    m.is_final.assign(m.states.size(), 0);
    m.is_final[static_cast<size_t>(halt)] = 1;
    m.start = static_cast<State>(start);

    m.tapes = {{TapeRole::Input, 1}, {TapeRole::Work, 1}, {TapeRole::Output, 1}};

    auto sym_of = [&](char c) -> Sym {
        switch (c) {
            case '0': return s0;
            case '1': return s1;
            case '?': return sq;
            default: throw ArgError("scanner output symbol must be 0, 1 or ?");
        }
    };

    for (int q = 0; q < n; ++q) {
        for (int bit = 0; bit < 2; ++bit) {
            Transition t;
            t.from = static_cast<State>(q);
            t.to = static_cast<State>(bit == 0 ? next0[static_cast<size_t>(q)]
                                               : next1[static_cast<size_t>(q)]);
            Sym r = bit == 0 ? s0 : s1;
            t.read = {r, sb, sb};
            t.write = {r, sb, sb};
            t.moves = {Move::R, Move::S, Move::S};
            m.transitions.push_back(std::move(t));
        }
        Transition e;
        e.from = static_cast<State>(q);
        e.to = halt;
        e.read = {sb, sb, sb};
        e.write = {sb, sb, sym_of(out[static_cast<size_t>(q)])};
        e.moves = {Move::S, Move::S, Move::R};
        m.transitions.push_back(std::move(e));
    }
    m.finalize();
    return m;
}

}  // namespace

Machine compile_dfa(const Dfa& d, const std::string& name) {
    int n = d.state_count();
    if (n < 1) throw ArgError("automaton has no states");
    if (d.start < 0 || d.start >= n) throw ArgError("automaton start state out of range");
    std::vector<char> out(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) {
        if (d.next0[static_cast<size_t>(q)] < 0 || d.next0[static_cast<size_t>(q)] >= n ||
            d.next1[static_cast<size_t>(q)] < 0 || d.next1[static_cast<size_t>(q)] >= n)
            throw ArgError("automaton is partial: state " + std::to_string(q) +
                           " lacks a total move function");
        out[static_cast<size_t>(q)] = d.accept[static_cast<size_t>(q)] ? '1' : '0';
    }
    return build_scanner(n, d.start, d.next0, d.next1, out, name);
}

Machine constant_machine(char c, const std::string& name) {
    return build_scanner(1, 0, {0}, {0}, {c}, name);
}

}  // namespace tmark
