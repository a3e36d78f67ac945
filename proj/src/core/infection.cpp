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

#include "core/infection.hpp"

#include <algorithm>
#include <cmath>

namespace tmark {

Machine build_marker(const SignatureKey& key, const MarkerWindow& window, int state_cap) {
    if (window.n_min < 1 || window.n_max < window.n_min)
        throw ArgError("marker window must satisfy 1 <= n_min <= n_max");

    struct Node {
        int child[2] = {-1, -1};
        int response = -1;  // 0/1 when this prefix is a full element
    };
    std::vector<Node> trie(1);
    for (int n = window.n_min; n <= window.n_max; ++n) {
        std::string x = element_at(key, n);
        int u = 0;
        for (char c : x) {
            int b = c - '0';
            if (trie[static_cast<size_t>(u)].child[b] < 0) {
                trie[static_cast<size_t>(u)].child[b] = static_cast<int>(trie.size());
                trie.emplace_back();
            }
            u = trie[static_cast<size_t>(u)].child[b];
        }
        trie[static_cast<size_t>(u)].response = response_bit_at(key, n);
    }

    size_t states_needed = trie.size() + 2;  // nodes + sink + halt
    if (static_cast<int>(states_needed) > state_cap)
        throw ArgError("marker window [" + std::to_string(window.n_min) + "," +
                       std::to_string(window.n_max) + "] needs " +
                       std::to_string(states_needed) + " states, above the cap of " +
                       std::to_string(state_cap));

    Machine m;
    m.name = "marker";
    Sym s0 = m.alphabet.intern("0");
    Sym s1 = m.alphabet.intern("1");
    Sym sb = m.alphabet.intern("_");
    Sym sq = m.alphabet.intern("?");
    m.alphabet.blank = sb;
    m.tapes = {{TapeRole::Input, 1}, {TapeRole::Work, 1}, {TapeRole::Output, 1}};

    for (size_t i = 0; i < trie.size(); ++i) {
        m.states.push_back("n" + std::to_string(i));
        m.is_final.push_back(0);
    }
    State sink = static_cast<State>(m.states.size());
    m.states.push_back("off");
    m.is_final.push_back(0);
    State halt = static_cast<State>(m.states.size());
    m.states.push_back("halt");
    m.is_final.push_back(1);
    m.start = 0;

    auto add = [&](State from, State to, Sym in, Sym out_w, Move m_in, Move m_out) {
        Transition t;
        t.from = from;
        t.to = to;
        t.read = {in, sb, sb};
        t.write = {in, sb, out_w};
        t.moves = {m_in, Move::S, m_out};
        m.transitions.push_back(std::move(t));
    };

    const Sym bits[2] = {s0, s1};
    for (size_t i = 0; i < trie.size(); ++i) {
        State q = static_cast<State>(i);
        for (int b = 0; b < 2; ++b) {
            int c = trie[i].child[b];
            add(q, c < 0 ? sink : static_cast<State>(c), bits[b], sb, Move::R, Move::S);
        }
        Sym answer = trie[i].response < 0 ? sq : bits[trie[i].response];
        add(q, halt, sb, answer, Move::S, Move::R);
    }
    for (int b = 0; b < 2; ++b) add(sink, sink, bits[b], sb, Move::R, Move::S);
    add(sink, halt, sb, sq, Move::S, Move::R);

    m.finalize();
    m.validate_or_throw();
    return m;
}

std::vector<int> probe_lengths(int n0, int K0) {
    std::vector<int> out;
    for (int n = n0 + 1; n <= K0 - 1; ++n) out.push_back(n);
    return out;
}

Verdict band_verdict(const Machine& m, const std::vector<std::string>& probes, double z,
                     uint64_t budget) {
    Verdict v;
    v.z = z;
    for (const std::string& x : probes) {
        ProbeResult p;
        p.n = static_cast<int>(x.size());
        p.input = x;
        RunOutcome out = run(m, x, budget);
        p.status = run_status_name(out.status);
        p.output = out.output;
        if (out.status == RunStatus::BudgetExceeded) {
            ++v.timeouts;
        } else {
            ++v.trials;
            p.hit = out.status == RunStatus::Halted && out.output == "1";
            if (p.hit) ++v.hits;
        }
        v.probes.push_back(std::move(p));
    }

    if (v.trials == 0) {
        v.indeterminate = true;
        return v;
    }
    double t = static_cast<double>(v.trials);
    double half_width = z * std::sqrt(t) / 2.0;
    v.band_lo = std::max(0, static_cast<int>(std::ceil(t / 2.0 - half_width)));
    v.band_hi = std::min(v.trials, static_cast<int>(std::floor(t / 2.0 + half_width)));
    v.infected = v.hits >= v.band_lo && v.hits <= v.band_hi;
    return v;
}

Verdict check_infected(const Machine& m, const SignatureKey& key, const CheckParams& params) {
    if (params.n0 < 1 || params.K0 <= params.n0)
        throw ArgError("checker needs 1 <= n0 < K0");
    std::vector<std::string> probes;
    for (int n : probe_lengths(params.n0, params.K0)) probes.push_back(element_at(key, n));
    Verdict v = band_verdict(m, probes, params.z, params.budget);
    v.n0 = params.n0;
    v.K0 = params.K0;
    return v;
}

InfectResult infect(const Machine& host, const SignatureKey& key, const MarkerWindow& window,
                    const std::string& seed_hex, const CheckParams& params) {
    if (window.n_min > params.n0 + 1 || window.n_max < params.K0 - 1)
        throw ArgError("marker window [" + std::to_string(window.n_min) + "," +
                       std::to_string(window.n_max) + "] does not cover the probe lengths [" +
                       std::to_string(params.n0 + 1) + "," + std::to_string(params.K0 - 1) +
                       "]");

    InfectResult res;
    res.guard = check_infected(host, key, params);
    if (res.guard.indeterminate) {
        res.status = InfectStatus::Indeterminate;
        return res;
    }
    if (res.guard.infected) {
        res.status = InfectStatus::AlreadyInfected;
        return res;
    }
    Machine marker = build_marker(key, window);
    res.output = combine(host, marker, seed_hex);
    res.status = InfectStatus::Infected;
    return res;
}

}  // namespace tmark
