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

#include "core/combiner.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "core/equivalence.hpp"
#include "core/machine_io.hpp"

namespace tmark {

namespace {

void require_three_tape(const Machine& m, const char* who) {
    if (m.tapes.size() != 3 || m.tapes[0].role != TapeRole::Input ||
        m.tapes[1].role != TapeRole::Work || m.tapes[2].role != TapeRole::Output)
        throw ValidationError(std::string("layout mismatch: ") + who +
                              " requires the 3-tape shape (input, work, output)");
}

std::string join_column(const Machine& m, const Sym* syms, int tracks) {
    std::string s;
    for (int i = 0; i < tracks; ++i) {
        if (i) s += ',';
        s += m.alphabet.name(syms[i]);
    }
    return s;
}

std::string fresh_name(Rng& rng, const char* prefix, std::set<std::string>& used) {
    static const char* digits = "0123456789abcdef";
    for (;;) {
        uint64_t v = rng.next();
        std::string name = prefix;
        for (int i = 0; i < 6; ++i) {
            name += digits[v & 15];
            v >>= 4;
        }
        if (used.insert(name).second) return name;
    }
}

}  // namespace

ScanShape analyze_scan_shape(const Machine& m) {
    require_three_tape(m, "the combiner");
    auto fail = [&](const std::string& msg) -> void {
        throw ValidationError("layout mismatch: machine '" + m.name + "': " + msg);
    };
    if (m.track_offset.size() != m.tapes.size() + 1) fail("machine is not finalized");
    {
        auto v = m.validate();
        if (!v.empty()) fail("machine fails validation: " + v.front().message);
    }

    ScanShape shape;
    shape.k = m.tapes[1].tracks;
    const Sym s0 = m.alphabet.zero, s1 = m.alphabet.one, sb = m.alphabet.blank;
    const int T = m.total_tracks;

    std::map<State, int> pos;
    std::deque<State> queue;
    auto visit = [&](State q) -> int {
        auto it = pos.find(q);
        if (it != pos.end()) return it->second;
        int idx = static_cast<int>(shape.order.size());
        pos.emplace(q, idx);
        shape.order.push_back(q);
        shape.next.push_back({-1, -1});
        shape.end_write.push_back('?');
        queue.push_back(q);
        return idx;
    };

    if (m.final_state(m.start)) fail("start state is final; machine never reads its input");
    shape.start = visit(m.start);

    std::vector<Sym> reads(static_cast<size_t>(T), sb);
    while (!queue.empty()) {
        State q = queue.front();
        queue.pop_front();
        int qi = pos.at(q);
        const std::string& qn = m.states[static_cast<size_t>(q)];

        for (int bit = 0; bit < 2; ++bit) {
            std::fill(reads.begin(), reads.end(), sb);
            reads[0] = bit ? s1 : s0;
            int ti = m.find_transition(q, reads.data());
            if (ti < 0)
                fail("state '" + qn + "' has no move on input '" + std::to_string(bit) + "'");
            const Transition& t = m.transitions[static_cast<size_t>(ti)];
            if (t.moves[0] != Move::R)
                fail("state '" + qn + "' does not advance the input head on a symbol read");
            if (t.moves[1] != Move::S || t.moves[2] != Move::S)
                fail("state '" + qn + "' moves a non-input head during the scan");
            if (t.write != t.read)
                fail("state '" + qn + "' writes during the scan");
            if (m.final_state(t.to))
                fail("state '" + qn + "' halts before consuming the whole input");
            shape.next[static_cast<size_t>(qi)][static_cast<size_t>(bit)] = visit(t.to);
        }

        std::fill(reads.begin(), reads.end(), sb);
        int te = m.find_transition(q, reads.data());
        if (te < 0) fail("state '" + qn + "' has no move at the end of the input");
        const Transition& t = m.transitions[static_cast<size_t>(te)];
        if (t.moves[0] != Move::S || t.moves[1] != Move::S || t.moves[2] != Move::R)
            fail("state '" + qn + "' has a non-standard end-of-input step");
        if (!m.final_state(t.to))
            fail("state '" + qn + "' does not halt after its end-of-input write");
        for (int i = 0; i < T - 1; ++i)
            if (t.write[static_cast<size_t>(i)] != t.read[static_cast<size_t>(i)])
                fail("state '" + qn + "' writes outside the output tape at the end");
        Sym w = t.write[static_cast<size_t>(T - 1)];
        char c = '?';
        if (w == s0) c = '0';
        else if (w == s1) c = '1';
        else if (w != m.alphabet.query || w < 0)
            fail("state '" + qn + "' writes a non-answer symbol at the end");
        shape.end_write[static_cast<size_t>(qi)] = c;
    }
    return shape;
}

int TuplePermutation::index_of(const std::string& tuple) const {
    auto it = std::lower_bound(support.begin(), support.end(), tuple);
    if (it == support.end() || *it != tuple) return -1;
    return static_cast<int>(it - support.begin());
}

TuplePermutation identity_permutation(std::vector<std::string> support) {
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    TuplePermutation r;
    r.map.resize(support.size());
    for (size_t i = 0; i < support.size(); ++i) r.map[i] = static_cast<int>(i);
    r.support = std::move(support);
    return r;
}

TuplePermutation sample_permutation(Rng rng, std::vector<std::string> support) {
    if (support.empty()) throw ArgError("permutation support must be non-empty");
    TuplePermutation r = identity_permutation(std::move(support));
    r.map = rng.permutation(static_cast<int>(r.support.size()));
    return r;
}

TuplePermutation inverse(const TuplePermutation& r) {
    TuplePermutation inv;
    inv.support = r.support;
    inv.map.resize(r.map.size());
    for (size_t i = 0; i < r.map.size(); ++i)
        inv.map[static_cast<size_t>(r.map[i])] = static_cast<int>(i);
    return inv;
}

Machine prepermute_host(const Machine& m1, Rng rng) {
    Machine m = m1;
    m.product_info.reset();

    // Quiescent work tapes leave no non-blank tuple support, so re-encoding
    // the work alphabet is the identity here; the hardening value is in the
    // state renaming and reordering.
    std::set<std::string> used;
    for (size_t i = 0; i < m.states.size(); ++i)
        m.states[i] = fresh_name(rng, "h", used);

    std::vector<int> perm = rng.permutation(m.state_count());
    Machine out = m;
    for (int i = 0; i < m.state_count(); ++i) {
        out.states[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
            m.states[static_cast<size_t>(i)];
        out.is_final[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
            m.is_final[static_cast<size_t>(i)];
    }
    out.start = perm[static_cast<size_t>(m.start)];
    for (Transition& t : out.transitions) {
        t.from = perm[static_cast<size_t>(t.from)];
        t.to = perm[static_cast<size_t>(t.to)];
    }
    out.finalize();
    return out;
}

namespace {

// Widens the work tape of a 3-tape machine to k tracks; new tracks are blank.
Machine widen_work(const Machine& m, int k) {
    if (m.tapes[1].tracks == k) return m;
    Machine out = m;
    out.tapes[1].tracks = k;
    int old_k = m.tapes[1].tracks;
    int extra = k - old_k;
    Sym sb = m.alphabet.blank;
    for (Transition& t : out.transitions) {
        t.read.insert(t.read.begin() + 1 + old_k, static_cast<size_t>(extra), sb);
        t.write.insert(t.write.begin() + 1 + old_k, static_cast<size_t>(extra), sb);
    }
    out.finalize();
    return out;
}

// Adds unreachable transitions until the machine has target_delta entries.
// Every padding entry reads a non-blank work tuple, which a quiescent-work
// machine can never observe at runtime.
void pad_transitions(Machine& m, size_t target_delta, Rng& rng) {
    if (m.transitions.size() >= target_delta) return;
    std::set<std::pair<State, std::vector<Sym>>> seen;
    for (const Transition& t : m.transitions) seen.insert({t.from, t.read});

    std::vector<State> non_final;
    for (State q = 0; q < m.state_count(); ++q)
        if (!m.final_state(q)) non_final.push_back(q);
    if (non_final.empty()) throw ArgError("cannot pad a machine with only final states");

    Sym nsyms = static_cast<Sym>(m.alphabet.symbols.size());
    int T = m.track_offset.back();
    int in_off = 0, out_off = T - 1;

    while (m.transitions.size() < target_delta) {
        Transition t;
        t.from = non_final[static_cast<size_t>(rng.below(non_final.size()))];
        t.to = static_cast<State>(rng.below(static_cast<uint64_t>(m.state_count())));
        t.read.resize(static_cast<size_t>(T));
        t.write.resize(static_cast<size_t>(T));
        for (int i = 0; i < T; ++i) {
            t.read[static_cast<size_t>(i)] = static_cast<Sym>(rng.below(static_cast<uint64_t>(nsyms)));
            t.write[static_cast<size_t>(i)] = static_cast<Sym>(rng.below(static_cast<uint64_t>(nsyms)));
        }
        // Input symbols are limited to the input alphabet plus blank, and the
        // tape is read-only.
        static const int kInputChoices = 3;
        Sym in_opts[kInputChoices] = {m.alphabet.zero, m.alphabet.one, m.alphabet.blank};
        t.read[static_cast<size_t>(in_off)] = in_opts[rng.below(kInputChoices)];
        t.write[static_cast<size_t>(in_off)] = t.read[static_cast<size_t>(in_off)];
        t.read[static_cast<size_t>(out_off)] = m.alphabet.blank;
        t.write[static_cast<size_t>(out_off)] = t.read[static_cast<size_t>(out_off)];
        // Force a non-blank work read so the entry is unreachable.
        int work_track = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(m.tapes[1].tracks)));
        Sym nb = rng.boolean() ? m.alphabet.zero : m.alphabet.one;
        t.read[static_cast<size_t>(work_track)] = nb;
        for (size_t i = 0; i < m.tapes.size(); ++i) {
            uint64_t mv = rng.below(i + 1 == m.tapes.size() ? 2 : 3);
            t.moves.push_back(static_cast<Move>(mv));  // L=0,R=1,S=2; output gets L or R
        }
        if (t.moves.back() == Move::L) t.moves.back() = Move::R;
        if (!seen.insert({t.from, t.read}).second) continue;
        m.transitions.push_back(std::move(t));
    }
    m.finalize();
}

}  // namespace

std::pair<Machine, Machine> normalize_pair(const Machine& m1, const Machine& m2, Rng rng,
                                           int* k_out) {
    require_three_tape(m1, "normalize_pair");
    require_three_tape(m2, "normalize_pair");
    int k = std::max(m1.tapes[1].tracks, m2.tapes[1].tracks);
    Machine a = widen_work(m1, k);
    Machine b = widen_work(m2, k);

    int q_target = std::max(a.state_count(), b.state_count());
    Rng ra = rng.fork("left"), rb = rng.fork("right");
    auto pad_states = [](Machine& m, int target, Rng& r) {
        std::set<std::string> used(m.states.begin(), m.states.end());
        while (m.state_count() < target) {
            m.states.push_back(fresh_name(r, "d", used));
            m.is_final.push_back(0);
        }
        m.finalize();
    };
    pad_states(a, q_target, ra);
    pad_states(b, q_target, rb);

    size_t d_target = std::max(a.transitions.size(), b.transitions.size());
    pad_transitions(a, d_target, ra);
    pad_transitions(b, d_target, rb);

    if (k_out) *k_out = k;
    a.validate_or_throw();
    b.validate_or_throw();
    return {std::move(a), std::move(b)};
}

Machine build_product(const Machine& host, const Machine& marker) {
    ScanShape s1 = analyze_scan_shape(host);
    ScanShape s2 = analyze_scan_shape(marker);
    if (s1.k != s2.k)
        throw ValidationError(
            "layout mismatch: operands have different work track counts; normalize first");
    const int k = s1.k;

    Machine m;
    m.name = host.name + "+" + marker.name;
    Sym s0 = m.alphabet.intern("0");
    Sym sone = m.alphabet.intern("1");
    Sym sb = m.alphabet.intern("_");
    m.alphabet.blank = sb;
    bool need_query = false;
    for (char c : s1.end_write) need_query = need_query || c == '?';
    for (char c : s2.end_write) need_query = need_query || c == '?';
    Sym sq = need_query ? m.alphabet.intern("?") : -1;
    auto sym_of = [&](char c) -> Sym { return c == '0' ? s0 : (c == '1' ? sone : sq); };

    m.tapes = {{TapeRole::Input, 1}, {TapeRole::Work, 1},  {TapeRole::Work, k},
               {TapeRole::Work, 1}, {TapeRole::Work, k},  {TapeRole::Work, 1},
               {TapeRole::Output, 1}};
    const int T = 2 * k + 5;

    // Synchronized pair closure over (host state, marker state).
    auto info = std::make_shared<ProductInfo>();
    info->k = k;
    std::map<std::pair<int, int>, int> pair_idx;
    std::vector<std::pair<int, int>> pairs;
    std::deque<int> queue;
    auto pair_of = [&](int i1, int i2) -> int {
        auto key = std::make_pair(i1, i2);
        auto it = pair_idx.find(key);
        if (it != pair_idx.end()) return it->second;
        int idx = static_cast<int>(pairs.size());
        pair_idx.emplace(key, idx);
        pairs.push_back(key);
        queue.push_back(idx);
        return idx;
    };
    info->start_pair = pair_of(s1.start, s2.start);
    while (!queue.empty()) {
        int p = queue.front();
        queue.pop_front();
        auto [i1, i2] = pairs[static_cast<size_t>(p)];
        info->pair_next.push_back({-1, -1});
        info->pair_end.emplace_back(s1.end_write[static_cast<size_t>(i1)],
                                    s2.end_write[static_cast<size_t>(i2)]);
        for (int bit = 0; bit < 2; ++bit) {
            int q = pair_of(s1.next[static_cast<size_t>(i1)][static_cast<size_t>(bit)],
                            s2.next[static_cast<size_t>(i2)][static_cast<size_t>(bit)]);
            info->pair_next[static_cast<size_t>(p)][static_cast<size_t>(bit)] = q;
        }
    }

    auto add_state = [&](const std::string& name, bool fin) -> State {
        m.states.push_back(name);
        m.is_final.push_back(fin ? 1 : 0);
        return static_cast<State>(m.states.size() - 1);
    };
    State st_copy = add_state("copy", false);
    State st_rewind = add_state("rewind", false);
    info->pair_state.resize(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i)
        info->pair_state[i] = add_state("p" + std::to_string(i), false);
    State st_sel = add_state("sel", false);
    State st_halt = add_state("halt", true);
    info->copy_state = st_copy;
    info->rewind_state = st_rewind;
    info->select_state = st_sel;
    info->halt_state = st_halt;
    m.start = st_copy;

    auto blank_rw = [&]() { return std::vector<Sym>(static_cast<size_t>(T), sb); };
    // Flattened track offsets: t1=0, t2=1, t3=2..k+1, t4=k+2, t5=k+3..2k+2,
    // t6=2k+3, t7=2k+4... computed from tape declarations.
    std::vector<int> off(m.tapes.size() + 1, 0);
    for (size_t i = 0; i < m.tapes.size(); ++i) off[i + 1] = off[i] + m.tapes[i].tracks;

    auto add = [&](State from, State to, std::vector<Sym> rd, std::vector<Sym> wr,
                   std::vector<Move> mv) {
        Transition t;
        t.from = from;
        t.to = to;
        t.read = std::move(rd);
        t.write = std::move(wr);
        t.moves = std::move(mv);
        m.transitions.push_back(std::move(t));
    };
    auto stay = [&]() { return std::vector<Move>(m.tapes.size(), Move::S); };

    for (int bit = 0; bit < 2; ++bit) {
        Sym r = bit ? sone : s0;
        auto rd = blank_rw();
        rd[static_cast<size_t>(off[0])] = r;
        auto wr = rd;
        wr[static_cast<size_t>(off[1])] = r;  // copy the symbol to tape 2
        auto mv = stay();
        mv[0] = Move::R;
        mv[1] = Move::R;
        add(st_copy, st_copy, rd, wr, mv);
    }
    {
        auto rd = blank_rw();
        auto mv = stay();
        mv[0] = Move::L;
        mv[1] = Move::L;
        add(st_copy, st_rewind, rd, rd, mv);
    }
    for (int bit = 0; bit < 2; ++bit) {
        Sym r = bit ? sone : s0;
        auto rd = blank_rw();
        rd[static_cast<size_t>(off[0])] = r;
        rd[static_cast<size_t>(off[1])] = r;
        auto mv = stay();
        mv[0] = Move::L;
        mv[1] = Move::L;
        add(st_rewind, st_rewind, rd, rd, mv);
    }
    {
        auto rd = blank_rw();
        auto mv = stay();
        mv[0] = Move::R;
        mv[1] = Move::R;
        add(st_rewind, info->pair_state[static_cast<size_t>(info->start_pair)], rd, rd, mv);
    }

    std::set<std::pair<char, char>> realized;
    for (size_t p = 0; p < pairs.size(); ++p) {
        State sp = info->pair_state[p];
        for (int bit = 0; bit < 2; ++bit) {
            Sym r = bit ? sone : s0;
            auto rd = blank_rw();
            rd[static_cast<size_t>(off[0])] = r;
            rd[static_cast<size_t>(off[1])] = r;
            auto mv = stay();
            mv[0] = Move::R;
            mv[1] = Move::R;
            int np = info->pair_next[p][static_cast<size_t>(bit)];
            add(sp, info->pair_state[static_cast<size_t>(np)], rd, rd, mv);
        }
        auto [a, b] = info->pair_end[p];
        realized.insert({a, b});
        auto rd = blank_rw();
        auto wr = rd;
        wr[static_cast<size_t>(off[3])] = sym_of(a);  // stage host answer on tape 4
        wr[static_cast<size_t>(off[5])] = sym_of(b);  // stage marker answer on tape 6
        add(sp, st_sel, rd, wr, stay());
    }

    for (auto [a, b] : realized) {
        auto rd = blank_rw();
        rd[static_cast<size_t>(off[3])] = sym_of(a);
        rd[static_cast<size_t>(off[5])] = sym_of(b);
        auto wr = rd;
        char sel = b == '?' ? a : b;
        wr[static_cast<size_t>(off[6])] = sym_of(sel);
        auto mv = stay();
        mv[6] = Move::R;
        add(st_sel, st_halt, rd, wr, mv);
    }

    m.finalize();
    m.validate_or_throw();
    m.product_info = info;
    return m;
}

Machine to_three_tape(const Machine& m_a) {
    if (!m_a.product_info)
        throw ValidationError(
            "layout mismatch: the 7-tape machine carries no product layout to compile");
    const ProductInfo& pi = *m_a.product_info;
    const int k = pi.k;
    const int W = 2 * k + 8;

    Machine m;
    m.name = m_a.name + "-3tape";
    Sym s0 = m.alphabet.intern("0");
    Sym s1 = m.alphabet.intern("1");
    Sym sb = m.alphabet.intern("_");
    m.alphabet.blank = sb;
    bool need_query = false;
    for (auto [a, b] : pi.pair_end) need_query = need_query || a == '?' || b == '?';
    Sym sq = need_query ? m.alphabet.intern("?") : -1;
    Sym mark = m.alphabet.intern("^");
    auto sym_of = [&](char c) -> Sym { return c == '0' ? s0 : (c == '1' ? s1 : sq); };

    m.tapes = {{TapeRole::Input, 1}, {TapeRole::Work, W}, {TapeRole::Output, 1}};

    // Work-track indices (0-based within the work tuple).
    const int c2 = 0, h2 = 1;
    const int h3 = k + 2;          // tape-3 contents occupy 2..k+1
    const int c4 = k + 3, h4 = k + 4;
    const int h5 = 2 * k + 5;      // tape-5 contents occupy k+5..2k+4
    const int c6 = 2 * k + 6, h6 = 2 * k + 7;

    auto add_state = [&](const std::string& name, bool fin) -> State {
        m.states.push_back(name);
        m.is_final.push_back(fin ? 1 : 0);
        return static_cast<State>(m.states.size() - 1);
    };
    size_t n_pairs = pi.pair_state.size();
    State st_init = add_state("binit", false);
    State st_copya = add_state("copya", false);
    State st_copyb = add_state("copyb", false);
    State st_rwalk = add_state("rwalk", false);
    std::vector<State> sim(n_pairs), car(n_pairs, -1);
    for (size_t i = 0; i < n_pairs; ++i) sim[i] = add_state("sim" + std::to_string(i), false);
    std::set<int> car_needed;
    for (const auto& nx : pi.pair_next) {
        car_needed.insert(nx[0]);
        car_needed.insert(nx[1]);
    }
    for (int i : car_needed) car[static_cast<size_t>(i)] = add_state("car" + std::to_string(i), false);
    std::vector<std::pair<char, char>> realized;
    std::map<std::pair<char, char>, State> endwalk;
    for (auto ab : pi.pair_end)
        if (!endwalk.count(ab)) {
            endwalk[ab] = add_state("end" + std::to_string(realized.size()), false);
            realized.push_back(ab);
        }
    State st_sel = add_state("zsel", false);
    State st_halt = add_state("halt", true);
    m.start = st_init;

    struct Col {
        std::vector<Sym> v;
        Col(int W_, Sym blank) : v(static_cast<size_t>(W_), blank) {}
        Col& set(int t, Sym s) {
            v[static_cast<size_t>(t)] = s;
            return *this;
        }
    };
    auto base = [&]() { return Col(W, sb); };
    auto anchors = [&](Col c) {  // the cell-0 markers for tapes 3..6
        return c.set(h3, mark).set(h4, mark).set(h5, mark).set(h6, mark);
    };

    auto add = [&](State from, State to, Sym in_r, const Col& rd, Sym in_w, const Col& wr,
                   Move m_in, Move m_work, Sym out_w, Move m_out) {
        Transition t;
        t.from = from;
        t.to = to;
        t.read.reserve(static_cast<size_t>(W) + 2);
        t.read.push_back(in_r);
        t.read.insert(t.read.end(), rd.v.begin(), rd.v.end());
        t.read.push_back(sb);
        t.write.push_back(in_w);
        t.write.insert(t.write.end(), wr.v.begin(), wr.v.end());
        t.write.push_back(out_w);
        t.moves = {m_in, m_work, m_out};
        m.transitions.push_back(std::move(t));
    };
    const Sym bits[2] = {s0, s1};

    // Initialization: plant every virtual head marker at cell 0.
    for (Sym in : {s0, s1, sb})
        add(st_init, st_copya, in, base(), in, anchors(base()).set(h2, mark), Move::S, Move::S,
            sb, Move::S);

    // Copy phase: two physical steps per input symbol (content write + marker
    // hand-off to the next cell).
    for (Sym r : bits) {
        add(st_copya, st_copyb, r, anchors(base()).set(h2, mark), r,
            anchors(base()).set(c2, r), Move::R, Move::R, sb, Move::S);  // at cell 0
        add(st_copya, st_copyb, r, base().set(h2, mark), r, base().set(c2, r), Move::R,
            Move::R, sb, Move::S);  // at cells >= 1
    }
    add(st_copya, sim[static_cast<size_t>(pi.start_pair)], sb,
        anchors(base()).set(h2, mark), sb, anchors(base()).set(h2, mark), Move::S, Move::S, sb,
        Move::S);  // empty input: simulation starts right here
    add(st_copya, st_rwalk, sb, base().set(h2, mark), sb, base(), Move::L, Move::L, sb,
        Move::S);  // end of copy: drop the marker, walk home
    for (Sym in : {s0, s1, sb})
        add(st_copyb, st_copya, in, base(), in, base().set(h2, mark), Move::S, Move::S, sb,
            Move::S);

    // Rewind: cell 0 is recognizable by the anchored markers.
    for (Sym r : bits)
        add(st_rwalk, st_rwalk, r, base().set(c2, r), r, base().set(c2, r), Move::L, Move::L,
            sb, Move::S);
    for (Sym r : bits)
        add(st_rwalk, sim[static_cast<size_t>(pi.start_pair)], r, anchors(base()).set(c2, r),
            r, anchors(base()).set(c2, r).set(h2, mark), Move::S, Move::S, sb, Move::S);

    // Simulation: both virtual machines advance on the same symbol.
    for (size_t p = 0; p < n_pairs; ++p) {
        for (int bit = 0; bit < 2; ++bit) {
            Sym r = bits[bit];
            State dest = car[static_cast<size_t>(pi.pair_next[p][static_cast<size_t>(bit)])];
            add(sim[p], dest, r, base().set(c2, r).set(h2, mark), r, base().set(c2, r),
                Move::R, Move::R, sb, Move::S);
            if (static_cast<int>(p) == pi.start_pair)
                add(sim[p], dest, r, anchors(base()).set(c2, r).set(h2, mark), r,
                    anchors(base()).set(c2, r), Move::R, Move::R, sb, Move::S);
        }
        auto ab = pi.pair_end[p];
        add(sim[p], endwalk.at(ab), sb, base().set(h2, mark), sb, base().set(h2, mark),
            Move::S, Move::L, sb, Move::S);
        if (static_cast<int>(p) == pi.start_pair)
            add(sim[p], st_sel, sb, anchors(base()).set(h2, mark), sb,
                anchors(base()).set(h2, mark).set(c4, sym_of(ab.first)).set(c6, sym_of(ab.second)),
                Move::S, Move::S, sb, Move::S);
    }
    for (size_t p = 0; p < n_pairs; ++p) {
        if (car[p] < 0) continue;
        for (Sym r : bits)
            add(car[p], sim[p], r, base().set(c2, r), r, base().set(c2, r).set(h2, mark),
                Move::S, Move::S, sb, Move::S);
        add(car[p], sim[p], sb, base(), sb, base().set(h2, mark), Move::S, Move::S, sb,
            Move::S);
    }

    // End phase: walk back to cell 0 and stage both answers there.
    for (auto ab : realized) {
        State e = endwalk.at(ab);
        for (Sym r : bits)
            add(e, e, sb, base().set(c2, r), sb, base().set(c2, r), Move::S, Move::L, sb,
                Move::S);
        for (Sym r : bits)
            add(e, st_sel, sb, anchors(base()).set(c2, r), sb,
                anchors(base()).set(c2, r).set(c4, sym_of(ab.first)).set(c6, sym_of(ab.second)),
                Move::S, Move::S, sb, Move::S);
    }

    // Selection: the marker's staged answer wins unless it is "?".
    std::set<std::pair<char, char>> sel_done;
    for (auto ab : realized) {
        if (!sel_done.insert(ab).second) continue;
        Sym a = sym_of(ab.first), b = sym_of(ab.second);
        Sym out = ab.second == '?' ? a : b;
        for (Sym r : bits)
            add(st_sel, st_halt, sb, anchors(base()).set(c2, r).set(c4, a).set(c6, b), sb,
                anchors(base()).set(c2, r).set(c4, a).set(c6, b), Move::S, Move::S, out,
                Move::R);
    }
    {
        auto ab = pi.pair_end[static_cast<size_t>(pi.start_pair)];
        Sym a = sym_of(ab.first), b = sym_of(ab.second);
        Sym out = ab.second == '?' ? a : b;
        add(st_sel, st_halt, sb, anchors(base()).set(h2, mark).set(c4, a).set(c6, b), sb,
            anchors(base()).set(h2, mark).set(c4, a).set(c6, b), Move::S, Move::S, out,
            Move::R);  // empty-input variant: the cursor never left cell 0
    }

    m.finalize();
    m.validate_or_throw();
    return m;
}

std::vector<std::string> work_support(const Machine& m) {
    require_three_tape(m, "work_support");
    int tr = m.tapes[1].tracks;
    std::set<std::string> cols;
    std::string blank = join_column(m, std::vector<Sym>(static_cast<size_t>(tr), m.alphabet.blank).data(), tr);
    for (const Transition& t : m.transitions) {
        cols.insert(join_column(m, &t.read[1], tr));
        cols.insert(join_column(m, &t.write[1], tr));
    }
    cols.erase(blank);
    return {cols.begin(), cols.end()};
}

Machine permute_machine(const Machine& m_b, const TuplePermutation& r) {
    require_three_tape(m_b, "permute_machine");
    int tr = m_b.tapes[1].tracks;

    Machine m;
    m.name = m_b.name + "-enc";
    m.states = m_b.states;
    m.is_final = m_b.is_final;
    m.start = m_b.start;
    m.alphabet.intern("0");
    m.alphabet.intern("1");
    m.alphabet.blank = m.alphabet.intern("_");
    if (m_b.alphabet.query >= 0) m.alphabet.intern("?");
    std::vector<Sym> opaque(r.support.size());
    for (size_t j = 0; j < r.support.size(); ++j)
        opaque[j] = m.alphabet.intern("t" + std::to_string(j));

    m.tapes = {{TapeRole::Input, 1}, {TapeRole::Work, 1}, {TapeRole::Output, 1}};

    std::string blank_col =
        join_column(m_b, std::vector<Sym>(static_cast<size_t>(tr), m_b.alphabet.blank).data(), tr);
    auto encode = [&](const Sym* col) -> Sym {
        std::string name = join_column(m_b, col, tr);
        if (name == blank_col) return m.alphabet.blank;
        int idx = r.index_of(name);
        if (idx < 0)
            throw ValidationError("tuple '" + name +
                                  "' in the transition table is not covered by the permutation");
        return opaque[static_cast<size_t>(r.map[static_cast<size_t>(idx)])];
    };
    auto port = [&](Sym s) -> Sym {  // input/output symbols keep their names
        return m.alphabet.intern(m_b.alphabet.name(s));
    };

    int T_old = m_b.track_offset.back();
    for (const Transition& t : m_b.transitions) {
        Transition u;
        u.from = t.from;
        u.to = t.to;
        u.read = {port(t.read[0]), encode(&t.read[1]), port(t.read[static_cast<size_t>(T_old - 1)])};
        u.write = {port(t.write[0]), encode(&t.write[1]),
                   port(t.write[static_cast<size_t>(T_old - 1)])};
        u.moves = t.moves;
        m.transitions.push_back(std::move(u));
    }
    m.finalize();
    m.validate_or_throw();
    return m;
}

std::map<std::string, std::string> finalize_appearance(Machine& m, Rng rng,
                                                       const AppearanceOptions& opts) {
    m.product_info.reset();

    // Unreachable padding: seeded count of extra states and work symbols so
    // machine sizes differ across seeds.
    int pad = opts.max_pad_states > 0
                  ? static_cast<int>(rng.below(static_cast<uint64_t>(opts.max_pad_states) + 1))
                  : 0;
    int spare = opts.max_spare_symbols > 0
                    ? static_cast<int>(
                          rng.below(static_cast<uint64_t>(opts.max_spare_symbols) + 1))
                    : 0;
    {
        std::set<std::string> used(m.states.begin(), m.states.end());
        size_t delta_target = m.transitions.size();
        for (int i = 0; i < pad; ++i) {
            m.states.push_back(fresh_name(rng, "x", used));
            m.is_final.push_back(0);
            delta_target += 1 + rng.below(2);
        }
        std::set<std::string> sym_used(m.alphabet.symbols.begin(), m.alphabet.symbols.end());
        for (int i = 0; i < spare; ++i) m.alphabet.intern(fresh_name(rng, "g", sym_used));
        m.finalize();
        if (pad > 0) {
            // Padding transitions leave only from the fresh unreachable states.
            std::vector<State> dead;
            for (int i = 0; i < pad; ++i)
                dead.push_back(static_cast<State>(m.state_count() - pad + i));
            std::set<std::pair<State, std::vector<Sym>>> seen;
            Sym nsyms = static_cast<Sym>(m.alphabet.symbols.size());
            int T = m.track_offset.back();
            while (m.transitions.size() < delta_target) {
                Transition t;
                t.from = dead[static_cast<size_t>(rng.below(dead.size()))];
                t.to = dead[static_cast<size_t>(rng.below(dead.size()))];
                t.read.resize(static_cast<size_t>(T));
                t.write.resize(static_cast<size_t>(T));
                for (int j = 0; j < T; ++j) {
                    t.read[static_cast<size_t>(j)] =
                        static_cast<Sym>(rng.below(static_cast<uint64_t>(nsyms)));
                    t.write[static_cast<size_t>(j)] =
                        static_cast<Sym>(rng.below(static_cast<uint64_t>(nsyms)));
                }
                Sym in_opts[3] = {m.alphabet.zero, m.alphabet.one, m.alphabet.blank};
                t.read[0] = in_opts[rng.below(3)];
                t.write[0] = t.read[0];
                t.write[static_cast<size_t>(T - 1)] = t.read[static_cast<size_t>(T - 1)];
                for (size_t j = 0; j < m.tapes.size(); ++j)
                    t.moves.push_back(static_cast<Move>(rng.below(3)));
                if (t.moves.back() == Move::L) t.moves.back() = Move::S;
                if (!seen.insert({t.from, t.read}).second) continue;
                m.transitions.push_back(std::move(t));
            }
        }
    }

    // Random names. "0", "1", "_" and "?" are format anchors and keep theirs.
    std::map<std::string, std::string> sym_rename;
    {
        std::set<std::string> used = {"0", "1", "_", "?"};
        for (std::string& s : m.alphabet.symbols) {
            std::string fresh =
                (s == "0" || s == "1" || s == "_" || s == "?") ? s : fresh_name(rng, "g", used);
            sym_rename[s] = fresh;
            s = fresh;
        }
        m.alphabet.index.clear();
        for (size_t i = 0; i < m.alphabet.symbols.size(); ++i)
            m.alphabet.index[m.alphabet.symbols[i]] = static_cast<Sym>(i);
        std::set<std::string> sused;
        for (std::string& s : m.states) s = fresh_name(rng, "s", sused);
    }

    // Shuffled state and symbol order; indices are what the canonical
    // serialization shows, so the order itself must not be a fingerprint.
    {
        std::vector<int> sp = rng.permutation(m.state_count());
        Machine out = m;
        for (int i = 0; i < m.state_count(); ++i) {
            out.states[static_cast<size_t>(sp[static_cast<size_t>(i)])] =
                m.states[static_cast<size_t>(i)];
            out.is_final[static_cast<size_t>(sp[static_cast<size_t>(i)])] =
                m.is_final[static_cast<size_t>(i)];
        }
        out.start = sp[static_cast<size_t>(m.start)];
        for (Transition& t : out.transitions) {
            t.from = sp[static_cast<size_t>(t.from)];
            t.to = sp[static_cast<size_t>(t.to)];
        }

        std::vector<int> yp = rng.permutation(static_cast<int>(m.alphabet.symbols.size()));
        Alphabet na;
        na.symbols.resize(m.alphabet.symbols.size());
        for (size_t i = 0; i < m.alphabet.symbols.size(); ++i)
            na.symbols[static_cast<size_t>(yp[i])] = m.alphabet.symbols[i];
        for (size_t i = 0; i < na.symbols.size(); ++i) {
            na.index[na.symbols[i]] = static_cast<Sym>(i);
            if (na.symbols[i] == "0") na.zero = static_cast<Sym>(i);
            if (na.symbols[i] == "1") na.one = static_cast<Sym>(i);
            if (na.symbols[i] == "?") na.query = static_cast<Sym>(i);
        }
        na.blank = yp[static_cast<size_t>(m.alphabet.blank)];
        out.alphabet = na;
        for (Transition& t : out.transitions) {
            for (Sym& s : t.read) s = yp[static_cast<size_t>(s)];
            for (Sym& s : t.write) s = yp[static_cast<size_t>(s)];
        }
        m = std::move(out);
    }
    m.finalize();
    m.validate_or_throw();
    return sym_rename;
}

CombineStages combine_stages(const Machine& host, const Machine& marker,
                             const std::string& seed_hex) {
    Rng master = Rng::from_hex(seed_hex);

    Machine m1p = prepermute_host(host, master.fork("preperm"));
    int k = 1;
    auto [n1, n2] = normalize_pair(m1p, marker, master.fork("normalize"), &k);
    Machine ma = build_product(n1, n2);
    Machine mb = to_three_tape(ma);
    std::vector<std::string> support = work_support(mb);
    TuplePermutation r = sample_permutation(master.fork("tuples"), support);
    Machine m = permute_machine(mb, r);
    auto renames = finalize_appearance(m, master.fork("appearance"), AppearanceOptions{});

    CombinationRecord rec;
    rec.k = k;
    rec.t = 2 * k + 8;
    rec.seed_hex = seed_hex;
    rec.host_preperm_seed = "preperm";
    rec.host_hash = structural_hash(host);
    rec.marker_hash = structural_hash(marker);
    rec.ma_hash = structural_hash(ma);
    rec.mb_hash = structural_hash(mb);
    rec.m_hash = structural_hash(m);
    rec.permutation = r;
    // The cell encoder stores logical tuple support[j] as interim symbol
    // t<map[j]>; record that symbol's final observable name.
    rec.opaque_of.resize(r.support.size());
    for (size_t j = 0; j < r.support.size(); ++j)
        rec.opaque_of[j] = renames.at("t" + std::to_string(r.map[j]));
    return {std::move(ma), std::move(mb), std::move(m), std::move(rec)};
}

CombineOutput combine(const Machine& host, const Machine& marker,
                      const std::string& seed_hex) {
    CombineStages st = combine_stages(host, marker, seed_hex);
    return {std::move(st.machine), std::move(st.record)};
}

std::string mini_symbol(int bit, int phase) {
    return "w" + std::to_string(bit) + std::to_string(phase);
}

CombineOutput mini_combine(const Machine& host, const Machine& marker, int phases,
                           const std::string& seed_hex) {
    if (phases < 1 || phases > 4)
        throw ArgError("mini mode supports 1 to 4 phases (support size 2..8)");
    ScanShape s1 = analyze_scan_shape(host);
    ScanShape s2 = analyze_scan_shape(marker);
    Rng master = Rng::from_hex(seed_hex);

    Machine m;
    m.name = "mini";
    Sym s0 = m.alphabet.intern("0");
    Sym sone = m.alphabet.intern("1");
    Sym sb = m.alphabet.intern("_");
    m.alphabet.blank = sb;
    bool need_query = false;
    for (char c : s1.end_write) need_query = need_query || c == '?';
    for (char c : s2.end_write) need_query = need_query || c == '?';
    Sym sq = need_query ? m.alphabet.intern("?") : -1;
    auto sym_of = [&](char c) -> Sym { return c == '0' ? s0 : (c == '1' ? sone : sq); };
    std::vector<std::array<Sym, 2>> wsym(static_cast<size_t>(phases));
    for (int ph = 0; ph < phases; ++ph)
        for (int bit = 0; bit < 2; ++bit)
            wsym[static_cast<size_t>(ph)][static_cast<size_t>(bit)] =
                m.alphabet.intern(mini_symbol(bit, ph));

    m.tapes = {{TapeRole::Input, 1}, {TapeRole::Work, 1}, {TapeRole::Output, 1}};

    auto add_state = [&](const std::string& name, bool fin) -> State {
        m.states.push_back(name);
        m.is_final.push_back(fin ? 1 : 0);
        return static_cast<State>(m.states.size() - 1);
    };
    std::vector<State> copy(static_cast<size_t>(phases));
    for (int ph = 0; ph < phases; ++ph)
        copy[static_cast<size_t>(ph)] = add_state("copy" + std::to_string(ph), false);
    State rw = add_state("rw", false);

    struct Key {
        int i1, i2, ph;
        bool operator<(const Key& o) const {
            return std::tie(i1, i2, ph) < std::tie(o.i1, o.i2, o.ph);
        }
    };
    std::map<Key, State> sim;
    std::deque<Key> queue;
    auto sim_of = [&](int i1, int i2, int ph) -> State {
        Key key{i1, i2, ph};
        auto it = sim.find(key);
        if (it != sim.end()) return it->second;
        State s = add_state("sim" + std::to_string(sim.size()), false);
        sim.emplace(key, s);
        queue.push_back(key);
        return s;
    };
    State entry = sim_of(s1.start, s2.start, 0);
    State halt = -1;  // created after the closure so state ids stay compact

    struct Pending {
        State from, to;
        Sym in_r, w_r, w_w, out_w;
        Move m_in, m_w, m_out;
    };
    std::vector<Pending> pend;
    while (!queue.empty()) {
        Key key = queue.front();
        queue.pop_front();
        State sp = sim.at(key);
        for (int bit = 0; bit < 2; ++bit) {
            int n1 = s1.next[static_cast<size_t>(key.i1)][static_cast<size_t>(bit)];
            int n2 = s2.next[static_cast<size_t>(key.i2)][static_cast<size_t>(bit)];
            State dest = sim_of(n1, n2, (key.ph + 1) % phases);
            pend.push_back({sp, dest, sb,
                            wsym[static_cast<size_t>(key.ph)][static_cast<size_t>(bit)],
                            wsym[static_cast<size_t>(key.ph)][static_cast<size_t>(bit)], sb,
                            Move::S, Move::R, Move::S});
        }
        char a = s1.end_write[static_cast<size_t>(key.i1)];
        char b = s2.end_write[static_cast<size_t>(key.i2)];
        char sel = b == '?' ? a : b;
        pend.push_back({sp, static_cast<State>(-1), sb, sb, sb, sym_of(sel), Move::S, Move::S,
                        Move::R});
    }
    halt = add_state("halt", true);
    m.start = copy[0];

    auto add = [&](State from, State to, Sym in_r, Sym w_r, Sym w_w, Sym out_w, Move m_in,
                   Move m_w, Move m_out) {
        Transition t;
        t.from = from;
        t.to = to;
        t.read = {in_r, w_r, sb};
        t.write = {in_r, w_w, out_w};
        t.moves = {m_in, m_w, m_out};
        m.transitions.push_back(std::move(t));
    };
    for (int ph = 0; ph < phases; ++ph) {
        for (int bit = 0; bit < 2; ++bit) {
            Sym r = bit ? sone : s0;
            add(copy[static_cast<size_t>(ph)], copy[static_cast<size_t>((ph + 1) % phases)], r,
                sb, wsym[static_cast<size_t>(ph)][static_cast<size_t>(bit)], sb, Move::R,
                Move::R, Move::S);
        }
        add(copy[static_cast<size_t>(ph)], rw, sb, sb, sb, sb, Move::S, Move::L, Move::S);
    }
    for (int ph = 0; ph < phases; ++ph)
        for (int bit = 0; bit < 2; ++bit)
            add(rw, rw, sb, wsym[static_cast<size_t>(ph)][static_cast<size_t>(bit)],
                wsym[static_cast<size_t>(ph)][static_cast<size_t>(bit)], sb, Move::S, Move::L,
                Move::S);
    add(rw, entry, sb, sb, sb, sb, Move::S, Move::R, Move::S);
    for (const Pending& p : pend) {
        Transition t;
        t.from = p.from;
        t.to = p.to < 0 ? halt : p.to;
        t.read = {p.in_r, p.w_r, sb};
        t.write = {p.in_r, p.w_w, p.out_w};
        t.moves = {p.m_in, p.m_w, p.m_out};
        m.transitions.push_back(std::move(t));
    }
    m.finalize();
    m.validate_or_throw();

    std::vector<std::string> support;
    for (int ph = 0; ph < phases; ++ph)
        for (int bit = 0; bit < 2; ++bit) support.push_back(mini_symbol(bit, ph));
    TuplePermutation r = sample_permutation(master.fork("tuples"), support);
    Machine out = permute_machine(m, r);
    AppearanceOptions opts;
    opts.max_pad_states = 0;   // support size must stay inferable from the file
    opts.max_spare_symbols = 0;
    auto renames = finalize_appearance(out, master.fork("appearance"), opts);

    CombinationRecord rec;
    rec.k = s1.k;
    rec.t = 1;
    rec.mini = true;
    rec.mini_phases = phases;
    rec.seed_hex = seed_hex;
    rec.host_hash = structural_hash(host);
    rec.marker_hash = structural_hash(marker);
    rec.mb_hash = structural_hash(m);
    rec.m_hash = structural_hash(out);
    rec.permutation = r;
    rec.opaque_of.resize(r.support.size());
    for (size_t j = 0; j < r.support.size(); ++j)
        rec.opaque_of[j] = renames.at("t" + std::to_string(r.map[j]));
    return {std::move(out), std::move(rec)};
}

}  // namespace tmark
