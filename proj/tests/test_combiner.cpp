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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "core/combiner.hpp"
#include "core/dfa.hpp"
#include "core/equivalence.hpp"
#include "core/infection.hpp"
#include "core/machine.hpp"
#include "core/machine_io.hpp"
#include "core/rng.hpp"
#include "core/signature.hpp"

using namespace tmark;

namespace {

constexpr uint64_t kBudget = 2'000'000;

Machine small_host(uint64_t n, int min_states = 2, int max_states = 5) {
    Rng rng = Rng::from_hex("c0c0").fork("host:" + std::to_string(n));
    Dfa d = random_dfa(rng, min_states, max_states);
    return compile_dfa(d, "h" + std::to_string(n));
}

// A small recognizer marker: answers for keyed elements of lengths 3..8
// under a low-threshold key, "?" everywhere else.
Machine small_marker(const std::string& seed) {
    SignatureKey key = derive_key(seed, 2);
    return build_marker(key, MarkerWindow{3, 8});
}

std::string outcome_of(const Machine& m, const std::string& x) {
    RunOutcome o = run(m, x, kBudget);
    REQUIRE(o.status == RunStatus::Halted);
    return o.output;
}

}  // namespace

TEST_CASE("scan shape: compiled automata fit and mirror the source tables") {
    for (uint64_t i = 0; i < 10; ++i) {
        Rng rng = Rng::from_hex("51").fork("dfa:" + std::to_string(i));
        Dfa d = random_dfa(rng, 2, 6);
        Machine m = compile_dfa(d, "m");
        ScanShape s = analyze_scan_shape(m);
        CHECK(s.k == 1);
        CHECK(s.order.size() <= static_cast<size_t>(d.state_count()));
        // Replaying the shape's tables must reproduce the automaton's answers.
        for (const std::string& x : all_inputs_up_to(7)) {
            int q = s.start;
            for (char c : x) q = s.next[static_cast<size_t>(q)][c == '1' ? 1 : 0];
            char expect = d.eval(x) ? '1' : '0';
            CHECK(s.end_write[static_cast<size_t>(q)] == expect);
        }
    }
}

TEST_CASE("scan shape: constant machines and recognizer markers fit") {
    for (char c : {'0', '1', '?'}) {
        ScanShape s = analyze_scan_shape(constant_machine(c, "c"));
        REQUIRE(s.end_write.size() == 1);
        CHECK(s.end_write[0] == c);
        CHECK(s.next[0][0] == 0);
        CHECK(s.next[0][1] == 0);
    }
    Machine marker = small_marker("5150");
    ScanShape s = analyze_scan_shape(marker);
    CHECK(s.k == 1);
    CHECK(s.order.size() > 8);  // trie of six elements of lengths 3..8
    CHECK(s.end_write[static_cast<size_t>(s.start)] == '?');
}

TEST_CASE("scan shape: violations are rejected") {
    auto base = [] { return small_host(99); };

    SUBCASE("extra tape") {
        Machine m = base();
        m.tapes.push_back({TapeRole::Work, 1});
        CHECK_THROWS_WITH_AS(analyze_scan_shape(m),
                             doctest::Contains("3-tape shape"), ValidationError);
    }
    SUBCASE("work head moves during the scan") {
        Machine m = base();
        for (Transition& t : m.transitions)
            if (t.read[0] == m.alphabet.zero) {
                t.moves[1] = Move::R;
                break;
            }
        CHECK_THROWS_WITH_AS(analyze_scan_shape(m),
                             doctest::Contains("moves a non-input head"), ValidationError);
    }
    SUBCASE("work write during the scan") {
        Machine m = base();
        for (Transition& t : m.transitions)
            if (t.read[0] == m.alphabet.one) {
                t.write[1] = m.alphabet.zero;
                break;
            }
        CHECK_THROWS_WITH_AS(analyze_scan_shape(m), doctest::Contains("writes during"),
                             ValidationError);
    }
    SUBCASE("halts before the end of the input") {
        Machine m = base();
        State halt = -1;
        for (State q = 0; q < m.state_count(); ++q)
            if (m.final_state(q)) halt = q;
        REQUIRE(halt >= 0);
        for (Transition& t : m.transitions)
            if (t.read[0] == m.alphabet.zero && t.from == m.start) {
                t.to = halt;
                break;
            }
        CHECK_THROWS_WITH_AS(analyze_scan_shape(m),
                             doctest::Contains("halts before consuming"), ValidationError);
    }
    SUBCASE("missing input move") {
        Machine m = base();
        for (size_t i = 0; i < m.transitions.size(); ++i)
            if (m.transitions[i].read[0] == m.alphabet.one &&
                m.transitions[i].from == m.start) {
                m.transitions.erase(m.transitions.begin() + static_cast<long>(i));
                break;
            }
        m.finalize();
        CHECK_THROWS_WITH_AS(analyze_scan_shape(m), doctest::Contains("has no move on input"),
                             ValidationError);
    }
}

TEST_CASE("selection rule: marker answer wins unless it abstains") {
    // Oracle table for the rule itself.
    CHECK(select_output("0", "?") == "0");
    CHECK(select_output("1", "?") == "1");
    CHECK(select_output("?", "?") == "?");
    for (std::string h : {"0", "1", "?"})
        for (std::string w : {"0", "1"}) CHECK(select_output(h, w) == w);
}

TEST_CASE("combine of constant operands realizes the selection table") {
    const char vals[3] = {'0', '1', '?'};
    int n = 0;
    for (char a : vals)
        for (char b : vals) {
            Machine host = constant_machine(a, "host");
            Machine marker = constant_machine(b, "marker");
            CombineOutput out = combine(host, marker, "ab0" + std::to_string(n++));
            std::string expect(1, b == '?' ? a : b);
            for (const std::string& x : {std::string(), std::string("0"), std::string("110")})
                CHECK(outcome_of(out.machine, x) == expect);
        }
}

TEST_CASE("combined machine equals the selection of its operands") {
    for (uint64_t i = 0; i < 4; ++i) {
        Machine host = small_host(i);
        Machine marker = small_marker("aa0" + std::to_string(i));
        CombineOutput out = combine(host, marker, "deed0" + std::to_string(i));

        for (const std::string& x : all_inputs_up_to(5)) {
            std::string expect = select_output(outcome_of(host, x), outcome_of(marker, x));
            CHECK(outcome_of(out.machine, x) == expect);
        }
        // Lengths where the marker actually answers.
        SignatureKey key = derive_key("aa0" + std::to_string(i), 2);
        for (int len = 3; len <= 8; ++len) {
            std::string x = element_at(key, len);
            std::string expect = select_output(outcome_of(host, x), outcome_of(marker, x));
            CHECK(expect != "?");
            CHECK(outcome_of(out.machine, x) == expect);
        }
    }
}

TEST_CASE("combine is a pure function of host, marker and seed") {
    Machine host = small_host(7);
    Machine marker = small_marker("beef");

    CombineOutput a = combine(host, marker, "0123");
    CombineOutput b = combine(host, marker, "0123");
    CHECK(write_tm(a.machine) == write_tm(b.machine));
    CHECK(a.record.m_hash == b.record.m_hash);
    CHECK(a.record.permutation.map == b.record.permutation.map);
    CHECK(a.record.opaque_of == b.record.opaque_of);

    CombineOutput c = combine(host, marker, "0124");
    CHECK(write_tm(a.machine) != write_tm(c.machine));
    CHECK(structural_hash(a.machine) != structural_hash(c.machine));
}

TEST_CASE("normalize_pair matches sizes and preserves behavior") {
    Machine m1 = small_host(3, 2, 4);
    Machine m2 = small_marker("cafe");
    int k = 0;
    Rng rng = Rng::from_hex("11");
    auto [n1, n2] = normalize_pair(m1, m2, rng.fork("norm"), &k);

    CHECK(n1.state_count() == n2.state_count());
    CHECK(n1.transitions.size() == n2.transitions.size());
    CHECK(n1.tapes[1].tracks == k);
    CHECK(n2.tapes[1].tracks == k);
    CHECK(equivalent_on(m1, n1, 5, kBudget).equivalent());
    CHECK(equivalent_on(m2, n2, 5, kBudget).equivalent());
    CHECK(n1.state_count() >= std::max(m1.state_count(), m2.state_count()));
}

TEST_CASE("prepermute_host renames without changing behavior") {
    Machine m = small_host(12, 3, 6);
    Rng rng = Rng::from_hex("22");
    Machine p = prepermute_host(m, rng.fork("pp"));
    CHECK(p.state_count() == m.state_count());
    CHECK(p.transitions.size() == m.transitions.size());
    CHECK(equivalent_on(m, p, 6, kBudget).equivalent());

    std::set<std::string> before(m.states.begin(), m.states.end());
    std::set<std::string> after(p.states.begin(), p.states.end());
    CHECK(before != after);
}

TEST_CASE("tuple permutations: identity, inverse and support canonicalization") {
    std::vector<std::string> support = {"c", "a", "b", "d"};
    TuplePermutation id = identity_permutation(support);
    CHECK(id.support == std::vector<std::string>{"a", "b", "c", "d"});
    for (int i = 0; i < 4; ++i) CHECK(id.map[static_cast<size_t>(i)] == i);
    CHECK(id.index_of("c") == 2);
    CHECK(id.index_of("zz") == -1);

    Rng rng = Rng::from_hex("33");
    for (int trial = 0; trial < 50; ++trial) {
        TuplePermutation r =
            sample_permutation(rng.fork("t:" + std::to_string(trial)), support);
        TuplePermutation ri = inverse(r);
        for (int i = 0; i < 4; ++i) {
            int j = r.map[static_cast<size_t>(i)];
            CHECK(ri.map[static_cast<size_t>(j)] == i);
        }
        // A bijection: all images distinct.
        std::set<int> images(r.map.begin(), r.map.end());
        CHECK(images.size() == 4);
    }
}

TEST_CASE("sampled permutations are close to uniform over S4") {
    std::vector<std::string> support = {"p", "q", "r", "s"};
    Rng rng = Rng::from_hex("44");
    std::map<std::vector<int>, int> freq;
    const int draws = 1000;
    for (int i = 0; i < draws; ++i) {
        TuplePermutation r = sample_permutation(rng.fork("u:" + std::to_string(i)), support);
        ++freq[r.map];
    }
    CHECK(freq.size() == 24);
    for (const auto& [perm, count] : freq) {
        double p = static_cast<double>(count) / draws;
        CHECK(p > 1.0 / 24 - 0.05);
        CHECK(p < 1.0 / 24 + 0.05);
    }
}

TEST_CASE("appearance pass: anchors survive, names change, behavior is intact") {
    Machine m = small_host(21, 3, 6);
    Machine original = m;
    Rng rng = Rng::from_hex("55");
    auto renames = finalize_appearance(m, rng.fork("app"), AppearanceOptions{});

    CHECK(renames.at("0") == "0");
    CHECK(renames.at("1") == "1");
    CHECK(renames.at("_") == "_");
    for (const std::string& old : original.alphabet.symbols)
        CHECK(renames.count(old) == 1);

    CHECK(m.validate().empty());
    CHECK(m.state_count() >= original.state_count());
    CHECK(m.state_count() <= original.state_count() + AppearanceOptions{}.max_pad_states);
    CHECK(equivalent_on(original, m, 6, kBudget).equivalent());

    std::set<std::string> old_states(original.states.begin(), original.states.end());
    for (const std::string& s : m.states) CHECK(old_states.count(s) == 0);
}

TEST_CASE("appearance pass is seeded: two seeds give different shapes") {
    Machine a = small_host(34);
    Machine b = a;
    Rng rng = Rng::from_hex("66");
    finalize_appearance(a, rng.fork("one"), AppearanceOptions{});
    finalize_appearance(b, rng.fork("two"), AppearanceOptions{});
    CHECK(write_tm(a) != write_tm(b));
    CHECK(equivalent_on(a, b, 5, kBudget).equivalent());
}

TEST_CASE("pipeline stages agree with each other and the final machine") {
    Machine host = small_host(2, 2, 3);
    Machine marker = small_marker("f00d");
    CombineStages st = combine_stages(host, marker, "abcd");

    CHECK(st.record.ma_hash == structural_hash(st.ma));
    CHECK(st.record.mb_hash == structural_hash(st.mb));
    CHECK(st.record.m_hash == structural_hash(st.machine));
    CHECK(st.record.host_hash == structural_hash(host));
    CHECK(st.record.t == 2 * st.record.k + 8);
    CHECK(st.record.permutation.support == work_support(st.mb));

    CHECK(equivalent_on(st.ma, st.mb, 4, kBudget).equivalent());
    CHECK(equivalent_on(st.mb, st.machine, 4, kBudget).equivalent());
}

TEST_CASE("record names every permuted tuple's shipped symbol") {
    Machine host = small_host(5, 2, 3);
    Machine marker = small_marker("0ddba110");
    CombineOutput out = combine(host, marker, "5eed");
    const CombinationRecord& rec = out.record;

    REQUIRE(rec.opaque_of.size() == rec.permutation.support.size());
    std::set<std::string> distinct(rec.opaque_of.begin(), rec.opaque_of.end());
    CHECK(distinct.size() == rec.opaque_of.size());
    for (const std::string& name : rec.opaque_of)
        CHECK(out.machine.alphabet.find(name) >= 0);
}

TEST_CASE("compiled layout keeps at most one head mark per track") {
    Machine host = small_host(40, 2, 3);
    Machine marker = constant_machine('?', "quiet");
    CombineStages st = combine_stages(host, marker, "1177");

    const int W = st.mb.tapes[1].tracks;
    REQUIRE((W - 8) % 2 == 0);
    const int k = (W - 8) / 2;
    const std::vector<int> head_tracks = {1, k + 2, k + 4, 2 * k + 5, 2 * k + 7};
    const Sym mark = st.mb.alphabet.find("^");
    REQUIRE(mark >= 0);

    for (const std::string& x : {std::string("0110"), std::string(), std::string("1")}) {
        Runner r(st.mb, x);
        std::map<int, bool> seen_one;
        uint64_t guard = 0;
        for (;;) {
            const Tape& w = r.tape(1);
            for (int h : head_tracks) {
                int count = 0;
                for (Cell c = w.lo; c <= w.hi; ++c) {
                    const Sym* cell = w.at(c);
                    if (cell && cell[h] == mark) ++count;
                }
                CHECK(count <= 1);
                if (count == 1) seen_one[h] = true;
            }
            StepStatus s = r.step_once();
            REQUIRE(s != StepStatus::Stuck);
            if (s == StepStatus::Final) break;
            REQUIRE(++guard < 100000);
        }
        for (int h : head_tracks) CHECK(seen_one[h]);
        CHECK(r.output() == outcome_of(host, x));
    }
}

TEST_CASE("mini layout: single work track, fused symbols, same behavior") {
    Machine host = small_host(8, 2, 4);
    Machine marker = small_marker("d00d");

    for (int phases : {2, 3}) {
        CombineOutput out = mini_combine(host, marker, phases, "770" + std::to_string(phases));
        CHECK(out.machine.tapes[1].tracks == 1);
        CHECK(out.record.mini);
        CHECK(out.record.mini_phases == phases);
        CHECK(out.record.t == 1);

        std::vector<std::string> expect;
        for (int ph = 0; ph < phases; ++ph)
            for (int bit = 0; bit < 2; ++bit) expect.push_back(mini_symbol(bit, ph));
        std::sort(expect.begin(), expect.end());
        CHECK(out.record.permutation.support == expect);
        REQUIRE(out.record.opaque_of.size() == expect.size());

        for (const std::string& x : all_inputs_up_to(phases + 2)) {
            std::string want = select_output(outcome_of(host, x), outcome_of(marker, x));
            CHECK(outcome_of(out.machine, x) == want);
        }
    }
    CHECK_THROWS_AS(mini_combine(host, marker, 0, "00"), ArgError);
    CHECK_THROWS_AS(mini_combine(host, marker, 5, "00"), ArgError);
}

TEST_CASE("mini work support is inferable from the shipped machine") {
    Machine host = small_host(9, 2, 3);
    Machine marker = small_marker("feed");
    CombineOutput out = mini_combine(host, marker, 2, "313370");

    std::vector<std::string> support = work_support(out.machine);
    CHECK(support.size() == 4);  // exactly 2 * phases, no spare symbols
    std::set<std::string> names(support.begin(), support.end());
    for (const std::string& o : out.record.opaque_of) CHECK(names.count(o) == 1);
}

TEST_CASE("work support of a quiescent work tape is empty") {
    CHECK(work_support(small_host(1)).empty());
    CHECK(work_support(constant_machine('1', "one")).empty());
}
