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

#include <cmath>
#include <string>
#include <vector>

#include "core/combiner.hpp"
#include "core/dfa.hpp"
#include "core/equivalence.hpp"
#include "core/infection.hpp"
#include "core/machine.hpp"
#include "core/rng.hpp"
#include "core/signature.hpp"

using namespace tmark;

namespace {

constexpr uint64_t kBudget = 2'000'000;

Machine dfa_host(uint64_t n) {
    Rng rng = Rng::from_hex("d1ce").fork("host:" + std::to_string(n));
    Dfa d = random_dfa(rng, 2, 5);
    return compile_dfa(d, "h" + std::to_string(n));
}

}  // namespace

TEST_CASE("probe lengths cover n0+1 through K0-1") {
    CHECK(probe_lengths(6, 10) == std::vector<int>{7, 8, 9});
    CHECK(probe_lengths(6, 7) == std::vector<int>{});
    CHECK(probe_lengths(6, 71).size() == 64);
    CHECK(probe_lengths(6, 71).front() == 7);
    CHECK(probe_lengths(6, 71).back() == 70);
}

TEST_CASE("marker answers exactly the keyed elements inside its window") {
    SignatureKey key = derive_key("ac1d", 2);
    Machine marker = build_marker(key, MarkerWindow{3, 10});

    // Exhaustive oracle: every input up to length 10 gets the response bit
    // on a keyed element and the abstain mark everywhere else.
    for (const std::string& x : all_inputs_up_to(10)) {
        RunOutcome o = run(marker, x, kBudget);
        REQUIRE(o.status == RunStatus::Halted);
        CHECK(o.steps == x.size() + 1);
        std::string expect = "?";
        if (x.size() >= 3 && member(key, x)) expect = std::to_string(response_bit(key, x));
        CHECK(o.output == expect);
    }
    // Elements outside the window abstain too.
    for (int n : {11, 12, 20}) {
        RunOutcome o = run(marker, element_at(key, static_cast<uint64_t>(n)), kBudget);
        REQUIRE(o.status == RunStatus::Halted);
        CHECK(o.output == "?");
    }
    // The marker is a valid combination operand.
    ScanShape s = analyze_scan_shape(marker);
    CHECK(s.k == 1);
}

TEST_CASE("marker construction rejects bad windows and tiny state caps") {
    SignatureKey key = derive_key("ac1d", 6);
    CHECK_THROWS_AS(build_marker(key, MarkerWindow{6, 10}), ArgError);   // n_min <= n0
    CHECK_THROWS_AS(build_marker(key, MarkerWindow{12, 10}), ArgError);  // empty window
    CHECK_THROWS_AS(build_marker(key, MarkerWindow{7, 5000}), ArgError);  // beyond family
    CHECK_THROWS_WITH_AS(build_marker(key, MarkerWindow{7, 70}, 10),
                         doctest::Contains("state"), ArgError);
}

TEST_CASE("band bounds follow T and z") {
    SignatureKey key = derive_key("b00b", 2);
    Machine marker = build_marker(key, MarkerWindow{3, 20});

    CheckParams p;
    p.n0 = 2;
    p.K0 = 19;  // 16 probes
    p.z = 3.0;
    p.budget = kBudget;
    Verdict v = check_infected(marker, key, p);
    CHECK(v.trials == 16);
    CHECK(v.timeouts == 0);
    CHECK(v.band_lo == 2);   // ceil(8 - 6)
    CHECK(v.band_hi == 14);  // floor(8 + 6)

    p.K0 = 67;  // 64 probes
    Machine wide = build_marker(key, MarkerWindow{3, 66});
    Verdict v64 = check_infected(wide, key, p);
    CHECK(v64.trials == 64);
    CHECK(v64.band_lo == 20);
    CHECK(v64.band_hi == 44);
}

TEST_CASE("hit count equals the keyed response bits over the probe range") {
    SignatureKey key = derive_key("0ff0", 2);
    Machine marker = build_marker(key, MarkerWindow{3, 30});

    CheckParams p;
    p.n0 = 2;
    p.K0 = 31;
    p.budget = kBudget;
    Verdict v = check_infected(marker, key, p);

    int expect_hits = 0;
    for (int n : probe_lengths(2, 31)) expect_hits += response_bit_at(key, static_cast<uint64_t>(n));
    CHECK(v.hits == expect_hits);
    CHECK(v.trials == 28);

    REQUIRE(v.probes.size() == 28);
    for (size_t i = 0; i < v.probes.size(); ++i) {
        const ProbeResult& pr = v.probes[i];
        CHECK(pr.input == element_at(key, static_cast<uint64_t>(pr.n)));
        CHECK(pr.status == "Halted");
        CHECK(pr.hit == (pr.output == "1"));
    }
}

TEST_CASE("an exhausted budget yields an indeterminate verdict") {
    SignatureKey key = derive_key("dead", 2);
    Machine marker = build_marker(key, MarkerWindow{3, 12});

    CheckParams p;
    p.n0 = 2;
    p.K0 = 13;
    p.budget = 3;  // no probe can finish
    Verdict v = check_infected(marker, key, p);
    CHECK(v.trials == 0);
    CHECK(v.timeouts == 10);
    CHECK(v.indeterminate);
    CHECK_FALSE(v.infected);

    // The same starvation makes the embedding guard refuse as indeterminate.
    InfectResult r = infect(dfa_host(1), key, MarkerWindow{3, 12}, "aabb", p);
    CHECK(r.status == InfectStatus::Indeterminate);
    CHECK_FALSE(r.output.has_value());
}

TEST_CASE("clean automata are not flagged; their embedding is") {
    SignatureKey key = derive_key("c1ea", 2);
    CheckParams p;
    p.n0 = 2;
    p.K0 = 35;  // 32 probes: enough for a meaningful band
    p.budget = kBudget;

    Machine host = dfa_host(2);
    Verdict clean = check_infected(host, key, p);
    CHECK_FALSE(clean.indeterminate);

    InfectResult r = infect(host, key, MarkerWindow{3, 34}, "cc01", p);
    REQUIRE(r.status == InfectStatus::Infected);
    REQUIRE(r.output.has_value());
    const Machine& m = r.output->machine;

    Verdict v = check_infected(m, key, p);
    CHECK(v.infected);
    CHECK(v.trials == 32);

    // A fresh key with the same parameters does not flag it.
    SignatureKey other = derive_key("c1eb", 2);
    Verdict w = check_infected(m, other, p);
    CHECK_FALSE(w.infected);
}

TEST_CASE("infect refuses a host that already carries the key") {
    SignatureKey key = derive_key("5afe", 2);
    CheckParams p;
    p.n0 = 2;
    p.K0 = 35;
    p.budget = kBudget;

    InfectResult first = infect(dfa_host(3), key, MarkerWindow{3, 34}, "bead", p);
    REQUIRE(first.status == InfectStatus::Infected);

    InfectResult second = infect(first.output->machine, key, MarkerWindow{3, 34}, "f00f", p);
    CHECK(second.status == InfectStatus::AlreadyInfected);
    CHECK_FALSE(second.output.has_value());
    CHECK(second.guard.infected);
}

TEST_CASE("infect validates that the window covers every probe") {
    SignatureKey key = derive_key("ab1e", 2);
    CheckParams p;
    p.n0 = 2;
    p.K0 = 35;
    p.budget = kBudget;
    // A constant host is guaranteed to pass the guard (zero probe hits), so
    // the failures below are the window validation, not the guard.
    Machine host = constant_machine('0', "flat");
    // Window stops short of K0-1: some probes would be unanswered.
    CHECK_THROWS_AS(infect(host, key, MarkerWindow{3, 20}, "dd00", p), ArgError);
    // Window starting at or below n0 has no elements to recognize.
    CHECK_THROWS_AS(infect(host, key, MarkerWindow{2, 34}, "dd00", p), ArgError);
}

TEST_CASE("embedding preserves the host everywhere off the keyed elements") {
    SignatureKey key = derive_key("77e1", 2);
    CheckParams p;
    p.n0 = 2;
    p.K0 = 9;   // keeps the marker window small for the exhaustive sweep
    p.z = 1.0;  // six probes only; the z=3 band would cover every count
    p.budget = kBudget;

    Machine host = dfa_host(6);  // all-accepting on the probes: guard-clean under this band
    InfectResult r = infect(host, key, MarkerWindow{3, 8}, "e0e0", p);
    REQUIRE(r.status == InfectStatus::Infected);
    const Machine& m = r.output->machine;

    for (const std::string& x : all_inputs_up_to(8)) {
        std::string host_out = run(host, x, kBudget).output;
        std::string mixed_out = run(m, x, kBudget).output;
        if (x.size() >= 3 && member(key, x)) {
            CHECK(mixed_out == std::to_string(response_bit(key, x)));
        } else {
            CHECK(mixed_out == host_out);
        }
    }
}

TEST_CASE("verdict carries its parameters and the probe transcript") {
    SignatureKey key = derive_key("1dea", 2);
    Machine marker = build_marker(key, MarkerWindow{3, 12});
    CheckParams p;
    p.n0 = 2;
    p.K0 = 13;
    p.z = 2.5;
    p.budget = kBudget;
    Verdict v = check_infected(marker, key, p);
    CHECK(v.n0 == 2);
    CHECK(v.K0 == 13);
    CHECK(v.z == 2.5);
    CHECK(v.trials + v.timeouts == 10);
    double lo = std::ceil(v.trials / 2.0 - v.z * std::sqrt(v.trials) / 2.0);
    double hi = std::floor(v.trials / 2.0 + v.z * std::sqrt(v.trials) / 2.0);
    CHECK(v.band_lo == std::max(0, static_cast<int>(lo)));
    CHECK(v.band_hi == std::min(v.trials, static_cast<int>(hi)));
    CHECK(v.infected == (v.hits >= v.band_lo && v.hits <= v.band_hi));
}
