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

#include "core/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "core/util.hpp"

namespace tmark {

namespace {

std::set<std::string> gram_set(const std::vector<uint8_t>& blob, int n) {
    std::set<std::string> out;
    if (static_cast<size_t>(n) > blob.size()) return out;
    const char* data = reinterpret_cast<const char*>(blob.data());
    for (size_t i = 0; i + static_cast<size_t>(n) <= blob.size(); ++i)
        out.emplace(data + i, static_cast<size_t>(n));
    return out;
}

}  // namespace

ScanReport static_scan(const std::vector<std::vector<uint8_t>>& infected,
                       const std::vector<std::vector<uint8_t>>& clean, int n,
                       size_t list_cap) {
    if (infected.size() < 2) throw ArgError("static scan needs at least 2 infected samples");
    if (n < 1) throw ArgError("n-gram length must be positive");
    size_t shortest = SIZE_MAX;
    for (const auto& b : infected) shortest = std::min(shortest, b.size());
    for (const auto& b : clean) shortest = std::min(shortest, b.size());
    if (static_cast<size_t>(n) > shortest)
        throw ArgError("n-gram length " + std::to_string(n) +
                       " exceeds the shortest serialization (" + std::to_string(shortest) +
                       " bytes)");

    ScanReport rep;
    rep.n = n;
    rep.infected_count = infected.size();
    rep.clean_count = clean.size();

    std::set<std::string> common = gram_set(infected[0], n);
    for (size_t i = 1; i < infected.size() && !common.empty(); ++i) {
        std::set<std::string> g = gram_set(infected[i], n);
        for (auto it = common.begin(); it != common.end();)
            it = g.count(*it) ? std::next(it) : common.erase(it);
    }
    rep.common_count = common.size();

    std::set<std::string> survivors = common;
    for (const auto& blob : clean) {
        if (survivors.empty()) break;
        for (const auto& g : gram_set(blob, n)) survivors.erase(g);
    }
    rep.signature_count = survivors.size();
    rep.also_in_clean_count = rep.common_count - rep.signature_count;
    rep.signature_found = !survivors.empty();
    for (const auto& g : survivors) {
        if (rep.signature_grams_hex.size() >= list_cap) break;
        rep.signature_grams_hex.push_back(hex_encode(std::vector<uint8_t>(g.begin(), g.end())));
    }
    return rep;
}

DecompositionResult decompose_bruteforce(const Machine& m, const Machine& m1,
                                         const std::vector<std::string>& support,
                                         const DecomposeOptions& opts) {
    DecompositionResult res;
    size_t s = support.size();
    if (s == 0) throw ArgError("decomposition support must be non-empty");

    bool saturated = false;
    uint64_t fact = 1;
    for (size_t i = 2; i <= s; ++i) {
        if (fact > UINT64_MAX / i) {
            saturated = true;
            break;
        }
        fact *= i;
    }
    res.required_candidates = saturated ? UINT64_MAX : fact;
    if (saturated || fact > opts.max_candidates) {
        res.refused = true;
        res.refusal_reason =
            "recovering a support of size " + std::to_string(s) + " requires " +
            (saturated ? std::string("more than 2^64") : std::to_string(fact)) +
            " candidate encodings, above the cap of " + std::to_string(opts.max_candidates);
        return res;
    }

    // The reduced layout stores the input copy as phase-tagged symbols; the
    // support must be exactly that family for the canonical decode to exist.
    if (s % 2 != 0) {
        res.refused = true;
        res.refusal_reason = "support size must be even (two symbols per phase)";
        return res;
    }
    int phases = static_cast<int>(s / 2);
    {
        std::set<std::string> want, got(support.begin(), support.end());
        for (int ph = 0; ph < phases; ++ph)
            for (int bit = 0; bit < 2; ++bit) want.insert(mini_symbol(bit, ph));
        if (want != got) {
            res.refused = true;
            res.refusal_reason = "support does not describe the reduced phase-tagged layout";
            return res;
        }
    }

    if (m.tapes.size() != 3 || m.tapes[1].role != TapeRole::Work || m.tapes[1].tracks != 1) {
        res.refused = true;
        res.refusal_reason = "machine does not have the single-track reduced layout";
        return res;
    }

    // Opaque alphabet: every non-blank symbol the work tape can hold.
    std::vector<std::string> opaque;
    {
        std::set<std::string> names;
        for (const Transition& t : m.transitions) {
            for (Sym y : {t.read[1], t.write[1]})
                if (y != m.alphabet.blank) names.insert(m.alphabet.name(y));
        }
        opaque.assign(names.begin(), names.end());
    }
    if (opaque.size() != s) return res;  // no bijection exists; nothing is consistent

    int max_len = opts.max_test_len < 0 ? phases + 2 : opts.max_test_len;
    struct Trace {
        std::string input;
        std::vector<std::string> cells;  // final work-tape symbols at 0..|x|-1
        bool boundary_blank = false;
        std::string m_out, host_out;
        bool usable = false;
    };
    std::vector<Trace> traces;
    for (const std::string& x : all_inputs_up_to(max_len)) {
        Trace tr;
        tr.input = x;
        Runner r(m, x);
        RunOutcome out = r.finish(opts.budget);
        if (out.status == RunStatus::Halted) {
            tr.usable = true;
            tr.m_out = out.output;
            const Tape& w = r.tape(1);
            for (size_t i = 0; i < x.size(); ++i) {
                const Sym* c = w.at(static_cast<Cell>(i));
                tr.cells.push_back(m.alphabet.name(c ? c[0] : w.blank));
            }
            const Sym* b = w.at(static_cast<Cell>(x.size()));
            tr.boundary_blank = !b || b[0] == w.blank;
            RunOutcome h = run(m1, x, opts.budget);
            tr.host_out = h.status == RunStatus::Halted ? h.output : std::string();
        }
        traces.push_back(std::move(tr));
    }

    std::map<std::string, int> opaque_index;
    for (size_t i = 0; i < opaque.size(); ++i) opaque_index[opaque[i]] = static_cast<int>(i);

    std::vector<int> assign(s);
    std::iota(assign.begin(), assign.end(), 0);
    do {
        ++res.candidates_tried;
        bool ok = true;
        for (const Trace& tr : traces) {
            if (!tr.usable) continue;
            if (!tr.boundary_blank) {
                ok = false;
                break;
            }
            for (size_t i = 0; i < tr.cells.size() && ok; ++i) {
                auto it = opaque_index.find(tr.cells[i]);
                if (it == opaque_index.end()) {
                    ok = false;
                    break;
                }
                const std::string& decoded =
                    support[static_cast<size_t>(assign[static_cast<size_t>(it->second)])];
                std::string expected =
                    mini_symbol(tr.input[i] - '0', static_cast<int>(i) % phases);
                if (decoded != expected) ok = false;
            }
            if (!ok) break;
        }
        if (ok) {
            std::map<std::string, std::string> cand;
            for (size_t i = 0; i < s; ++i)
                cand[opaque[i]] = support[static_cast<size_t>(assign[i])];
            res.consistent.push_back(std::move(cand));
        }
    } while (std::next_permutation(assign.begin(), assign.end()));

    if (opts.planted)
        res.planted_found = std::find(res.consistent.begin(), res.consistent.end(),
                                      *opts.planted) != res.consistent.end();
    if (!res.consistent.empty()) {
        for (const Trace& tr : traces) {
            if (!tr.usable) continue;
            res.recovered_m2_behavior.emplace_back(
                tr.input, tr.m_out == tr.host_out ? "?" : tr.m_out);
        }
    }
    return res;
}

std::vector<std::string> leakage_probe(const Verdict& trace) {
    std::vector<std::string> out;
    for (const ProbeResult& p : trace.probes) out.push_back(p.input);
    return out;
}

Verdict probe_scan(const Machine& m, const ProbeScanner& scanner) {
    return band_verdict(m, scanner.probes, scanner.z, scanner.budget);
}

InfectStatus probe_detector(const Machine& target, const SignatureKey& key,
                            const CheckParams& params) {
    Verdict v = check_infected(target, key, params);
    if (v.indeterminate) return InfectStatus::Indeterminate;
    return v.infected ? InfectStatus::AlreadyInfected : InfectStatus::Infected;
}

}  // namespace tmark
