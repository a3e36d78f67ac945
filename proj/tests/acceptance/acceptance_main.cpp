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

// Acceptance gate: every release-blocking criterion (AC-1 .. AC-9) at full
// scale, one PASS/FAIL line per criterion. All criteria run even after a
// failure; the exit code is nonzero when any fail. Each criterion is seeded
// independently so results are reproducible run to run.

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/combiner.hpp"
#include "core/dfa.hpp"
#include "core/equivalence.hpp"
#include "core/experiments.hpp"
#include "core/infection.hpp"
#include "core/machine.hpp"
#include "core/rng.hpp"
#include "core/signature.hpp"

namespace {

using namespace tmark;
using Clock = std::chrono::steady_clock;

constexpr uint64_t kBudget = 1000000;

std::string hex_seed(Rng rng) {
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016" PRIx64 "%016" PRIx64, rng.next(), rng.next());
    return buf;
}

std::vector<std::string> all_inputs_up_to(int max_len) {
    std::vector<std::string> out;
    for (int len = 0; len <= max_len; ++len)
        for (uint64_t bits = 0; bits < (1ull << len); ++bits) {
            std::string x(static_cast<size_t>(len), '0');
            for (int i = 0; i < len; ++i)
                if (bits >> i & 1) x[static_cast<size_t>(i)] = '1';
            out.push_back(std::move(x));
        }
    return out;
}

// Host whose probe answers are constant by construction: random transition
// structure, accept bits forced to one value.
Machine designed_clean_host(Rng rng, int accept_bit, const std::string& name) {
    Dfa d = random_dfa(rng, 2, 6);
    std::fill(d.accept.begin(), d.accept.end(), static_cast<uint8_t>(accept_bit));
    return compile_dfa(d, name);
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Gate {
public:
    void criterion(const char* id, const std::function<Outcome()>& body) {
        auto t0 = Clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        double dt = std::chrono::duration<double>(Clock::now() - t0).count();
        std::printf("%s %s (%s) [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    dt);
        std::fflush(stdout);
        ++total_;
        if (o.pass) ++passed_;
    }

    int summary() const {
        std::printf("acceptance: %d/%d criteria passed\n", passed_, total_);
        return passed_ == total_ ? 0 : 1;
    }

private:
    int total_ = 0;
    int passed_ = 0;
};

// ---------------------------------------------------------------------------
// AC-1: the combined machine computes exactly the selection rule applied to
// its operands — marker answer unless "?", host answer otherwise — on every
// input up to length 6 and on 500 sampled longer inputs per triple.
Outcome ac1_selection_soundness() {
    constexpr int kTriples = 20;
    const std::vector<std::string> short_inputs = all_inputs_up_to(6);

    uint64_t checked = 0, mismatches = 0;
    std::string first;
    for (int i = 0; i < kTriples; ++i) {
        Rng t = Rng::from_hex("a1c0ffee").fork("triple:" + std::to_string(i));
        SignatureKey key = derive_key(hex_seed(t.fork("key")), 6);
        Rng hr = t.fork("host");
        Machine host = compile_dfa(random_dfa(hr, 2, 6), "host");
        Machine marker = build_marker(key, {7, 70});
        CombineOutput out = combine(host, marker, hex_seed(t.fork("combine")));

        std::vector<std::string> inputs = short_inputs;
        Rng ir = t.fork("inputs");
        for (const std::string& x : sample_inputs(ir, 7, 12, 500)) inputs.push_back(x);

        for (const std::string& x : inputs) {
            RunOutcome om = run(out.machine, x, kBudget);
            RunOutcome oh = run(host, x, kBudget);
            RunOutcome ok = run(marker, x, kBudget);
            ++checked;
            bool good = om.status == RunStatus::Halted && oh.status == RunStatus::Halted &&
                        ok.status == RunStatus::Halted &&
                        om.output == select_output(oh.output, ok.output);
            if (!good) {
                ++mismatches;
                if (first.empty()) first = x.empty() ? "<empty>" : x;
            }
        }
    }

    Outcome o;
    o.pass = mismatches == 0;
    o.detail = std::to_string(kTriples) + " triples, " + std::to_string(checked) +
               " inputs, " + std::to_string(mismatches) + " mismatches";
    if (!first.empty()) o.detail += ", first at \"" + first + "\"";
    return o;
}

// ---------------------------------------------------------------------------
// AC-2: the pipeline stages agree with each other — the 7-tape product with
// its 3-tape track compilation, and that with the shipped machine — on every
// input up to length 6.
Outcome ac2_stage_equivalence() {
    constexpr int kTriples = 10;
    int bad = 0;
    std::string first;
    for (int i = 0; i < kTriples; ++i) {
        Rng t = Rng::from_hex("a2b00c").fork("triple:" + std::to_string(i));
        SignatureKey key = derive_key(hex_seed(t.fork("key")), 6);
        Rng hr = t.fork("host");
        Machine host = compile_dfa(random_dfa(hr, 2, 6), "host");
        Machine marker = build_marker(key, {7, 70});
        CombineStages st = combine_stages(host, marker, hex_seed(t.fork("combine")));

        EquivalenceReport ab = equivalent_on(st.ma, st.mb, 6, kBudget);
        EquivalenceReport bm = equivalent_on(st.mb, st.machine, 6, kBudget);
        bool good = ab.equivalent() && ab.incomparable.empty() && bm.equivalent() &&
                    bm.incomparable.empty();
        if (!good) {
            ++bad;
            if (first.empty()) {
                const EquivalenceReport& r = ab.equivalent() ? bm : ab;
                first = r.counterexample.value_or("<budget>");
            }
        }
    }

    Outcome o;
    o.pass = bad == 0;
    o.detail = std::to_string(kTriples) + " triples, inputs to length 6, " +
               std::to_string(bad) + " stage disagreements";
    if (!first.empty()) o.detail += ", first at \"" + first + "\"";
    return o;
}

// ---------------------------------------------------------------------------
// AC-3: 50 infections of one host under one key (distinct seeds) share no
// byte n-gram, for n in {8, 16, 32}, that a 50-machine clean corpus lacks.
Outcome ac3_no_static_signature() {
    ExperimentConfig cfg = ExperimentConfig::parse(
        "seed = \"a35caa\"\n"
        "infections = 50\n"
        "clean_count = 50\n"
        "grams = [8, 16, 32]\n"
        "n0 = 6\n"
        "k0 = 23\n");
    ExperimentReport rep = run_experiment("scan-sweep", cfg);
    const auto& res = rep.summary["results"];

    Outcome o;
    o.pass = rep.pass;
    o.detail = std::to_string(res["infections"].get<int>()) + " infections vs " +
               std::to_string(res["clean_corpus"].get<int>()) + " clean, grams";
    for (const auto& g : res["ngrams"]) {
        o.detail += " " + std::to_string(g["n"].get<int>()) + ":" +
                    std::to_string(g["signature_count"].get<uint64_t>());
    }
    o.detail += " survivors, " + std::to_string(res["instances_flagged_infected"].get<int>()) +
                " flagged";
    return o;
}

// ---------------------------------------------------------------------------
// AC-4: over 200 keys at 64 effective probes and z = 3, fresh infections are
// flagged in >= 99% of trials and designed-clean hosts in 0%.
Outcome ac4_checker_roc() {
    ExperimentConfig cfg = ExperimentConfig::parse(
        "seed = \"a4c0de\"\n"
        "keys = 200\n"
        "n0 = 6\n"
        "k0 = 71\n"
        "z = 3.0\n");
    ExperimentReport rep = run_experiment("checker-roc", cfg);
    const auto& res = rep.summary["results"];

    Outcome o;
    o.pass = rep.pass;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "sensitivity %.3f (%d/%d), clean false positives %d, wrong-key %d",
                  res["sensitivity"].get<double>(), res["true_positives"].get<int>(),
                  res["guards_passed"].get<int>(), res["clean_false_positives"].get<int>(),
                  res["wrongkey_false_positives"].get<int>());
    o.detail = buf;
    return o;
}

// ---------------------------------------------------------------------------
// AC-5: exhaustive diff between host and infected machine over every input up
// to length 10 — differences appear only at the key's window elements, and
// there the output is exactly the key's response bit.
Outcome ac5_behavioral_delta() {
    // A window entirely inside the exhaustive range, so every behavioral
    // difference is observable. With only 8 probes the default z = 3 band
    // would cover every hit count, so the guard runs at z = 1.
    const SignatureKey key = derive_key("a5d1ff", 2);
    const MarkerWindow window{3, 10};
    const CheckParams params{2, 11, kBudget, 1.0};

    Machine host;
    InfectResult inf;
    int tried = 0, rejected = 0;
    for (; tried < 100; ++tried) {
        Rng hr = Rng::from_hex("a5d1ff").fork("host:" + std::to_string(tried));
        host = compile_dfa(random_dfa(hr, 2, 6), "host");
        inf = infect(host, key, window, hex_seed(Rng::from_hex("a5d1ff").fork(
                                            "combine:" + std::to_string(tried))),
                     params);
        if (inf.status == InfectStatus::Infected) break;
        ++rejected;
    }
    if (inf.status != InfectStatus::Infected)
        return {false, "no guard-clean host found in 100 corpus draws"};

    std::set<std::string> elements;
    for (int n = window.n_min; n <= window.n_max; ++n) elements.insert(element_at(key, n));

    uint64_t checked = 0, violations = 0, visible_diffs = 0;
    std::string first;
    for (const std::string& x : all_inputs_up_to(10)) {
        RunOutcome oh = run(host, x, kBudget);
        RunOutcome oi = run(inf.output->machine, x, kBudget);
        ++checked;
        bool good;
        if (elements.count(x)) {
            good = oi.status == RunStatus::Halted &&
                   oi.output == std::to_string(response_bit(key, x));
            if (good && oi.output != oh.output) ++visible_diffs;
        } else {
            good = oh.status == RunStatus::Halted && oi.status == RunStatus::Halted &&
                   oi.output == oh.output;
        }
        if (!good) {
            ++violations;
            if (first.empty()) first = x.empty() ? "<empty>" : x;
        }
    }

    Outcome o;
    o.pass = violations == 0;
    o.detail = std::to_string(checked) + " inputs, " + std::to_string(violations) +
               " violations, " + std::to_string(visible_diffs) + "/" +
               std::to_string(elements.size()) + " window elements visibly changed (" +
               std::to_string(rejected) + " hosts guard-rejected)";
    if (!first.empty()) o.detail += ", first at \"" + first + "\"";
    return o;
}

// ---------------------------------------------------------------------------
// AC-6: brute force recovers the planted tuple permutation of reduced-layout
// combinations with support sizes 4 and 6 in all 20 trials, while uniform
// guessing stays at 1/|support|! within 3 standard errors over 1000 draws.
Outcome ac6_decompose_oracle() {
    ExperimentConfig cfg = ExperimentConfig::parse(
        "seed = \"a6dec0\"\n"
        "trials = 20\n"
        "draws = 1000\n"
        "phases = [2, 3]\n");
    ExperimentReport rep = run_experiment("decompose-mini", cfg);

    Outcome o;
    o.pass = rep.pass;
    for (const auto& ph : rep.summary["results"]) {
        if (!o.detail.empty()) o.detail += "; ";
        char buf[160];
        std::snprintf(buf, sizeof buf, "support %d: %d/%d recovered, guess %d/%d (expect %.1f)",
                      ph["support"].get<int>(), ph["recovered"].get<int>(),
                      ph["trials"].get<int>(), ph["guess_hits"].get<int>(),
                      ph["guess_draws"].get<int>(),
                      ph["expected_rate"].get<double>() * ph["guess_draws"].get<int>());
        o.detail += buf;
    }
    return o;
}

// ---------------------------------------------------------------------------
// AC-7: the probe strings visible in one in-the-clear check are all members
// of the keyed set, and a key-less scanner replaying them matches the keyed
// checker's verdict on every target (same sensitivity by construction).
Outcome ac7_leakage() {
    ExperimentConfig cfg = ExperimentConfig::parse(
        "seed = \"a71ea0\"\n"
        "trials = 50\n"
        "clean_trials = 20\n"
        "n0 = 6\n"
        "k0 = 71\n");
    ExperimentReport rep = run_experiment("leakage-demo", cfg);
    const auto& res = rep.summary["results"];

    int probes = res["probes_leaked"].get<int>();
    int targets = res["infected_targets"].get<int>() + res["clean_targets"].get<int>();

    Outcome o;
    o.pass = rep.pass && probes == 64;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "%d leaked probes, members: %s; scanner agrees with checker on %d/%d "
                  "targets, sensitivity %.3f",
                  probes, res["all_probes_are_members"].get<bool>() ? "all" : "NOT ALL",
                  res["verdicts_agree"].get<int>(), targets,
                  res["scanner_sensitivity"].get<double>());
    o.detail = buf;
    return o;
}

// ---------------------------------------------------------------------------
// AC-8: the captured-infector test — "would infect() refuse this target?" —
// flags same-key infections in >= 99% of 100 trials and clean or wrong-key
// targets in <= 1%.
Outcome ac8_probe_detector() {
    constexpr int kTrials = 100;
    const CheckParams params{6, 71, kBudget, 3.0};

    int tp = 0, fp_clean = 0, fp_wrong = 0, embed_failures = 0;
    for (int i = 0; i < kTrials; ++i) {
        Rng t = Rng::from_hex("a8de7ec7").fork("trial:" + std::to_string(i));
        SignatureKey key = derive_key(hex_seed(t.fork("key")), 6);
        SignatureKey wrong = derive_key(hex_seed(t.fork("wrongkey")), 6);

        Machine host = designed_clean_host(t.fork("host"), i % 2, "host");
        InfectResult inf = infect(host, key, {7, 70}, hex_seed(t.fork("combine")), params);
        if (inf.status != InfectStatus::Infected) {
            ++embed_failures;
            continue;
        }

        if (probe_detector(inf.output->machine, key, params) == InfectStatus::AlreadyInfected)
            ++tp;
        Machine clean = designed_clean_host(t.fork("clean"), (i + 1) % 2, "clean");
        if (probe_detector(clean, key, params) == InfectStatus::AlreadyInfected) ++fp_clean;
        if (probe_detector(inf.output->machine, wrong, params) ==
            InfectStatus::AlreadyInfected)
            ++fp_wrong;
    }

    Outcome o;
    o.pass = embed_failures == 0 && tp >= 99 && fp_clean <= 1 && fp_wrong <= 1;
    o.detail = "TPR " + std::to_string(tp) + "/" + std::to_string(kTrials) + ", FPR clean " +
               std::to_string(fp_clean) + "/" + std::to_string(kTrials) + ", wrong-key " +
               std::to_string(fp_wrong) + "/" + std::to_string(kTrials);
    if (embed_failures > 0)
        o.detail += ", " + std::to_string(embed_failures) + " embeddings refused";
    return o;
}

// ---------------------------------------------------------------------------
// AC-9: every experiment, rerun with an identical config, reproduces its
// report files byte for byte — including under a different thread count.
Outcome ac9_determinism() {
    const std::vector<std::pair<std::string, std::string>> runs = {
        {"equivalence-sweep",
         "seed = \"a9000001\"\ntrials = 4\nstage_trials = 2\nexhaustive_len = 4\n"
         "sampled_inputs = 60\nsample_max_len = 10\nwindow_max = 16\n"},
        {"scan-sweep", "seed = \"a9000002\"\ninfections = 8\nclean_count = 8\n"
                       "grams = [8, 16]\nk0 = 23\n"},
        {"checker-roc", "seed = \"a9000003\"\nkeys = 6\nk0 = 23\n"},
        {"decompose-mini", "seed = \"a9000004\"\ntrials = 3\ndraws = 150\nphases = [2]\n"},
        {"leakage-demo",
         "seed = \"a9000005\"\ntrials = 6\nclean_trials = 3\nk0 = 23\n"},
    };

    size_t files = 0;
    int stable = 0;
    std::string broken;
    for (const auto& [name, text] : runs) {
        ExperimentReport a = run_experiment(name, ExperimentConfig::parse(text));
        ExperimentReport b = run_experiment(name, ExperimentConfig::parse(text));
        ExperimentReport c =
            run_experiment(name, ExperimentConfig::parse(text + "threads = 2\n"));
        files += a.files.size();
        if (a.files == b.files && a.files == c.files) {
            ++stable;
        } else if (broken.empty()) {
            broken = name;
        }
    }

    Outcome o;
    o.pass = stable == static_cast<int>(runs.size());
    o.detail = std::to_string(stable) + "/" + std::to_string(runs.size()) +
               " experiments byte-identical across rerun and 2-thread variant (" +
               std::to_string(files) + " report files)";
    if (!broken.empty()) o.detail += ", first unstable: " + broken;
    return o;
}

}  // namespace

int main() {
    std::printf("acceptance gate: 9 criteria\n");
    std::fflush(stdout);
    Gate gate;
    gate.criterion("AC-1", ac1_selection_soundness);
    gate.criterion("AC-2", ac2_stage_equivalence);
    gate.criterion("AC-3", ac3_no_static_signature);
    gate.criterion("AC-4", ac4_checker_roc);
    gate.criterion("AC-5", ac5_behavioral_delta);
    gate.criterion("AC-6", ac6_decompose_oracle);
    gate.criterion("AC-7", ac7_leakage);
    gate.criterion("AC-8", ac8_probe_detector);
    gate.criterion("AC-9", ac9_determinism);
    return gate.summary();
}
