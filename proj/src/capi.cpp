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

#include "tmark/tmark.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/analysis.hpp"
#include "core/combiner.hpp"
#include "core/dfa.hpp"
#include "core/experiments.hpp"
#include "core/infection.hpp"
#include "core/machine.hpp"
#include "core/machine_io.hpp"
#include "core/signature.hpp"
#include "core/util.hpp"

struct tmk_machine {
    tmark::Machine m;
};

struct tmk_key {
    tmark::SignatureKey k;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
tmk_status guarded(F&& fn) {
    try {
        return fn();
    } catch (const tmark::ParseError& e) {
        g_last_error = e.what();
        return TMK_ERR_PARSE;
    } catch (const tmark::ValidationError& e) {
        g_last_error = e.what();
        return TMK_ERR_VALIDATE;
    } catch (const tmark::ArgError& e) {
        g_last_error = e.what();
        return TMK_ERR_ARG;
    } catch (const tmark::IoError& e) {
        g_last_error = e.what();
        return TMK_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TMK_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return TMK_ERR_INTERNAL;
    }
}

tmk_status fail_arg(const char* msg) {
    g_last_error = msg;
    return TMK_ERR_ARG;
}

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p != nullptr) std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

std::string u64_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[v & 15];
        v >>= 4;
    }
    return out;
}

void require_binary(const char* x) {
    for (const char* p = x; *p != '\0'; ++p)
        if (*p != '0' && *p != '1')
            throw tmark::ArgError("input must contain only '0' and '1'");
}

nlohmann::ordered_json record_json(const tmark::CombinationRecord& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed_hex;
    j["work_tracks"] = r.k;
    j["layout_tracks"] = r.t;
    j["host_hash"] = u64_hex(r.host_hash);
    j["marker_hash"] = u64_hex(r.marker_hash);
    j["product_hash"] = u64_hex(r.ma_hash);
    j["layout_hash"] = u64_hex(r.mb_hash);
    j["machine_hash"] = u64_hex(r.m_hash);
    j["support"] = r.permutation.support;
    j["map"] = r.permutation.map;
    j["opaque_of"] = r.opaque_of;
    j["mini"] = r.mini;
    if (r.mini) j["mini_phases"] = r.mini_phases;
    return j;
}

nlohmann::ordered_json verdict_json(const tmark::Verdict& v) {
    nlohmann::ordered_json j;
    j["trials"] = v.trials;
    j["hits"] = v.hits;
    j["timeouts"] = v.timeouts;
    j["band"] = {v.band_lo, v.band_hi};
    j["infected"] = v.infected;
    return j;
}

nlohmann::ordered_json probes_json(const tmark::Verdict& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const tmark::ProbeResult& p : v.probes)
        arr.push_back({{"n", p.n},
                       {"input", p.input},
                       {"status", p.status},
                       {"output", p.output},
                       {"hit", p.hit}});
    return arr;
}

std::vector<std::vector<uint8_t>> load_dir_bytes(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw tmark::IoError("not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".tm")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    std::vector<std::vector<uint8_t>> out;
    out.reserve(paths.size());
    for (const std::string& p : paths)
        out.push_back(tmark::canonical_bytes(tmark::load_machine(p)));
    return out;
}

}  // namespace

extern "C" {

const char* tmk_version(void) { return "1.0.0"; }

const char* tmk_last_error(void) { return g_last_error.c_str(); }

void tmk_string_free(char* s) { std::free(s); }

/* -------------------------------------------------------------- machines */

tmk_status tmk_machine_parse(const char* text, const char* name, tmk_machine** out) {
    if (text == nullptr || out == nullptr) return fail_arg("null argument");
    return guarded([&] {
        auto m = std::make_unique<tmk_machine>();
        m->m = tmark::parse_tm(text, name != nullptr ? name : "machine");
        *out = m.release();
        return TMK_OK;
    });
}

tmk_status tmk_machine_load(const char* path, tmk_machine** out) {
    if (path == nullptr || out == nullptr) return fail_arg("null argument");
    return guarded([&] {
        auto m = std::make_unique<tmk_machine>();
        m->m = tmark::load_machine(path);
        *out = m.release();
        return TMK_OK;
    });
}

tmk_status tmk_machine_save(const tmk_machine* m, const char* path) {
    if (m == nullptr || path == nullptr) return fail_arg("null argument");
    return guarded([&] {
        tmark::save_machine(m->m, path);
        return TMK_OK;
    });
}

tmk_status tmk_machine_write(const tmk_machine* m, char** out_text) {
    if (m == nullptr || out_text == nullptr) return fail_arg("null argument");
    return guarded([&] {
        *out_text = dup_string(tmark::write_tm(m->m));
        return TMK_OK;
    });
}

void tmk_machine_free(tmk_machine* m) { delete m; }

tmk_status tmk_machine_stats(const tmk_machine* m, int* out_states, long long* out_transitions,
                             int* out_work_tracks) {
    if (m == nullptr) return fail_arg("null machine");
    if (out_states != nullptr) *out_states = m->m.state_count();
    if (out_transitions != nullptr)
        *out_transitions = static_cast<long long>(m->m.transitions.size());
    if (out_work_tracks != nullptr) {
        int k = 0;
        for (const tmark::TapeDecl& t : m->m.tapes)
            if (t.role == tmark::TapeRole::Work) k += t.tracks;
        *out_work_tracks = k;
    }
    return TMK_OK;
}

tmk_status tmk_machine_run(const tmk_machine* m, const char* input, unsigned long long budget,
                           tmk_run_status* out_status, char** out_output,
                           unsigned long long* out_steps) {
    if (m == nullptr || input == nullptr || out_status == nullptr)
        return fail_arg("null argument");
    return guarded([&] {
        require_binary(input);
        tmark::RunOutcome o = tmark::run(m->m, input, budget);
        *out_status = o.status == tmark::RunStatus::Halted ? TMK_RUN_HALTED
                      : o.status == tmark::RunStatus::BudgetExceeded
                          ? TMK_RUN_BUDGET_EXCEEDED
                          : TMK_RUN_STUCK;
        if (out_output != nullptr) *out_output = dup_string(o.output);
        if (out_steps != nullptr) *out_steps = o.steps;
        return TMK_OK;
    });
}

/* ------------------------------------------------------------------ keys */

tmk_status tmk_key_derive(const char* seed_hex, int n0, tmk_key** out) {
    if (seed_hex == nullptr || out == nullptr) return fail_arg("null argument");
    return guarded([&] {
        auto k = std::make_unique<tmk_key>();
        k->k = tmark::derive_key(seed_hex, n0);
        *out = k.release();
        return TMK_OK;
    });
}

tmk_status tmk_key_load(const char* path, tmk_key** out) {
    if (path == nullptr || out == nullptr) return fail_arg("null argument");
    return guarded([&] {
        auto k = std::make_unique<tmk_key>();
        k->k = tmark::load_key(path);
        *out = k.release();
        return TMK_OK;
    });
}

tmk_status tmk_key_save(const tmk_key* key, const char* path) {
    if (key == nullptr || path == nullptr) return fail_arg("null argument");
    return guarded([&] {
        tmark::save_key(key->k, path);
        return TMK_OK;
    });
}

tmk_status tmk_key_write(const tmk_key* key, char** out_text) {
    if (key == nullptr || out_text == nullptr) return fail_arg("null argument");
    return guarded([&] {
        *out_text = dup_string(tmark::write_key(key->k));
        return TMK_OK;
    });
}

void tmk_key_free(tmk_key* key) { delete key; }

tmk_status tmk_key_n0(const tmk_key* key, int* out_n0) {
    if (key == nullptr || out_n0 == nullptr) return fail_arg("null argument");
    *out_n0 = key->k.n0;
    return TMK_OK;
}

tmk_status tmk_key_element_at(const tmk_key* key, int n, char** out_element) {
    if (key == nullptr || out_element == nullptr) return fail_arg("null argument");
    return guarded([&] {
        if (n <= 0) throw tmark::ArgError("element length must be positive");
        *out_element = dup_string(tmark::element_at(key->k, static_cast<uint64_t>(n)));
        return TMK_OK;
    });
}

tmk_status tmk_key_member(const tmk_key* key, const char* x, int* out_member) {
    if (key == nullptr || x == nullptr || out_member == nullptr)
        return fail_arg("null argument");
    return guarded([&] {
        *out_member = tmark::member(key->k, x) ? 1 : 0;
        return TMK_OK;
    });
}

tmk_status tmk_key_response_bit(const tmk_key* key, const char* x, int* out_bit) {
    if (key == nullptr || x == nullptr || out_bit == nullptr) return fail_arg("null argument");
    return guarded([&] {
        *out_bit = tmark::response_bit(key->k, x);
        return TMK_OK;
    });
}

/* ---------------------------------------------------------------- corpus */

tmk_status tmk_corpus_machine(const char* seed_hex, int index, int min_states, int max_states,
                              tmk_machine** out) {
    if (seed_hex == nullptr || out == nullptr) return fail_arg("null argument");
    return guarded([&] {
        if (index < 0) throw tmark::ArgError("corpus index must be >= 0");
        tmark::Rng rng =
            tmark::Rng::from_hex(seed_hex).fork("corpus:" + std::to_string(index));
        tmark::Dfa d = tmark::random_dfa(rng, min_states, max_states);
        auto m = std::make_unique<tmk_machine>();
        m->m = tmark::compile_dfa(d, "m" + std::to_string(index));
        *out = m.release();
        return TMK_OK;
    });
}

/* ------------------------------------------------- combination/infection */

tmk_status tmk_marker_build(const tmk_key* key, int n_min, int n_max, int state_cap,
                            tmk_machine** out) {
    if (key == nullptr || out == nullptr) return fail_arg("null argument");
    return guarded([&] {
        auto m = std::make_unique<tmk_machine>();
        tmark::MarkerWindow w{n_min, n_max};
        m->m = state_cap > 0 ? tmark::build_marker(key->k, w, state_cap)
                             : tmark::build_marker(key->k, w);
        *out = m.release();
        return TMK_OK;
    });
}

tmk_status tmk_combine(const tmk_machine* host, const tmk_machine* marker,
                       const char* seed_hex, tmk_machine** out, char** out_record_json) {
    if (host == nullptr || marker == nullptr || seed_hex == nullptr || out == nullptr)
        return fail_arg("null argument");
    return guarded([&] {
        tmark::CombineOutput co = tmark::combine(host->m, marker->m, seed_hex);
        auto m = std::make_unique<tmk_machine>();
        m->m = std::move(co.machine);
        if (out_record_json != nullptr)
            *out_record_json = dup_string(record_json(co.record).dump(2));
        *out = m.release();
        return TMK_OK;
    });
}

tmk_status tmk_mini_combine(const tmk_machine* host, const tmk_machine* marker, int phases,
                            const char* seed_hex, tmk_machine** out, char** out_record_json) {
    if (host == nullptr || marker == nullptr || seed_hex == nullptr || out == nullptr)
        return fail_arg("null argument");
    return guarded([&] {
        tmark::CombineOutput co = tmark::mini_combine(host->m, marker->m, phases, seed_hex);
        auto m = std::make_unique<tmk_machine>();
        m->m = std::move(co.machine);
        if (out_record_json != nullptr)
            *out_record_json = dup_string(record_json(co.record).dump(2));
        *out = m.release();
        return TMK_OK;
    });
}

tmk_status tmk_infect(const tmk_machine* host, const tmk_key* key, int n_min, int n_max,
                      int k0, double z, unsigned long long budget, const char* seed_hex,
                      tmk_machine** out, char** out_record_json) {
    if (host == nullptr || key == nullptr || seed_hex == nullptr || out == nullptr)
        return fail_arg("null argument");
    return guarded([&] {
        tmark::CheckParams params{key->k.n0, k0, budget, z};
        tmark::InfectResult res =
            tmark::infect(host->m, key->k, tmark::MarkerWindow{n_min, n_max}, seed_hex,
                          params);
        if (res.status == tmark::InfectStatus::AlreadyInfected) {
            g_last_error = "host already checks infected: " +
                           std::to_string(res.guard.hits) + "/" +
                           std::to_string(res.guard.trials) + " probe hits inside band [" +
                           std::to_string(res.guard.band_lo) + ", " +
                           std::to_string(res.guard.band_hi) + "]";
            return TMK_ALREADY_INFECTED;
        }
        if (res.status == tmark::InfectStatus::Indeterminate) {
            g_last_error = "infection check indeterminate: every probe exceeded the budget";
            return TMK_INDETERMINATE;
        }
        auto m = std::make_unique<tmk_machine>();
        m->m = std::move(res.output->machine);
        if (out_record_json != nullptr)
            *out_record_json = dup_string(record_json(res.output->record).dump(2));
        *out = m.release();
        return TMK_OK;
    });
}

tmk_status tmk_check(const tmk_machine* m, const tmk_key* key, int k0, double z,
                     unsigned long long budget, int* out_infected, int* out_indeterminate,
                     char** out_verdict_json, char** out_probes_json) {
    if (m == nullptr || key == nullptr) return fail_arg("null argument");
    return guarded([&] {
        tmark::CheckParams params{key->k.n0, k0, budget, z};
        tmark::Verdict v = tmark::check_infected(m->m, key->k, params);
        if (out_infected != nullptr) *out_infected = v.infected ? 1 : 0;
        if (out_indeterminate != nullptr) *out_indeterminate = v.indeterminate ? 1 : 0;
        if (out_verdict_json != nullptr)
            *out_verdict_json = dup_string(verdict_json(v).dump());
        if (out_probes_json != nullptr)
            *out_probes_json = dup_string(probes_json(v).dump(2));
        return TMK_OK;
    });
}

/* -------------------------------------------------------------- analysis */

tmk_status tmk_scan_dirs(const char* infected_dir, const char* clean_dir, int n,
                         char** out_report_json, int* out_found) {
    if (infected_dir == nullptr || clean_dir == nullptr) return fail_arg("null argument");
    return guarded([&] {
        std::vector<std::vector<uint8_t>> infected = load_dir_bytes(infected_dir);
        std::vector<std::vector<uint8_t>> clean = load_dir_bytes(clean_dir);
        tmark::ScanReport r = tmark::static_scan(infected, clean, n);
        if (out_found != nullptr) *out_found = r.signature_found ? 1 : 0;
        if (out_report_json != nullptr) {
            nlohmann::ordered_json j;
            j["n"] = r.n;
            j["infected_count"] = r.infected_count;
            j["clean_count"] = r.clean_count;
            j["common_to_all_infected"] = r.common_count;
            j["also_in_clean"] = r.also_in_clean_count;
            j["signature_count"] = r.signature_count;
            j["signature_found"] = r.signature_found;
            j["signature_grams_hex"] = r.signature_grams_hex;
            *out_report_json = dup_string(j.dump(2));
        }
        return TMK_OK;
    });
}

tmk_status tmk_decompose_mini(const tmk_machine* m, const tmk_machine* host, int phases,
                              unsigned long long max_candidates, unsigned long long budget,
                              char** out_report_json) {
    if (m == nullptr || host == nullptr) return fail_arg("null argument");
    return guarded([&] {
        if (phases < 1 || phases > 4)
            throw tmark::ArgError("phases must be between 1 and 4");
        std::vector<std::string> support;
        for (int ph = 0; ph < phases; ++ph)
            for (int bit = 0; bit < 2; ++bit) support.push_back(tmark::mini_symbol(bit, ph));
        std::sort(support.begin(), support.end());
        tmark::DecomposeOptions opts;
        if (max_candidates > 0) opts.max_candidates = max_candidates;
        if (budget > 0) opts.budget = budget;
        tmark::DecompositionResult r =
            tmark::decompose_bruteforce(m->m, host->m, support, opts);
        if (r.refused) {
            g_last_error = r.refusal_reason;
            return TMK_REFUSED;
        }
        if (out_report_json != nullptr) {
            nlohmann::ordered_json j;
            j["support"] = support;
            j["required_candidates"] = r.required_candidates;
            j["candidates_tried"] = r.candidates_tried;
            j["consistent_count"] = r.consistent.size();
            j["consistent"] = r.consistent;
            nlohmann::ordered_json beh = nlohmann::ordered_json::array();
            for (const auto& [input, answer] : r.recovered_m2_behavior)
                beh.push_back({{"input", input}, {"answer", answer}});
            j["recovered_marker_behavior"] = beh;
            *out_report_json = dup_string(j.dump(2));
        }
        return TMK_OK;
    });
}

/* ----------------------------------------------------------- experiments */

tmk_status tmk_experiment_list(char** out_names_csv) {
    if (out_names_csv == nullptr) return fail_arg("null argument");
    return guarded([&] {
        std::string joined;
        for (const std::string& name : tmark::experiment_names()) {
            if (!joined.empty()) joined += ',';
            joined += name;
        }
        *out_names_csv = dup_string(joined);
        return TMK_OK;
    });
}

tmk_status tmk_experiment_run(const char* name, const char* config_text, const char* out_dir,
                              char** out_summary_json, int* out_pass) {
    if (name == nullptr || config_text == nullptr) return fail_arg("null argument");
    return guarded([&] {
        tmark::ExperimentConfig cfg = tmark::ExperimentConfig::parse(config_text);
        tmark::ExperimentReport rep = tmark::run_experiment(name, cfg);
        if (out_dir != nullptr) tmark::write_report(rep, out_dir);
        if (out_summary_json != nullptr)
            *out_summary_json = dup_string(rep.summary.dump(2) + "\n");
        if (out_pass != nullptr) *out_pass = rep.pass ? 1 : 0;
        return TMK_OK;
    });
}

} /* extern "C" */
