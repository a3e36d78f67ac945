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

// Command-line front end. Links only the public C interface; all machine
// logic lives behind it.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tmark/tmark.h"

namespace {

// Exit codes: 0 ok/halted, 2 parse or validation failure, 3 budget exceeded,
// 4 stuck, 10 host already infected, 11 verdict indeterminate, 64 usage.
constexpr int kExitOk = 0;
constexpr int kExitError = 2;
constexpr int kExitBudget = 3;
constexpr int kExitStuck = 4;
constexpr int kExitAlreadyInfected = 10;
constexpr int kExitIndeterminate = 11;
constexpr int kExitUsage = 64;

struct MachineDeleter {
    void operator()(tmk_machine* m) const { tmk_machine_free(m); }
};
struct KeyDeleter {
    void operator()(tmk_key* k) const { tmk_key_free(k); }
};
struct StringDeleter {
    void operator()(char* s) const { tmk_string_free(s); }
};

using MachinePtr = std::unique_ptr<tmk_machine, MachineDeleter>;
using KeyPtr = std::unique_ptr<tmk_key, KeyDeleter>;
using CStr = std::unique_ptr<char, StringDeleter>;

// Converts a failing status into a process exit code, printing the message.
int fail(tmk_status st) {
    std::cerr << "error: " << tmk_last_error() << "\n";
    switch (st) {
        case TMK_ALREADY_INFECTED: return kExitAlreadyInfected;
        case TMK_INDETERMINATE: return kExitIndeterminate;
        default: return kExitError;
    }
}

bool ok(tmk_status st) { return st == TMK_OK; }

MachinePtr load_machine_or_exit(const std::string& path, int& code) {
    tmk_machine* raw = nullptr;
    tmk_status st = tmk_machine_load(path.c_str(), &raw);
    if (!ok(st)) {
        code = fail(st);
        return nullptr;
    }
    code = kExitOk;
    return MachinePtr(raw);
}

KeyPtr load_key_or_exit(const std::string& path, int& code) {
    tmk_key* raw = nullptr;
    tmk_status st = tmk_key_load(path.c_str(), &raw);
    if (!ok(st)) {
        code = fail(st);
        return nullptr;
    }
    code = kExitOk;
    return KeyPtr(raw);
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.flush();
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return false;
    }
    return true;
}

std::string machine_summary(const tmk_machine* m) {
    int states = 0, tracks = 0;
    long long transitions = 0;
    tmk_machine_stats(m, &states, &transitions, &tracks);
    return std::to_string(states) + " states, " + std::to_string(transitions) +
           " transitions, " + std::to_string(tracks) + " work track" +
           (tracks == 1 ? "" : "s");
}

nlohmann::ordered_json machine_stats_json(const tmk_machine* m) {
    int states = 0, tracks = 0;
    long long transitions = 0;
    tmk_machine_stats(m, &states, &transitions, &tracks);
    return {{"states", states}, {"transitions", transitions}, {"work_tracks", tracks}};
}

// ------------------------------------------------------------------- run

int cmd_run(const std::string& machine_path, const std::string& input,
            unsigned long long budget, bool json) {
    int code = 0;
    MachinePtr m = load_machine_or_exit(machine_path, code);
    if (!m) return code;

    tmk_run_status status = TMK_RUN_HALTED;
    char* output_raw = nullptr;
    unsigned long long steps = 0;
    tmk_status st = tmk_machine_run(m.get(), input.c_str(), budget, &status, &output_raw,
                                    &steps);
    if (!ok(st)) return fail(st);
    CStr output(output_raw);

    const char* status_name = status == TMK_RUN_HALTED ? "Halted"
                              : status == TMK_RUN_BUDGET_EXCEEDED ? "BudgetExceeded"
                                                                  : "Stuck";
    if (json) {
        nlohmann::ordered_json j = {
            {"status", status_name}, {"output", output.get()}, {"steps", steps}};
        std::cout << j.dump() << "\n";
    } else if (status == TMK_RUN_HALTED) {
        std::cout << output.get() << "\n";
    } else {
        std::cerr << "error: run ended with status " << status_name << " after " << steps
                  << " steps\n";
    }
    if (status == TMK_RUN_BUDGET_EXCEEDED) return kExitBudget;
    if (status == TMK_RUN_STUCK) return kExitStuck;
    return kExitOk;
}

// ---------------------------------------------------------------- keygen

int cmd_keygen(const std::string& seed, int n0, const std::string& out_path, bool json) {
    tmk_key* raw = nullptr;
    tmk_status st = tmk_key_derive(seed.c_str(), n0, &raw);
    if (!ok(st)) return fail(st);
    KeyPtr key(raw);

    if (out_path.empty()) {
        char* text = nullptr;
        st = tmk_key_write(key.get(), &text);
        if (!ok(st)) return fail(st);
        CStr guard(text);
        std::cout << text;
        return kExitOk;
    }
    st = tmk_key_save(key.get(), out_path.c_str());
    if (!ok(st)) return fail(st);
    if (json)
        std::cout << nlohmann::ordered_json({{"path", out_path}, {"n0", n0}}).dump() << "\n";
    else
        std::cout << "wrote " << out_path << " (n0=" << n0 << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------- corpus

int cmd_corpus(const std::string& seed, int count, int min_states, int max_states,
               const std::string& out_dir, bool json) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create " << out_dir << ": " << ec.message() << "\n";
        return kExitError;
    }
    for (int i = 0; i < count; ++i) {
        tmk_machine* raw = nullptr;
        tmk_status st = tmk_corpus_machine(seed.c_str(), i, min_states, max_states, &raw);
        if (!ok(st)) return fail(st);
        MachinePtr m(raw);
        std::string path =
            (std::filesystem::path(out_dir) / ("m" + std::to_string(i) + ".tm")).string();
        st = tmk_machine_save(m.get(), path.c_str());
        if (!ok(st)) return fail(st);
    }
    if (json)
        std::cout << nlohmann::ordered_json({{"dir", out_dir},
                                             {"count", count},
                                             {"min_states", min_states},
                                             {"max_states", max_states}})
                         .dump()
                  << "\n";
    else
        std::cout << "wrote " << count << " machines to " << out_dir << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- combine

int cmd_combine(const std::string& host_path, const std::string& marker_path,
                const std::string& marker_key_path, int window_min, int window_max,
                const std::string& seed, int mini_phases, const std::string& out_path,
                const std::string& record_path, bool json) {
    if (marker_path.empty() == marker_key_path.empty()) {
        std::cerr << "error: combine needs either a marker machine or --marker-key, not "
                  << (marker_path.empty() ? "neither" : "both") << "\n";
        return kExitUsage;
    }
    int code = 0;
    MachinePtr host = load_machine_or_exit(host_path, code);
    if (!host) return code;

    MachinePtr marker;
    if (!marker_path.empty()) {
        marker = load_machine_or_exit(marker_path, code);
        if (!marker) return code;
    } else {
        KeyPtr key = load_key_or_exit(marker_key_path, code);
        if (!key) return code;
        int n0 = 0;
        tmk_key_n0(key.get(), &n0);
        if (window_min <= 0) window_min = n0 + 1;
        if (window_max <= 0) window_max = 70;
        tmk_machine* raw = nullptr;
        tmk_status st = tmk_marker_build(key.get(), window_min, window_max, 0, &raw);
        if (!ok(st)) return fail(st);
        marker.reset(raw);
    }

    tmk_machine* raw = nullptr;
    char* record_raw = nullptr;
    char** record_out = record_path.empty() ? nullptr : &record_raw;
    tmk_status st =
        mini_phases > 0
            ? tmk_mini_combine(host.get(), marker.get(), mini_phases, seed.c_str(), &raw,
                               record_out)
            : tmk_combine(host.get(), marker.get(), seed.c_str(), &raw, record_out);
    if (!ok(st)) return fail(st);
    MachinePtr m(raw);
    CStr record(record_raw);

    st = tmk_machine_save(m.get(), out_path.c_str());
    if (!ok(st)) return fail(st);
    if (record && !write_file(record_path, std::string(record.get()) + "\n"))
        return kExitError;

    if (json) {
        nlohmann::ordered_json j = {{"path", out_path}, {"machine", machine_stats_json(m.get())}};
        if (!record_path.empty()) j["record"] = record_path;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "wrote " << out_path << " (" << machine_summary(m.get()) << ")\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- infect

int cmd_infect(const std::string& host_path, const std::string& key_path,
               const std::string& seed, int window_min, int window_max, int k0, double z,
               unsigned long long budget, const std::string& out_path,
               const std::string& record_path, bool json) {
    int code = 0;
    MachinePtr host = load_machine_or_exit(host_path, code);
    if (!host) return code;
    KeyPtr key = load_key_or_exit(key_path, code);
    if (!key) return code;

    int n0 = 0;
    tmk_key_n0(key.get(), &n0);
    if (window_min <= 0) window_min = n0 + 1;
    if (window_max <= 0) window_max = k0 - 1;

    tmk_machine* raw = nullptr;
    char* record_raw = nullptr;
    char** record_out = record_path.empty() ? nullptr : &record_raw;
    tmk_status st = tmk_infect(host.get(), key.get(), window_min, window_max, k0, z, budget,
                               seed.c_str(), &raw, record_out);
    if (!ok(st)) return fail(st);
    MachinePtr m(raw);
    CStr record(record_raw);

    st = tmk_machine_save(m.get(), out_path.c_str());
    if (!ok(st)) return fail(st);
    if (record && !write_file(record_path, std::string(record.get()) + "\n"))
        return kExitError;

    if (json) {
        nlohmann::ordered_json j = {{"path", out_path},
                                    {"window", {window_min, window_max}},
                                    {"machine", machine_stats_json(m.get())}};
        if (!record_path.empty()) j["record"] = record_path;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "wrote " << out_path << " (" << machine_summary(m.get()) << ")\n";
    }
    return kExitOk;
}

// ----------------------------------------------------------------- check

int cmd_check(const std::string& machine_path, const std::string& key_path, int k0, double z,
              unsigned long long budget, const std::string& probes_path) {
    int code = 0;
    MachinePtr m = load_machine_or_exit(machine_path, code);
    if (!m) return code;
    KeyPtr key = load_key_or_exit(key_path, code);
    if (!key) return code;

    int infected = 0, indeterminate = 0;
    char* verdict_raw = nullptr;
    char* probes_raw = nullptr;
    tmk_status st =
        tmk_check(m.get(), key.get(), k0, z, budget, &infected, &indeterminate, &verdict_raw,
                  probes_path.empty() ? nullptr : &probes_raw);
    if (!ok(st)) return fail(st);
    CStr verdict(verdict_raw);
    CStr probes(probes_raw);

    std::cout << verdict.get() << "\n";
    if (probes && !write_file(probes_path, std::string(probes.get()) + "\n"))
        return kExitError;
    return indeterminate != 0 ? kExitIndeterminate : kExitOk;
}

// ------------------------------------------------------------------ scan

int cmd_scan(const std::string& infected_dir, const std::string& clean_dir, int ngram) {
    char* report_raw = nullptr;
    int found = 0;
    tmk_status st =
        tmk_scan_dirs(infected_dir.c_str(), clean_dir.c_str(), ngram, &report_raw, &found);
    if (!ok(st)) return fail(st);
    CStr report(report_raw);
    std::cout << report.get() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------- decompose

int cmd_decompose(const std::string& machine_path, const std::string& host_path, int phases,
                  unsigned long long max_candidates, unsigned long long budget) {
    int code = 0;
    MachinePtr m = load_machine_or_exit(machine_path, code);
    if (!m) return code;
    MachinePtr host = load_machine_or_exit(host_path, code);
    if (!host) return code;

    char* report_raw = nullptr;
    tmk_status st =
        tmk_decompose_mini(m.get(), host.get(), phases, max_candidates, budget, &report_raw);
    if (!ok(st)) return fail(st);
    CStr report(report_raw);
    std::cout << report.get() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ experiment

int cmd_experiment(const std::string& name, const std::string& config_path,
                   const std::string& out_dir, bool list) {
    if (list) {
        char* names_raw = nullptr;
        tmk_status st = tmk_experiment_list(&names_raw);
        if (!ok(st)) return fail(st);
        CStr names(names_raw);
        std::string csv(names.get());
        size_t start = 0;
        while (start <= csv.size()) {
            size_t comma = csv.find(',', start);
            std::cout << csv.substr(start, comma == std::string::npos ? comma : comma - start)
                      << "\n";
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return kExitOk;
    }
    if (name.empty() || config_path.empty()) {
        std::cerr << "error: experiment needs a name and --config (or --list)\n";
        return kExitUsage;
    }
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read " << config_path << "\n";
        return kExitError;
    }
    std::string config((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    char* summary_raw = nullptr;
    int pass = 0;
    tmk_status st = tmk_experiment_run(name.c_str(), config.c_str(),
                                       out_dir.empty() ? nullptr : out_dir.c_str(),
                                       &summary_raw, &pass);
    if (!ok(st)) return fail(st);
    CStr summary(summary_raw);
    std::cout << summary.get();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Turing-machine toolkit: keyed markers, behavior-preserving combination, "
                 "infection checking and analysis experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tmk_version()));

    // run
    std::string run_machine, run_input;
    unsigned long long run_budget = 1000000;
    bool run_json = false;
    CLI::App* run = app.add_subcommand("run", "Run a machine on an input string");
    run->add_option("machine", run_machine, "machine file (.tm)")->required();
    run->add_option("--input", run_input, "binary input string (default empty)");
    run->add_option("--budget", run_budget, "step budget")->capture_default_str();
    run->add_flag("--json", run_json, "machine-readable output");

    // keygen
    std::string kg_seed, kg_out;
    int kg_n0 = 6;
    bool kg_json = false;
    CLI::App* keygen = app.add_subcommand("keygen", "Derive a key from a hex seed");
    keygen->add_option("--seed", kg_seed, "even-length hex seed")->required();
    keygen->add_option("--n0", kg_n0, "empty-below length threshold")->capture_default_str();
    keygen->add_option("--out", kg_out, "key file to write (default: print to stdout)");
    keygen->add_flag("--json", kg_json, "machine-readable output");

    // corpus
    std::string cp_seed, cp_dir;
    int cp_count = 50, cp_min = 2, cp_max = 6;
    bool cp_json = false;
    CLI::App* corpus = app.add_subcommand("corpus", "Generate a seeded corpus of host machines");
    corpus->add_option("--seed", cp_seed, "even-length hex seed")->required();
    corpus->add_option("--count", cp_count, "number of machines")->capture_default_str();
    corpus->add_option("--min-states", cp_min, "minimum automaton states")->capture_default_str();
    corpus->add_option("--max-states", cp_max, "maximum automaton states")->capture_default_str();
    corpus->add_option("--out-dir", cp_dir, "output directory")->required();
    corpus->add_flag("--json", cp_json, "machine-readable output");

    // combine
    std::string cb_host, cb_marker, cb_marker_key, cb_seed, cb_out, cb_record;
    int cb_mini = 0, cb_wmin = 0, cb_wmax = 0;
    bool cb_json = false;
    CLI::App* combine =
        app.add_subcommand("combine", "Combine two scanner machines into one");
    combine->add_option("host", cb_host, "host machine file")->required();
    combine->add_option("marker", cb_marker, "second machine file");
    combine->add_option("--marker-key", cb_marker_key,
                        "build the second machine as this key's marker");
    combine->add_option("--window-min", cb_wmin,
                        "marker window lower length with --marker-key (default n0+1)");
    combine->add_option("--window-max", cb_wmax,
                        "marker window upper length with --marker-key (default 70)");
    combine->add_option("--seed", cb_seed, "even-length hex seed")->required();
    combine->add_option("--mini", cb_mini,
                        "reduced layout with this many phases (brute-force demos)");
    combine->add_option("--out", cb_out, "output machine file")->required();
    combine->add_option("--record", cb_record, "write the audit record JSON here");
    combine->add_flag("--json", cb_json, "machine-readable output");

    // infect
    std::string in_host, in_key, in_seed, in_out, in_record;
    int in_wmin = 0, in_wmax = 0, in_k0 = 71;
    double in_z = 3.0;
    unsigned long long in_budget = 1000000;
    bool in_json = false;
    CLI::App* infect = app.add_subcommand(
        "infect", "Embed a key's marker into a host (refuses already-infected hosts)");
    infect->add_option("host", in_host, "host machine file")->required();
    infect->add_option("--key", in_key, "key file")->required();
    infect->add_option("--seed", in_seed, "even-length hex seed")->required();
    infect->add_option("--window-min", in_wmin, "marker window lower length (default n0+1)");
    infect->add_option("--window-max", in_wmax, "marker window upper length (default k0-1)");
    infect->add_option("--k0", in_k0, "checker probe lengths run up to k0-1")->capture_default_str();
    infect->add_option("--z", in_z, "band half-width in standard deviations")->capture_default_str();
    infect->add_option("--budget", in_budget, "per-probe step budget")->capture_default_str();
    infect->add_option("--out", in_out, "output machine file")->required();
    infect->add_option("--record", in_record, "write the audit record JSON here");
    infect->add_flag("--json", in_json, "machine-readable output");

    // check
    std::string ck_machine, ck_key, ck_probes;
    int ck_k0 = 71;
    double ck_z = 3.0;
    unsigned long long ck_budget = 1000000;
    CLI::App* check = app.add_subcommand("check", "Statistical infection check");
    check->add_option("machine", ck_machine, "machine file")->required();
    check->add_option("--key", ck_key, "key file")->required();
    check->add_option("--k0", ck_k0, "probe lengths run up to k0-1")->capture_default_str();
    check->add_option("--z", ck_z, "band half-width in standard deviations")->capture_default_str();
    check->add_option("--budget", ck_budget, "per-probe step budget")->capture_default_str();
    check->add_option("--probes", ck_probes, "write the probe-by-probe trace JSON here");

    // scan
    std::string sc_infected, sc_clean;
    int sc_n = 16;
    CLI::App* scan =
        app.add_subcommand("scan", "Byte-level n-gram scan of serialized machines");
    scan->add_option("--infected-dir", sc_infected, "directory of infected .tm files")
        ->required();
    scan->add_option("--clean-dir", sc_clean, "directory of clean .tm files")->required();
    scan->add_option("--ngram", sc_n, "n-gram length in bytes")->capture_default_str();

    // decompose
    std::string dc_machine, dc_host;
    int dc_phases = 2;
    unsigned long long dc_max = 0, dc_budget = 1000000;
    CLI::App* decompose = app.add_subcommand(
        "decompose", "Brute-force the tuple encoding of a reduced-layout combination");
    decompose->add_option("machine", dc_machine, "combined machine file")->required();
    decompose->add_option("host", dc_host, "host machine file")->required();
    decompose->add_option("--phases", dc_phases, "reduced-layout phase count")->capture_default_str();
    decompose->add_option("--max-candidates", dc_max,
                          "refuse above this many bijections (0: default cap)");
    decompose->add_option("--budget", dc_budget, "per-run step budget")->capture_default_str();

    // experiment
    std::string ex_name, ex_config, ex_dir;
    bool ex_list = false;
    CLI::App* experiment = app.add_subcommand("experiment", "Run a batch experiment");
    experiment->add_option("name", ex_name, "experiment name");
    experiment->add_option("--config", ex_config, "flat key=value config file");
    experiment->add_option("--out-dir", ex_dir, "directory for CSV/JSON report files");
    experiment->add_flag("--list", ex_list, "list experiment names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (run->parsed()) return cmd_run(run_machine, run_input, run_budget, run_json);
    if (keygen->parsed()) return cmd_keygen(kg_seed, kg_n0, kg_out, kg_json);
    if (corpus->parsed())
        return cmd_corpus(cp_seed, cp_count, cp_min, cp_max, cp_dir, cp_json);
    if (combine->parsed())
        return cmd_combine(cb_host, cb_marker, cb_marker_key, cb_wmin, cb_wmax, cb_seed,
                           cb_mini, cb_out, cb_record, cb_json);
    if (infect->parsed())
        return cmd_infect(in_host, in_key, in_seed, in_wmin, in_wmax, in_k0, in_z, in_budget,
                          in_out, in_record, in_json);
    if (check->parsed())
        return cmd_check(ck_machine, ck_key, ck_k0, ck_z, ck_budget, ck_probes);
    if (scan->parsed()) return cmd_scan(sc_infected, sc_clean, sc_n);
    if (decompose->parsed())
        return cmd_decompose(dc_machine, dc_host, dc_phases, dc_max, dc_budget);
    if (experiment->parsed()) return cmd_experiment(ex_name, ex_config, ex_dir, ex_list);
    return kExitUsage;
}
