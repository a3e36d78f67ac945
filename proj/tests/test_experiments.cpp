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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "core/experiments.hpp"
#include "core/util.hpp"

using namespace tmark;
namespace fs = std::filesystem;

namespace {

ExperimentConfig with(std::map<std::string, std::string> kv) {
    ExperimentConfig cfg;
    cfg.values = std::move(kv);
    return cfg;
}

}  // namespace

TEST_CASE("config parser: scalars, strings, lists and comments") {
    ExperimentConfig cfg = ExperimentConfig::parse(
        "# run parameters\n"
        "seed = 'abcd'   # master seed\n"
        "trials = 20\n"
        "z = 2.5\n"
        "grams = [8, 16, 32]\n"
        "label = 'has # inside'\n"
        "\n"
        "flag = true\n");
    CHECK(cfg.require_str("seed") == "abcd");
    CHECK(cfg.get_int("trials", 0) == 20);
    CHECK(cfg.get_double("z", 0.0) == 2.5);
    CHECK(cfg.get_int_list("grams", {}) == std::vector<int>{8, 16, 32});
    CHECK(cfg.get_str("label", "") == "has # inside");
    CHECK(cfg.get_str("flag", "") == "true");
    CHECK(cfg.get_int("absent", 7) == 7);
    CHECK(cfg.get_double("absent", 1.5) == 1.5);
    CHECK(cfg.get_int_list("absent", {1, 2}) == std::vector<int>{1, 2});
    CHECK(cfg.has("seed"));
    CHECK_FALSE(cfg.has("absent"));
}

TEST_CASE("config parser: malformed input is rejected") {
    CHECK_THROWS_AS(ExperimentConfig::parse("[section]\nseed = 'x'\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse("a = 1\na = 2\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse("just a line\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse("a = one two\n"), ParseError);
    CHECK_THROWS_AS(ExperimentConfig::parse("a = 'unterminated\n"), ParseError);
}

TEST_CASE("config accessors validate their conversions") {
    ExperimentConfig cfg = with({{"n", "12x"}, {"f", "1.2.3"}, {"l", "1,x"}});
    CHECK_THROWS_AS(cfg.get_int("n", 0), ArgError);
    CHECK_THROWS_AS(cfg.get_double("f", 0.0), ArgError);
    CHECK_THROWS_AS(cfg.get_int_list("l", {}), ArgError);
    CHECK_THROWS_AS(cfg.require_str("missing"), ArgError);
}

TEST_CASE("experiment registry") {
    std::vector<std::string> names = experiment_names();
    REQUIRE(names.size() == 5);
    CHECK(names[0] == "equivalence-sweep");
    CHECK(names[1] == "scan-sweep");
    CHECK(names[2] == "checker-roc");
    CHECK(names[3] == "decompose-mini");
    CHECK(names[4] == "leakage-demo");
    CHECK_THROWS_AS(run_experiment("no-such-thing", with({{"seed", "00"}})), ArgError);
    CHECK_THROWS_AS(run_experiment("scan-sweep", with({})), ArgError);  // seed required
}

TEST_CASE("equivalence sweep: reduced run passes and reports per-trial rows") {
    ExperimentConfig cfg = with({{"seed", "e0e1"},
                                 {"trials", "2"},
                                 {"stage_trials", "1"},
                                 {"exhaustive_len", "3"},
                                 {"sampled_inputs", "5"},
                                 {"sample_max_len", "5"},
                                 {"n0", "2"},
                                 {"window_max", "8"}});
    ExperimentReport rep = run_experiment("equivalence-sweep", cfg);
    CHECK(rep.name == "equivalence-sweep");
    CHECK(rep.pass);
    CHECK(rep.summary["experiment"] == "equivalence-sweep");
    CHECK(rep.summary["pass"] == true);
    REQUIRE(rep.files.count("equivalence-sweep.csv") == 1);
    REQUIRE(rep.files.count("equivalence-sweep-summary.json") == 1);
    // Header plus one row per trial.
    const std::string& csv = rep.files.at("equivalence-sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("scan sweep: reduced run passes with no shared gram") {
    ExperimentConfig cfg = with({{"seed", "5ca0"},
                                 {"infections", "3"},
                                 {"n0", "2"},
                                 {"k0", "23"},
                                 {"window_max", "22"},
                                 {"grams", "8"},
                                 {"clean_count", "3"}});
    ExperimentReport rep = run_experiment("scan-sweep", cfg);
    CHECK(rep.pass);
    CHECK(rep.summary["pass"] == true);
    CHECK(rep.files.count("scan-sweep.csv") == 1);
    CHECK(rep.files.count("scan-sweep-instances.csv") == 1);
}

TEST_CASE("checker roc: reduced run passes") {
    ExperimentConfig cfg = with({{"seed", "0c00"},
                                 {"keys", "3"},
                                 {"n0", "2"},
                                 {"k0", "23"},
                                 {"window_max", "22"},
                                 {"host_min_states", "2"},
                                 {"host_max_states", "4"}});
    ExperimentReport rep = run_experiment("checker-roc", cfg);
    CHECK(rep.pass);
    CHECK(rep.files.count("checker-roc.csv") == 1);
}

TEST_CASE("decompose mini: reduced run passes") {
    ExperimentConfig cfg = with({{"seed", "dec0"},
                                 {"trials", "2"},
                                 {"draws", "200"},
                                 {"phases", "2"},
                                 {"n0", "2"},
                                 {"window_max", "6"},
                                 {"host_max_states", "3"}});
    ExperimentReport rep = run_experiment("decompose-mini", cfg);
    CHECK(rep.pass);
    CHECK(rep.files.count("decompose-mini.csv") == 1);
}

TEST_CASE("leakage demo: reduced run passes") {
    ExperimentConfig cfg = with({{"seed", "1eac"},
                                 {"trials", "3"},
                                 {"clean_trials", "2"},
                                 {"n0", "2"},
                                 {"k0", "23"},
                                 {"window_max", "22"}});
    ExperimentReport rep = run_experiment("leakage-demo", cfg);
    CHECK(rep.pass);
    CHECK(rep.files.count("leakage-demo.csv") == 1);
}

TEST_CASE("experiments are deterministic across reruns and thread counts") {
    ExperimentConfig cfg = with({{"seed", "d00d"},
                                 {"keys", "2"},
                                 {"n0", "2"},
                                 {"k0", "23"},
                                 {"window_max", "22"},
                                 {"threads", "1"}});
    ExperimentReport a = run_experiment("checker-roc", cfg);
    ExperimentReport b = run_experiment("checker-roc", cfg);
    CHECK(a.files == b.files);

    cfg.values["threads"] = "3";
    ExperimentReport c = run_experiment("checker-roc", cfg);
    CHECK(a.files == c.files);
    CHECK(a.summary.dump() == c.summary.dump());
}

TEST_CASE("write_report materializes every file") {
    ExperimentConfig cfg = with({{"seed", "ae10"},
                                 {"trials", "1"},
                                 {"draws", "50"},
                                 {"phases", "2"},
                                 {"n0", "2"},
                                 {"window_max", "6"},
                                 {"host_max_states", "3"}});
    ExperimentReport rep = run_experiment("decompose-mini", cfg);

    fs::path dir = fs::temp_directory_path() / "tmark-report-test";
    fs::remove_all(dir);
    write_report(rep, dir.string());
    for (const auto& [name, contents] : rep.files) {
        std::ifstream in(dir / name, std::ios::binary);
        REQUIRE(in.good());
        std::string got((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        CHECK(got == contents);
    }
    fs::remove_all(dir);
}

TEST_CASE("config file loader") {
    fs::path p = fs::temp_directory_path() / "tmark-config-test.cfg";
    {
        std::ofstream out(p);
        out << "seed = 'abab'\ntrials = 4\n";
    }
    ExperimentConfig cfg = ExperimentConfig::load(p.string());
    CHECK(cfg.require_str("seed") == "abab");
    CHECK(cfg.get_int("trials", 0) == 4);
    fs::remove(p);
    CHECK_THROWS_AS(ExperimentConfig::load(p.string()), IoError);
}
