// Command-line front end for the resiot shared library. All functionality
// goes through the C API in resiot.h; this file only parses arguments and
// presents results.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "resiot.h"

namespace {

// 0 success, 1 expectation mismatch, 2 usage/IO/validation failures.
int exit_code_for(resiot_status status) {
    if (status == RESIOT_OK) return 0;
    if (status == RESIOT_ERR_EXPECTATION) return 1;
    return 2;
}

int finish(resiot_status status) {
    if (status != RESIOT_OK) std::cerr << "error: " << resiot_last_error() << "\n";
    return exit_code_for(status);
}

void print_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return;
    std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"edge-offloaded security functions: keys, protocol scenarios, cost model, "
                 "queue experiments"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags like --timings may follow the subcommand

    std::string timings = "paper";
    app.add_option("--timings", timings,
                   "timing source: paper, host, or a timings JSON file path")
        ->capture_default_str();

    // keygen
    auto* keygen = app.add_subcommand("keygen", "generate and serialize key material");
    std::string kind;
    keygen->add_option("kind", kind, "group | abe")->required();
    uint32_t members = 3;
    uint32_t universe = 4;
    std::vector<std::string> policies;
    uint64_t kg_seed = 0;
    std::string kg_out = "out";
    keygen->add_option("--members", members, "group member count")->capture_default_str();
    keygen->add_option("--universe", universe, "abe attribute universe size")
        ->capture_default_str();
    keygen->add_option("--policy", policies,
                       "abe policy string (repeatable), e.g. \"thresh(2, 0, 1, 2)\"");
    keygen->add_option("--seed", kg_seed, "deterministic seed")->required();
    keygen->add_option("--out", kg_out, "output directory")->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "execute a protocol scenario file");
    std::string scenario_path;
    std::string run_out = "out";
    uint64_t run_seed = 0;
    bool run_seed_set = false;
    run->add_option("scenario", scenario_path, "scenario JSON file (// comments allowed)")
        ->required();
    run->add_option("--out", run_out, "output directory")->capture_default_str();
    run->add_option("--seed", run_seed, "override the scenario seed")
        ->each([&](const std::string&) { run_seed_set = true; });

    // cost-table
    auto* cost = app.add_subcommand("cost-table", "emit the SF/RSF cost table");
    std::string cost_out = "out";
    cost->add_option("--out", cost_out, "output directory")->capture_default_str();

    // queue-sweep
    auto* sweep = app.add_subcommand("queue-sweep", "FCFS queue-with-deadline parameter sweep");
    std::string grid = "ck=0.1:1.0:0.1;texp=2x,5x,10x";
    uint64_t sweep_seed = 0;
    uint64_t requests = 100000;
    std::string sweep_out = "out";
    sweep->add_option("--grid", grid, "grid spec: ck=...;texp=...[;service=ms]")
        ->capture_default_str();
    sweep->add_option("--seed", sweep_seed, "deterministic seed")->required();
    sweep->add_option("--requests", requests, "requests per grid point")->capture_default_str();
    sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();

    // microbench
    auto* bench = app.add_subcommand("microbench", "measure this host's primitive timings");
    int repetitions = 9;
    uint64_t bench_seed = 1;
    std::string bench_out = "out";
    bench->add_option("--repetitions", repetitions, "samples per primitive (median)")
        ->capture_default_str();
    bench->add_option("--seed", bench_seed, "deterministic seed")->capture_default_str();
    bench->add_option("--out", bench_out, "output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (keygen->parsed()) {
        if (kind == "group") {
            resiot_status st = resiot_keygen_group(members, kg_seed, kg_out.c_str());
            if (st == RESIOT_OK)
                std::cout << "wrote group_public.key, group_issuer.key and " << members
                          << " member key files to " << kg_out << "\n";
            return finish(st);
        }
        if (kind == "abe") {
            std::vector<const char*> policy_ptrs;
            for (const auto& p : policies) policy_ptrs.push_back(p.c_str());
            resiot_status st = resiot_keygen_abe(universe, policy_ptrs.data(), policy_ptrs.size(),
                                                 kg_seed, kg_out.c_str());
            if (st == RESIOT_OK)
                std::cout << "wrote abe_public.key, abe_master.key and " << policies.size()
                          << " policy key files to " << kg_out << "\n";
            return finish(st);
        }
        std::cerr << "error: keygen kind must be 'group' or 'abe'\n";
        return 2;
    }

    if (run->parsed()) {
        resiot_run_summary summary{};
        resiot_status st =
            resiot_run_scenario(scenario_path.c_str(), timings.c_str(),
                                run_seed_set ? 1 : 0, run_seed, run_out.c_str(), &summary);
        if (st == RESIOT_OK || st == RESIOT_ERR_EXPECTATION) {
            std::cout << "runs: " << summary.runs << "  matched: " << summary.matched
                      << "  mismatched: " << summary.mismatched << "\n";
            std::cout << "report: " << run_out << "/report.json\n";
            std::cout << "summary: " << run_out << "/runs.csv\n";
            print_file(run_out + "/runs.csv");
        }
        return finish(st);
    }

    if (cost->parsed()) {
        resiot_status st = resiot_cost_table(timings.c_str(), cost_out.c_str());
        if (st == RESIOT_OK) print_file(cost_out + "/cost_table.txt");
        return finish(st);
    }

    if (sweep->parsed()) {
        resiot_status st = resiot_queue_sweep(grid.c_str(), timings.c_str(), requests, sweep_seed,
                                              sweep_out.c_str());
        if (st == RESIOT_OK) std::cout << "wrote " << sweep_out << "/queue_sweep.csv\n";
        return finish(st);
    }

    if (bench->parsed()) {
        resiot_status st = resiot_microbench(repetitions, bench_seed, bench_out.c_str());
        if (st == RESIOT_OK) {
            std::cout << "wrote " << bench_out << "/host_timings.json\n";
            print_file(bench_out + "/host_timings.json");
        }
        return finish(st);
    }

    return 2;
}
