// smash: scenario loading, execution, validation and benchmarking front-end.
//
//   smash run <scenario.json>       run and emit the cycle trace
//   smash validate <scenario.json>  diff expected vs observed transitions
//   smash bench <scenario.json>     repeated timing runs (Table-style output)
//
// Exit codes: 0 success, 1 runtime failure or validation diff, 2 schema or
// load error. SMASH_LOG={quiet,info,debug} selects trace verbosity.

#include "smash/pddl.hpp"
#include "smash/runtime.hpp"
#include "smash/scenario.hpp"
#include "smash/tcp_bus.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

using namespace smash;

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
    const char* env = std::getenv("SMASH_LOG");
    if (!env) return LogLevel::info;
    std::string v = env;
    if (v == "quiet") return LogLevel::quiet;
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    std::cerr << "warning: unknown SMASH_LOG level '" << v << "', using info\n";
    return LogLevel::info;
}

struct CommonOptions {
    std::string scenario_path;
    std::string strategy = "bfs";
    std::string bus = "inproc";
    std::string pddl_out;
    std::string out_file;
    std::uint64_t seed = 0;  // accepted for reproducible-run interfaces; the runtime is deterministic
    bool audit = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("scenario", opts.scenario_path, "scenario file (JSON)")->required();
    cmd->add_option("--strategy", opts.strategy, "search strategy: bfs | gbfs")
        ->check(CLI::IsMember({"bfs", "gbfs"}));
    cmd->add_option("--bus", opts.bus, "bus transport: inproc | tcp:<port>");
    cmd->add_option("--pddl-out", opts.pddl_out, "directory for emitted PDDL files");
    cmd->add_option("--out", opts.out_file, "write the JSON-lines trace to a file");
    cmd->add_option("--seed", opts.seed, "run seed (runs are deterministic; recorded in the trace header)");
    cmd->add_flag("--audit", opts.audit, "record belief snapshots for post-hoc audits");
}

RunOptions to_run_options(const CommonOptions& opts) {
    RunOptions ro;
    ro.strategy = parse_strategy(opts.strategy);
    ro.audit = opts.audit;
    if (!opts.pddl_out.empty()) ro.pddl_out = opts.pddl_out;
    if (opts.bus.rfind("tcp:", 0) == 0) {
        int port = std::stoi(opts.bus.substr(4));
        if (port < 0 || port > 65535) throw ConfigError("bad TCP port in --bus");
        ro.tcp_port = static_cast<uint16_t>(port);
    } else if (opts.bus != "inproc") {
        throw ConfigError("--bus expects 'inproc' or 'tcp:<port>'");
    }
    return ro;
}

void write_trace(const CommonOptions& opts, const RunResult& result, LogLevel level) {
    std::unique_ptr<std::ofstream> file;
    if (!opts.out_file.empty()) file = std::make_unique<std::ofstream>(opts.out_file);
    for (const CycleTrace& t : result.traces) {
        std::string line = t.to_json().dump();
        if (file && *file) *file << line << "\n";
        if (level == LogLevel::debug && (!file || opts.out_file.empty())) std::cout << line << "\n";
    }
    if (level >= LogLevel::info) {
        for (const CycleTrace& t : result.traces) {
            if (level == LogLevel::quiet) break;
            std::printf("cycle %zu [%s] trigger=%s goals=%zu commands=%zu%s\n", t.cycle, t.agent.c_str(),
                        t.trigger.c_str(), t.goals.size(), t.commands.size(),
                        t.error.empty() ? "" : (" error=" + t.error).c_str());
        }
    }
}

int cmd_run(const CommonOptions& opts) {
    Scenario sc = load_scenario_file(opts.scenario_path);
    RunOptions ro = to_run_options(opts);
    Runner runner(sc, ro);
    std::unique_ptr<TcpBusServer> tcp;
    if (ro.tcp_port) {
        tcp = std::make_unique<TcpBusServer>(runner.bus(), *ro.tcp_port);
        if (log_level() != LogLevel::quiet)
            std::printf("bus exposed on tcp port %u\n", unsigned(tcp->port()));
    }
    RunResult result = runner.run();
    write_trace(opts, result, log_level());

    bool failed = false;
    for (const CycleTrace& t : result.traces)
        if (!t.error.empty()) failed = true;
    if (log_level() != LogLevel::quiet)
        std::printf("%zu cycles, %zu observed transitions\n", result.traces.size(), result.observed.size());
    return failed ? 1 : 0;
}

int cmd_validate(const CommonOptions& opts) {
    Scenario sc = load_scenario_file(opts.scenario_path);
    if (sc.expect.empty()) {
        std::printf("warning: scenario has no expect section; validation is vacuous\n");
        Runner(sc, to_run_options(opts)).run();
        std::printf("PASS (vacuous)\n");
        return 0;
    }
    Runner runner(sc, to_run_options(opts));
    RunResult result = runner.run();
    ValidationDiff diff = validate_transitions(sc.expect, result.observed);
    if (diff.ok) {
        std::printf("PASS: all %zu expected transitions observed in order\n", sc.expect.size());
        return 0;
    }
    // locate the cycle index of the divergence for the report
    std::printf("FAIL: %s\n", diff.to_string().c_str());
    std::printf("observed transitions:\n");
    for (const ObservedTransition& o : result.observed) std::printf("  %s\n", o.to_string().c_str());
    return 1;
}

int cmd_bench(const CommonOptions& opts, int repetitions) {
    Scenario sc = load_scenario_file(opts.scenario_path);
    RunOptions ro = to_run_options(opts);

    struct Execution {
        std::vector<std::pair<std::string, double>> planning;  // label -> seconds
        double value_goal = 0, acting = 0, total = 0;
    };
    std::vector<Execution> runs;
    for (int i = 0; i < repetitions; ++i) {
        Runner runner(sc, ro);
        RunResult result = runner.run();
        Execution e;
        for (const CycleTrace& t : result.traces) {
            for (const auto& p : t.plans)
                e.planning.push_back({"Planning c" + std::to_string(t.cycle) + " " + p.goal, p.seconds});
            e.value_goal += t.value_seconds + t.goal_seconds;
            e.acting += t.acting_seconds;
            e.total += t.total_seconds;
        }
        runs.push_back(std::move(e));
    }
    if (runs.empty()) return 0;

    auto stats = [](const std::vector<double>& xs) {
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= xs.empty() ? 1 : xs.size();
        double var = 0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= xs.empty() ? 1 : xs.size();
        return std::pair<double, double>(mean, std::sqrt(var));
    };

    std::printf("%-40s", "Time (s)");
    for (std::size_t i = 0; i < runs.size(); ++i) std::printf(" Execution #%zu", i + 1);
    std::printf("  mean  stddev\n");

    auto row = [&](const std::string& label, auto getter) {
        std::vector<double> xs;
        for (const Execution& e : runs) xs.push_back(getter(e));
        auto [mean, sd] = stats(xs);
        std::printf("%-40s", label.c_str());
        for (double x : xs) std::printf(" %12.6f", x);
        std::printf(" %6.4f %6.4f\n", mean, sd);
    };

    for (std::size_t p = 0; p < runs.front().planning.size(); ++p)
        row(runs.front().planning[p].first, [p](const Execution& e) {
            return p < e.planning.size() ? e.planning[p].second : 0.0;
        });
    row("Value- and Goal-Reasoning Time", [](const Execution& e) { return e.value_goal; });
    row("Acting Time", [](const Execution& e) { return e.acting; });
    row("Total Time (s)", [](const Execution& e) { return e.total; });

    // total should decompose into the measured parts
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const Execution& e = runs[i];
        double parts = e.value_goal + e.acting;
        for (const auto& p : e.planning) parts += p.second;
        double rel = e.total > 0 ? std::abs(e.total - parts) / e.total : 0;
        std::printf("additivity #%zu: total=%.6f parts=%.6f rel_err=%.2f%%\n", i + 1, e.total, parts,
                    rel * 100);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SMASH agent kernel: value- and goal-driven planning and acting over a simulated device bus"};
    app.require_subcommand(1);

    CommonOptions run_opts, validate_opts, bench_opts;
    int repetitions = 4;

    CLI::App* run = app.add_subcommand("run", "run a scenario and emit the trace");
    add_common(run, run_opts);
    CLI::App* validate = app.add_subcommand("validate", "compare expected vs observed device transitions");
    add_common(validate, validate_opts);
    CLI::App* bench = app.add_subcommand("bench", "repeated timing runs with per-layer breakdown");
    add_common(bench, bench_opts);
    bench->add_option("--repetitions", repetitions, "number of executions (default 4)");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(run_opts);
        if (validate->parsed()) return cmd_validate(validate_opts);
        if (bench->parsed()) return cmd_bench(bench_opts, repetitions);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
