/*
 * Copyright (c) 2026 ubrsim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// ubrsim: batch driver. Verbs: run | sweep | presets | check.
// Exit codes: 0 ok, 2 configuration error, 3 internal invariant violation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ubrsim/report.hpp"
#include "ubrsim/scenario.hpp"
#include "ubrsim/selfcheck.hpp"

namespace {

using ubrsim::ConfigError;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Output directory: --out beats UBRSIM_OUT beats cwd.
std::string resolve_outdir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("UBRSIM_OUT"); env && *env) return env;
    return ".";
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    const std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    return out;
}

// Every scenario key doubles as a --key flag; collected pairs feed the same
// parser as scenario files so errors and precedence match exactly.
void add_scenario_flags(CLI::App* cmd,
                        std::vector<std::pair<std::string, std::string>>* sink) {
    static const char* kKeys[] = {"preset", "n",        "buffer",  "tcp",
                                  "policy", "r",        "z",       "mss",
                                  "window", "wscale",   "duration", "ack_counting",
                                  "rto_ms", "stagger_us", "seed"};
    for (const char* key : kKeys) {
        cmd->add_option_function<std::string>(
            std::string("--") + key,
            [key, sink](const std::string& v) { sink->emplace_back(key, v); },
            std::string("scenario key ") + key);
    }
}

void print_human(const ubrsim::RunResult& r, std::ostream& os) {
    char line[256];
    os << r.preset << " " << to_string(r.flavor) << "/" << to_string(r.policy)
       << " n=" << r.n_sources << " K=" << r.buffer_cells << " duration "
       << r.duration_s << " s\n";
    std::snprintf(line, sizeof line,
                  "aggregate max goodput %.3f Mb/s   efficiency %.4f   fairness %.4f\n",
                  r.max_goodput_bps / 1e6, r.efficiency, r.fairness);
    os << line;
    os << "per-source throughput (Mb/s):";
    for (const ubrsim::SourceResult& s : r.sources) {
        std::snprintf(line, sizeof line, " %.3f", s.throughput_bps / 1e6);
        os << line;
    }
    os << "\ntimeouts " << r.timeouts << "   retransmissions " << r.retransmissions
       << "   cells dropped " << r.cells_dropped << "\n";
}

int cmd_run(const std::string& scenario_path,
            const std::vector<std::pair<std::string, std::string>>& overrides,
            std::int64_t rate_scale, const std::string& trace_path,
            std::int64_t trace_period_ms, const std::string& drop_log_path,
            bool machine, const std::string& outdir_flag) {
    ubrsim::ScenarioConfig cfg = ubrsim::parse_scenario_text(
        scenario_path.empty() ? std::string() : slurp(scenario_path), overrides);
    if (rate_scale != 1) {
        cfg.rate_scale = rate_scale;
        ubrsim::validate(cfg);
    }

    auto net = ubrsim::build(cfg);

    std::ofstream trace_file;
    std::unique_ptr<ubrsim::TraceWriter> tw;
    if (!trace_path.empty()) {
        trace_file.open(trace_path, std::ios::binary);
        if (!trace_file) throw ConfigError("cannot write " + trace_path);
        tw = std::make_unique<ubrsim::TraceWriter>(trace_file);
        net->enable_trace(tw.get(), ubrsim::SimTime::from_ms(trace_period_ms));
    }
    std::ofstream drop_file;
    if (!drop_log_path.empty()) {
        drop_file.open(drop_log_path, std::ios::binary);
        if (!drop_file) throw ConfigError("cannot write " + drop_log_path);
        net->set_drop_log([&drop_file](ubrsim::SimTime t, int port, std::uint16_t vc,
                                       std::uint64_t frame, ubrsim::DropReason why) {
            const char* reason = why == ubrsim::DropReason::kPolicy      ? "policy"
                                 : why == ubrsim::DropReason::kOverflow  ? "overflow"
                                 : why == ubrsim::DropReason::kScripted  ? "scripted"
                                                                         : "none";
            drop_file << t.ns << '\t' << port << '\t' << vc << '\t' << frame
                      << '\t' << reason << '\n';
        });
    }

    net->run();
    net->audit();
    net->check_stream_integrity();
    ubrsim::RunResult r = net->result();
    r.preset = cfg.preset;

    if (machine) {
        std::cout << r.machine_row() << "\n";
    } else {
        print_human(r, std::cout);
        std::cout << "result: " << r.machine_row() << "\n";
    }
    if (!outdir_flag.empty() || std::getenv("UBRSIM_OUT")) {
        std::ofstream rec = open_out(resolve_outdir(outdir_flag), "result.csv");
        rec << r.machine_row() << "\n";
    }
    return 0;
}

int cmd_sweep(const ubrsim::SweepSpec& spec, const std::string& outdir_flag,
              unsigned workers) {
    const ubrsim::SweepResult res = ubrsim::run_sweep(spec, workers);
    const std::string eff = res.efficiency_table();
    const std::string fair = res.fairness_table();
    std::cout << eff << "\n" << fair;

    const std::string dir = resolve_outdir(outdir_flag);
    open_out(dir, "efficiency.txt") << eff;
    open_out(dir, "fairness.txt") << fair;
    open_out(dir, "results.csv") << res.machine_rows();
    std::cout << "wrote " << dir << "/{efficiency.txt,fairness.txt,results.csv}\n";
    return res.all_ok() ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ubrsim: deterministic TCP over ATM-UBR+ simulator"};
    app.require_subcommand(1);

    // --- run ---------------------------------------------------------------
    auto* run = app.add_subcommand("run", "execute one scenario");
    std::string scenario_path;
    run->add_option("scenario", scenario_path, "scenario file (key=value lines)");
    std::vector<std::pair<std::string, std::string>> overrides;
    add_scenario_flags(run, &overrides);
    std::int64_t rate_scale = 1;
    run->add_option("--rate-scale", rate_scale,
                    "divide all link rates by this factor (desk-scale runs)");
    std::string trace_path;
    run->add_option("--trace", trace_path, "write cwnd/queue trace (TSV)");
    std::int64_t trace_period_ms = 10;
    run->add_option("--trace-period-ms", trace_period_ms, "trace sampling period");
    std::string drop_log_path;
    run->add_option("--drop-log", drop_log_path, "write per-drop log (TSV)");
    bool machine = false;
    run->add_flag("--machine", machine, "print only the machine-readable row");
    std::string run_out;
    run->add_option("--out", run_out, "output directory (default $UBRSIM_OUT)");

    // --- sweep -------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "run a table grid");
    std::vector<std::string> sw_presets, sw_tcp, sw_policies;
    std::vector<int> sw_n;
    std::vector<std::int64_t> sw_buffers;
    sweep->add_option("--presets", sw_presets, "preset list")
        ->delimiter(',')->required();
    sweep->add_option("--n", sw_n, "source-count list")->delimiter(',')->required();
    sweep->add_option("--buffers", sw_buffers, "buffer (cells) list")
        ->delimiter(',')->required();
    sweep->add_option("--tcp", sw_tcp, "flavor list")->delimiter(',')->required();
    sweep->add_option("--policies", sw_policies, "drop-policy list")
        ->delimiter(',')->required();
    std::vector<std::pair<std::string, std::string>> sw_base_kv;
    for (const char* key : {"r", "z", "ack_counting", "rto_ms", "stagger_us"}) {
        sweep->add_option_function<std::string>(
            std::string("--") + key,
            [key, &sw_base_kv](const std::string& v) { sw_base_kv.emplace_back(key, v); },
            std::string("base scenario key ") + key);
    }
    std::int64_t sw_rate_scale = 1;
    sweep->add_option("--rate-scale", sw_rate_scale, "divide all link rates");
    unsigned sw_workers = 0;
    sweep->add_option("--workers", sw_workers, "worker threads (0 = auto)");
    std::string sweep_out;
    sweep->add_option("--out", sweep_out, "output directory (default $UBRSIM_OUT)");

    // --- presets / check ---------------------------------------------------
    auto* presets = app.add_subcommand("presets", "list built-in topologies");
    auto* check = app.add_subcommand("check", "run built-in sanity battery");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed())
            return cmd_run(scenario_path, overrides, rate_scale, trace_path,
                           trace_period_ms, drop_log_path, machine, run_out);
        if (sweep->parsed()) {
            ubrsim::SweepSpec spec;
            for (const auto& [k, v] : sw_base_kv)
                ubrsim::apply_key(spec.base, k, v, "--" + k);
            spec.base.rate_scale = sw_rate_scale;
            spec.presets = sw_presets;
            spec.ns = sw_n;
            spec.buffers = sw_buffers;
            for (const std::string& f : sw_tcp)
                spec.flavors.push_back(ubrsim::parse_flavor(f, "--tcp"));
            for (const std::string& p : sw_policies)
                spec.policies.push_back(ubrsim::parse_policy(p, "--policies"));
            return cmd_sweep(spec, sweep_out, sw_workers);
        }
        if (presets->parsed()) {
            std::cout << ubrsim::preset_summary();
            return 0;
        }
        if (check->parsed()) return ubrsim::run_self_check(std::cout) ? 0 : 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ubrsim::SimFault& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
