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
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ubrsim/scenario.hpp"

namespace ubrsim {

// `ubrsim check`: fast built-in sanity battery. Every flavor x policy pair
// runs a short 3-source LAN with a deliberately tight buffer and per-event
// conservation audits, then one pair is re-run to confirm bit-identical
// results. Seconds, not minutes.
struct CheckLine {
    std::string name;
    bool ok = false;
    std::string detail;
};

namespace detail {

inline ScenarioConfig micro_config(TcpFlavor f, DropPolicyKind p) {
    ScenarioConfig cfg;
    apply_preset(cfg, "lan", "check");
    cfg.n = 3;
    cfg.buffer = 150; // tight on purpose: force drops through the policy path
    cfg.duration_s = 0.2;
    cfg.flavor = f;
    cfg.policy = p;
    return cfg;
}

inline RunResult micro_run(const ScenarioConfig& cfg) {
    auto net = build(cfg);
    net->set_paranoid(true);
    net->run();
    net->audit();
    net->check_stream_integrity();
    RunResult r = net->result();
    r.preset = cfg.preset;
    return r;
}

} // namespace detail

inline std::vector<CheckLine> self_check() {
    std::vector<CheckLine> lines;
    auto push = [&](std::string name, bool ok, std::string detail = "") {
        lines.push_back({std::move(name), ok, std::move(detail)});
    };

    push("framing: 512 B segment -> 12 cells", cells_per_segment(512) == 12);
    push("framing: 9180 B segment -> 193 cells", cells_per_segment(9180) == 193);
    {
        const std::vector<double> even{1.0, 1.0, 1.0};
        const bool ok = fairness(even) > 0.999999 && fairness(even) <= 1.0 + 1e-9;
        push("metrics: equal shares -> fairness 1", ok);
    }
    push("metrics: sack recovery bound (1/4 loss -> 1 RTT)",
         sack_recovery_bound(4, 1) == 1);

    static const TcpFlavor kFlavors[] = {TcpFlavor::kVanilla, TcpFlavor::kReno,
                                         TcpFlavor::kNewReno, TcpFlavor::kSack};
    static const DropPolicyKind kPolicies[] = {
        DropPolicyKind::kTailDrop, DropPolicyKind::kEpd,
        DropPolicyKind::kSelectiveDrop, DropPolicyKind::kFba};
    for (TcpFlavor f : kFlavors) {
        for (DropPolicyKind p : kPolicies) {
            const std::string name = std::string("micro LAN n=3 K=150 ") +
                                     to_string(f) + " / " + to_string(p);
            try {
                const RunResult r = detail::micro_run(detail::micro_config(f, p));
                bool ok = r.efficiency > 0.0 && r.efficiency <= 1.01 &&
                          r.fairness > 0.0 && r.fairness <= 1.0 + 1e-9;
                std::string detail;
                if (!ok)
                    detail = "efficiency=" + std::to_string(r.efficiency) +
                             " fairness=" + std::to_string(r.fairness);
                push(name, ok, detail);
            } catch (const std::exception& e) {
                push(name, false, e.what());
            }
        }
    }

    {
        const ScenarioConfig cfg =
            detail::micro_config(TcpFlavor::kSack, DropPolicyKind::kSelectiveDrop);
        try {
            const RunResult a = detail::micro_run(cfg);
            const RunResult b = detail::micro_run(cfg);
            const bool ok = a.machine_row() == b.machine_row();
            push("determinism: repeated run is bit-identical", ok,
                 ok ? "" : a.machine_row() + " vs " + b.machine_row());
        } catch (const std::exception& e) {
            push("determinism: repeated run is bit-identical", false, e.what());
        }
    }
    return lines;
}

// Prints one line per check; returns false if anything failed.
inline bool run_self_check(std::ostream& os) {
    bool all_ok = true;
    for (const CheckLine& line : self_check()) {
        os << (line.ok ? "ok   " : "FAIL ") << line.name;
        if (!line.ok && !line.detail.empty()) os << "  [" << line.detail << "]";
        os << "\n";
        all_ok &= line.ok;
    }
    os << (all_ok ? "all checks passed\n" : "CHECK FAILURES PRESENT\n");
    return all_ok;
}

} // namespace ubrsim
