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

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ubrsim/atm_switch.hpp"
#include "ubrsim/fault.hpp"
#include "ubrsim/sim_time.hpp"
#include "ubrsim/tcp.hpp"

namespace ubrsim {

// Sum of per-connection throughputs over the best possible TCP goodput of
// the bottleneck.
inline double efficiency(const std::vector<double>& throughputs_bps,
                         double max_goodput_bps) {
    UBRSIM_CHECK(max_goodput_bps > 0, "efficiency: max goodput must be positive");
    double sum = 0;
    for (double t : throughputs_bps) sum += t;
    return sum / max_goodput_bps;
}

// Jain fairness index (sum xi)^2 / (N * sum xi^2) over achieved/expected
// ratios. All-zero input is reported as 0 (dead network) rather than NaN.
inline double fairness(const std::vector<double>& xi) {
    UBRSIM_CHECK(!xi.empty(), "fairness: no inputs");
    double sum = 0, sum2 = 0;
    for (double x : xi) {
        sum += x;
        sum2 += x * x;
    }
    if (sum2 == 0) return 0;
    return (sum * sum) / (static_cast<double>(xi.size()) * sum2);
}

// Analytic SACK recovery time: losing 1/n of the window (n = p/q > 2) costs
// at most ceil(log2(n/(n-2))) round trips. Exact in integers: the smallest
// k with (p - 2q) * 2^k >= p.
inline int sack_recovery_bound(std::int64_t p, std::int64_t q) {
    UBRSIM_CHECK(q > 0 && p > 2 * q, "recovery bound defined only for n > 2");
    const std::int64_t r = p - 2 * q;
    int k = 0;
    std::int64_t pow = r;
    while (pow < p) {
        pow *= 2;
        ++k;
    }
    return k;
}

struct SourceResult {
    std::uint64_t delivered_bytes = 0;
    double throughput_bps = 0;
    std::uint64_t segments_sent = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t timeouts = 0;
};

// One run's outcome plus enough config echo to label a table cell.
struct RunResult {
    std::string preset;
    int n_sources = 0;
    std::int64_t buffer_cells = 0;
    TcpFlavor flavor = TcpFlavor::kSack;
    DropPolicyKind policy = DropPolicyKind::kTailDrop;
    double duration_s = 0;
    double max_goodput_bps = 0;
    std::vector<SourceResult> sources;
    double efficiency = 0;
    double fairness = 0;
    std::uint64_t timeouts = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t cells_dropped = 0;

    std::string machine_row() const {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%d,%lld,%s,%s,%.6f,%.6f,%llu",
                      preset.c_str(), n_sources,
                      static_cast<long long>(buffer_cells), to_string(flavor),
                      to_string(policy), efficiency, fairness,
                      static_cast<unsigned long long>(timeouts));
        return buf;
    }
};

// Finishes a RunResult from raw per-source numbers: throughputs,
// efficiency, fairness, with the range asserts from the metric definitions.
inline void finalize_result(RunResult& r) {
    UBRSIM_CHECK(r.duration_s > 0 && r.max_goodput_bps > 0,
                 "result: bad duration or goodput");
    std::vector<double> tput, xi;
    const double expected = r.max_goodput_bps / static_cast<double>(r.sources.size());
    for (auto& s : r.sources) {
        s.throughput_bps = static_cast<double>(s.delivered_bytes) * 8.0 / r.duration_s;
        tput.push_back(s.throughput_bps);
        xi.push_back(s.throughput_bps / expected);
    }
    r.efficiency = efficiency(tput, r.max_goodput_bps);
    r.fairness = fairness(xi);
    UBRSIM_CHECK(r.efficiency <= 1.01, "efficiency above ceiling");
    UBRSIM_CHECK(r.fairness <= 1.0 + 1e-9, "fairness above 1");
}

// Tab-separated trace rows: time_ns, series, value.
class TraceWriter {
public:
    explicit TraceWriter(std::ostream& os) : os_(os) {}

    void row(SimTime t, std::string_view series, std::int64_t value) {
        os_ << t.ns << '\t' << series << '\t' << value << '\n';
    }

private:
    std::ostream& os_;
};

} // namespace ubrsim
