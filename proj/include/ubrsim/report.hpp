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

#include <atomic>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ubrsim/metrics.hpp"
#include "ubrsim/scenario.hpp"

namespace ubrsim {

// Cross-product study grid: one row per
// (preset, n, buffer, flavor), one column per drop policy. Fields the
// presets own (mss, window, delays, duration) take preset values; knobs the
// presets do not own (R, Z, stagger, ack_counting, rto_ms, rate_scale)
// carry over from `base`.
struct SweepSpec {
    ScenarioConfig base;
    std::vector<std::string> presets;
    std::vector<int> ns;
    std::vector<std::int64_t> buffers;
    std::vector<TcpFlavor> flavors;
    std::vector<DropPolicyKind> policies;
};

struct SweepCell {
    ScenarioConfig cfg;
    bool ok = false;
    std::string error;
    RunResult result;
};

class SweepResult {
public:
    SweepResult(std::vector<SweepCell> cells, std::size_t rows, std::size_t cols)
        : cells_(std::move(cells)), rows_(rows), cols_(cols) {}

    const std::vector<SweepCell>& cells() const { return cells_; }
    const SweepCell& at(std::size_t row, std::size_t col) const {
        return cells_[row * cols_ + col];
    }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool all_ok() const {
        for (const SweepCell& c : cells_)
            if (!c.ok) return false;
        return true;
    }

    std::string efficiency_table() const {
        return table("Efficiency", [](const RunResult& r) { return r.efficiency; });
    }
    std::string fairness_table() const {
        return table("Fairness", [](const RunResult& r) { return r.fairness; });
    }

    // One line per cell; regression tests diff these.
    std::string machine_rows() const {
        std::string out;
        for (const SweepCell& c : cells_) {
            if (c.ok) {
                out += c.result.machine_row();
            } else {
                out += c.cfg.preset + "," + std::to_string(c.cfg.n) + "," +
                       std::to_string(c.cfg.buffer) + "," + to_string(c.cfg.flavor) +
                       "," + to_string(c.cfg.policy) + ",failed,failed,0";
            }
            out += '\n';
        }
        return out;
    }

private:
    template <typename Metric>
    std::string table(const char* name, Metric&& metric) const {
        std::ostringstream os;
        os << "TCP over UBR+ : " << name << "\n";
        os << std::left << std::setw(30) << "configuration";
        for (std::size_t c = 0; c < cols_; ++c)
            os << std::right << std::setw(15) << to_string(at(0, c).cfg.policy);
        os << "\n";
        std::vector<double> col_sum(cols_, 0);
        std::vector<int> col_cnt(cols_, 0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const ScenarioConfig& cfg = at(r, 0).cfg;
            std::ostringstream label;
            label << cfg.preset << " " << to_string(cfg.flavor) << " n=" << cfg.n
                  << " K=" << cfg.buffer;
            os << std::left << std::setw(30) << label.str();
            for (std::size_t c = 0; c < cols_; ++c) {
                const SweepCell& cell = at(r, c);
                if (cell.ok) {
                    os << std::right << std::setw(15) << std::fixed
                       << std::setprecision(4) << metric(cell.result);
                    col_sum[c] += metric(cell.result);
                    ++col_cnt[c];
                } else {
                    os << std::right << std::setw(15) << "FAIL";
                }
            }
            os << "\n";
        }
        os << std::left << std::setw(30) << "column average";
        for (std::size_t c = 0; c < cols_; ++c) {
            if (col_cnt[c] > 0)
                os << std::right << std::setw(15) << std::fixed
                   << std::setprecision(4) << col_sum[c] / col_cnt[c];
            else
                os << std::right << std::setw(15) << "-";
        }
        os << "\n";
        return os.str();
    }

    std::vector<SweepCell> cells_;
    std::size_t rows_;
    std::size_t cols_;
};

inline std::vector<ScenarioConfig> expand_sweep(const SweepSpec& spec) {
    UBRSIM_CHECK(!spec.presets.empty() && !spec.ns.empty() && !spec.buffers.empty() &&
                     !spec.flavors.empty() && !spec.policies.empty(),
                 "sweep: empty dimension");
    std::vector<ScenarioConfig> cells;
    for (const std::string& preset : spec.presets)
        for (int n : spec.ns)
            for (std::int64_t k : spec.buffers)
                for (TcpFlavor f : spec.flavors)
                    for (DropPolicyKind p : spec.policies) {
                        ScenarioConfig c = spec.base;
                        apply_preset(c, preset, "sweep");
                        c.n = n;
                        c.buffer = k;
                        c.flavor = f;
                        c.policy = p;
                        validate(c);
                        cells.push_back(std::move(c));
                    }
    return cells;
}

// Runs every cell; failures are recorded, not fatal. Cells execute on a
// small pool of worker threads; each simulation is fully independent.
inline SweepResult run_sweep(const SweepSpec& spec, unsigned workers = 0) {
    const std::vector<ScenarioConfig> cfgs = expand_sweep(spec);
    std::vector<SweepCell> cells(cfgs.size());
    for (std::size_t i = 0; i < cfgs.size(); ++i) cells[i].cfg = cfgs[i];

    if (workers == 0) workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    if (workers > cells.size()) workers = static_cast<unsigned>(cells.size());

    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            SweepCell& cell = cells[i];
            try {
                cell.result = run_scenario(cell.cfg);
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.ok = false;
                cell.error = e.what();
            }
        }
    };
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
        for (std::thread& t : pool) t.join();
    }

    const std::size_t cols = spec.policies.size();
    return SweepResult(std::move(cells), cfgs.size() / cols, cols);
}

} // namespace ubrsim
