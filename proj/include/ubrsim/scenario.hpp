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

#include <cctype>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ubrsim/atm_switch.hpp"
#include "ubrsim/fault.hpp"
#include "ubrsim/network.hpp"
#include "ubrsim/tcp.hpp"

namespace ubrsim {

// A fully-resolved experiment description: preset-provided topology numbers
// plus the sweepable knobs. `rate_scale` (desk-scale link slowdown) and
// `initial_ssthresh` (test rigs) are programmatic only, not scenario keys.
struct ScenarioConfig {
    std::string preset; // "LAN" | "WAN" | "GEO"; required
    int n = 5;
    std::int64_t buffer = 1000;
    TcpFlavor flavor = TcpFlavor::kSack;
    DropPolicyKind policy = DropPolicyKind::kTailDrop;
    Ratio r{9, 10};
    Ratio z{4, 5};
    int mss = 512;
    std::int64_t window = 65536;
    int wscale = 0;
    double duration_s = 10;
    bool ack_counting = true;
    std::int64_t rto_ms = 500;
    std::int64_t stagger_us = 0;
    std::uint64_t seed = 0; // reserved; accepted and ignored
    std::int64_t rate_scale = 1;
    std::int64_t initial_ssthresh = 0;
    SimTime access_delay = SimTime::from_us(5);
    SimTime backbone_delay = SimTime::from_us(5);
    std::int64_t link_rate = 155520000;
};

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::int64_t parse_int(std::string_view v, const std::string& ctx) {
    std::size_t pos = 0;
    std::int64_t out = 0;
    try {
        out = std::stoll(std::string(v), &pos);
    } catch (const std::exception&) {
        throw ConfigError(ctx + ": not an integer: \"" + std::string(v) + "\"");
    }
    if (pos != v.size())
        throw ConfigError(ctx + ": trailing junk in \"" + std::string(v) + "\"");
    return out;
}

inline double parse_double(std::string_view v, const std::string& ctx) {
    std::size_t pos = 0;
    double out = 0;
    try {
        out = std::stod(std::string(v), &pos);
    } catch (const std::exception&) {
        throw ConfigError(ctx + ": not a number: \"" + std::string(v) + "\"");
    }
    if (pos != v.size())
        throw ConfigError(ctx + ": trailing junk in \"" + std::string(v) + "\"");
    return out;
}

inline bool parse_bool(std::string_view v, const std::string& ctx) {
    const std::string s = lower(v);
    if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "off" || s == "no") return false;
    throw ConfigError(ctx + ": not a boolean: \"" + std::string(v) + "\"");
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace detail

inline TcpFlavor parse_flavor(std::string_view v, const std::string& ctx) {
    const std::string s = detail::lower(v);
    if (s == "vanilla") return TcpFlavor::kVanilla;
    if (s == "reno") return TcpFlavor::kReno;
    if (s == "newreno" || s == "new_reno") return TcpFlavor::kNewReno;
    if (s == "sack") return TcpFlavor::kSack;
    throw ConfigError(ctx + ": unknown tcp flavor \"" + std::string(v) +
                      "\" (vanilla|reno|newreno|sack)");
}

inline DropPolicyKind parse_policy(std::string_view v, const std::string& ctx) {
    const std::string s = detail::lower(v);
    if (s == "ubr" || s == "taildrop" || s == "tail_drop") return DropPolicyKind::kTailDrop;
    if (s == "epd") return DropPolicyKind::kEpd;
    if (s == "selective_drop" || s == "selectivedrop" || s == "sd")
        return DropPolicyKind::kSelectiveDrop;
    if (s == "fba") return DropPolicyKind::kFba;
    throw ConfigError(ctx + ": unknown policy \"" + std::string(v) +
                      "\" (ubr|tail_drop|epd|selective_drop|fba)");
}

// Fills topology fields and per-preset defaults; explicit keys override
// afterwards.
inline void apply_preset(ScenarioConfig& cfg, std::string_view name,
                         const std::string& ctx) {
    const std::string p = detail::lower(name);
    if (p == "lan") {
        cfg.preset = "LAN";
        cfg.access_delay = SimTime::from_us(5);
        cfg.backbone_delay = SimTime::from_us(5);
        cfg.buffer = 1000;
        cfg.mss = 512;
        cfg.window = 65536;
        cfg.wscale = 0;
        cfg.duration_s = 10;
    } else if (p == "wan") {
        cfg.preset = "WAN";
        cfg.access_delay = SimTime::from_ms(5);
        cfg.backbone_delay = SimTime::from_ms(5);
        cfg.buffer = 12000;
        cfg.mss = 512;
        cfg.window = 600000;
        cfg.wscale = 4;
        cfg.duration_s = 20;
    } else if (p == "geo") {
        cfg.preset = "GEO";
        cfg.access_delay = SimTime::from_us(5); // 1 km access run
        cfg.backbone_delay = SimTime::from_ms(275);
        cfg.buffer = 200000;
        cfg.mss = 9180;
        cfg.window = 8704000; // 34,000 scaled by 2^8
        cfg.wscale = 8;
        cfg.duration_s = 40;
    } else {
        throw ConfigError(ctx + ": unknown preset \"" + std::string(name) +
                          "\" (LAN|WAN|GEO)");
    }
}

// One key=value assignment; `ctx` names the source ("line 3", "--buffer").
inline void apply_key(ScenarioConfig& cfg, std::string_view key,
                      std::string_view value, const std::string& ctx) {
    const std::string k = detail::lower(key);
    if (k == "preset") {
        apply_preset(cfg, value, ctx);
    } else if (k == "n") {
        cfg.n = static_cast<int>(detail::parse_int(value, ctx));
    } else if (k == "buffer") {
        cfg.buffer = detail::parse_int(value, ctx);
    } else if (k == "tcp") {
        cfg.flavor = parse_flavor(value, ctx);
    } else if (k == "policy") {
        cfg.policy = parse_policy(value, ctx);
    } else if (k == "r") {
        try {
            cfg.r = Ratio::parse(value);
        } catch (const SimFault& e) {
            throw ConfigError(ctx + ": " + e.what());
        }
    } else if (k == "z") {
        try {
            cfg.z = Ratio::parse(value);
        } catch (const SimFault& e) {
            throw ConfigError(ctx + ": " + e.what());
        }
    } else if (k == "mss") {
        cfg.mss = static_cast<int>(detail::parse_int(value, ctx));
    } else if (k == "window") {
        cfg.window = detail::parse_int(value, ctx);
    } else if (k == "wscale") {
        cfg.wscale = static_cast<int>(detail::parse_int(value, ctx));
    } else if (k == "duration") {
        cfg.duration_s = detail::parse_double(value, ctx);
    } else if (k == "ack_counting") {
        cfg.ack_counting = detail::parse_bool(value, ctx);
    } else if (k == "rto_ms") {
        cfg.rto_ms = detail::parse_int(value, ctx);
    } else if (k == "stagger_us") {
        cfg.stagger_us = detail::parse_int(value, ctx);
    } else if (k == "seed") {
        cfg.seed = static_cast<std::uint64_t>(detail::parse_int(value, ctx));
    } else {
        throw ConfigError(ctx + ": unknown key \"" + std::string(key) + "\"");
    }
}

inline void validate(const ScenarioConfig& cfg) {
    if (cfg.preset.empty()) throw ConfigError("missing required key: preset");
    if (cfg.n < 1 || cfg.n > 1024) throw ConfigError("n out of range [1,1024]");
    if (cfg.buffer < 1) throw ConfigError("buffer must be at least 1 cell");
    if (cfg.mss < 1 || cfg.mss > 65000) throw ConfigError("mss out of range [1,65000]");
    if (cfg.window < 2 * cfg.mss) throw ConfigError("window below 2 MSS");
    if (cfg.window > (std::int64_t{1} << 30)) throw ConfigError("window above 2^30");
    if (cfg.wscale < 0 || cfg.wscale > 14) throw ConfigError("wscale out of range [0,14]");
    if ((cfg.window >> cfg.wscale) > 65536)
        throw ConfigError("window does not fit a 16-bit field at this wscale");
    if (!(cfg.duration_s > 0) || cfg.duration_s > 20000)
        throw ConfigError("duration out of range (0,20000] seconds");
    if (cfg.rto_ms < 1) throw ConfigError("rto_ms must be at least 1");
    if (cfg.stagger_us < 0) throw ConfigError("stagger_us must be nonnegative");
    if (cfg.rate_scale < 1) throw ConfigError("rate-scale must be at least 1");
    DropPolicy p{cfg.policy, cfg.r, cfg.z};
    try {
        p.validate();
    } catch (const SimFault& e) {
        throw ConfigError(e.what());
    }
}

// key=value text, '#' comments. A line may carry several whitespace-
// separated assignments. Preset defaults are applied first (last preset
// mentioned wins), then every other key in order.
inline ScenarioConfig parse_scenario_text(
    std::string_view text,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    struct Item {
        std::string key, value, ctx;
    };
    std::vector<Item> items;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string ctx = "line " + std::to_string(line_no);
        // split on whitespace into key=value tokens
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j > i) {
                const std::string_view tok = line.substr(i, j - i);
                const std::size_t eq = tok.find('=');
                if (eq == std::string_view::npos || eq == 0)
                    throw ConfigError(ctx + ": expected key=value, got \"" +
                                      std::string(tok) + "\"");
                items.push_back({std::string(detail::trim(tok.substr(0, eq))),
                                 std::string(detail::trim(tok.substr(eq + 1))), ctx});
            }
            i = j;
        }
    }
    for (const auto& [k, v] : overrides)
        items.push_back({k, v, "--" + k});

    ScenarioConfig cfg;
    const Item* last_preset = nullptr;
    for (const Item& it : items)
        if (detail::lower(it.key) == "preset") last_preset = &it;
    if (!last_preset) throw ConfigError("missing required key: preset");
    apply_preset(cfg, last_preset->value, last_preset->ctx);
    for (const Item& it : items)
        if (detail::lower(it.key) != "preset") apply_key(cfg, it.key, it.value, it.ctx);
    validate(cfg);
    return cfg;
}

inline NetConfig to_net_config(const ScenarioConfig& cfg) {
    NetConfig net;
    net.n_sources = cfg.n;
    net.tcp.mss = cfg.mss;
    net.tcp.rcvwnd = cfg.window;
    net.tcp.wscale = cfg.wscale;
    net.tcp.flavor = cfg.flavor;
    net.tcp.ack_counting = cfg.ack_counting;
    net.tcp.initial_ssthresh = cfg.initial_ssthresh;
    net.tcp.rto_granularity = SimTime::from_ms(cfg.rto_ms);
    net.policy = DropPolicy{cfg.policy, cfg.r, cfg.z};
    net.buffer_cells = cfg.buffer;
    net.link_rate_bps = cfg.link_rate / cfg.rate_scale;
    net.access_delay = cfg.access_delay;
    net.backbone_delay = cfg.backbone_delay;
    net.duration = SimTime::from_s(cfg.duration_s);
    if (cfg.stagger_us > 0) {
        net.start_times.reserve(static_cast<std::size_t>(cfg.n));
        for (int i = 0; i < cfg.n; ++i)
            net.start_times.push_back(SimTime::from_us(i * cfg.stagger_us));
    }
    return net;
}

inline std::unique_ptr<Network> build(const ScenarioConfig& cfg) {
    validate(cfg);
    return std::make_unique<Network>(to_net_config(cfg));
}

// Runs to completion with end-of-run conservation and integrity audits.
inline RunResult run_scenario(const ScenarioConfig& cfg) {
    auto net = build(cfg);
    net->run();
    net->audit();
    net->check_stream_integrity();
    RunResult r = net->result();
    r.preset = cfg.preset;
    return r;
}

inline std::string preset_summary() {
    return "LAN  access 5 us   backbone 5 us     mss 512   window 65536    "
           "buffer {1000,3000}     duration 10 s\n"
           "WAN  access 5 ms   backbone 5 ms     mss 512   window 600000   "
           "buffer {12000,36000}   duration 20 s\n"
           "GEO  access 5 us   backbone 275 ms   mss 9180  window 8704000  "
           "buffer {200000,600000} duration 40 s\n";
}

} // namespace ubrsim
