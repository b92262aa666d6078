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
#include <catch2/catch_amalgamated.hpp>

#include "ubrsim/scenario.hpp"

using namespace ubrsim;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("presets pin the topology") {
    SECTION("lan") {
        ScenarioConfig c = parse_scenario_text("preset=LAN");
        REQUIRE(c.preset == "LAN");
        REQUIRE(c.access_delay.ns == 5000);
        REQUIRE(c.backbone_delay.ns == 5000);
        REQUIRE(c.buffer == 1000);
        REQUIRE(c.mss == 512);
        REQUIRE(c.window == 65536);
        REQUIRE(c.wscale == 0);
        REQUIRE(c.duration_s == 10.0);
        REQUIRE(c.link_rate == 155520000);
    }
    SECTION("wan") {
        ScenarioConfig c = parse_scenario_text("preset=WAN");
        REQUIRE(c.access_delay.ns == 5000000);
        REQUIRE(c.backbone_delay.ns == 5000000);
        REQUIRE(c.buffer == 12000);
        REQUIRE(c.window == 600000);
        REQUIRE(c.wscale == 4);
        REQUIRE(c.duration_s == 20.0);
    }
    SECTION("geo") {
        ScenarioConfig c = parse_scenario_text("preset=GEO");
        REQUIRE(c.access_delay.ns == 5000);
        REQUIRE(c.backbone_delay.ns == 275000000);
        REQUIRE(c.buffer == 200000);
        REQUIRE(c.mss == 9180);
        REQUIRE(c.window == 8704000);
        REQUIRE(c.wscale == 8);
        REQUIRE(c.duration_s == 40.0);
    }
    SECTION("shared defaults") {
        ScenarioConfig c = parse_scenario_text("preset=LAN");
        REQUIRE(c.n == 5);
        REQUIRE(c.flavor == TcpFlavor::kSack);
        REQUIRE(c.policy == DropPolicyKind::kTailDrop);
        REQUIRE(c.r == Ratio{9, 10});
        REQUIRE(c.z == Ratio{4, 5});
        REQUIRE(c.ack_counting);
        REQUIRE(c.rto_ms == 500);
        REQUIRE(c.stagger_us == 0);
        REQUIRE(c.rate_scale == 1);
    }
}

TEST_CASE("single-line scenarios parse") {
    ScenarioConfig a = parse_scenario_text(
        "preset=LAN n=5 buffer=1000 tcp=sack policy=selective_drop");
    REQUIRE(a.preset == "LAN");
    REQUIRE(a.n == 5);
    REQUIRE(a.buffer == 1000);
    REQUIRE(a.flavor == TcpFlavor::kSack);
    REQUIRE(a.policy == DropPolicyKind::kSelectiveDrop);

    ScenarioConfig b = parse_scenario_text(
        "preset=GEO n=5 buffer=200000 tcp=reno policy=epd");
    REQUIRE(b.preset == "GEO");
    REQUIRE(b.flavor == TcpFlavor::kReno);
    REQUIRE(b.policy == DropPolicyKind::kEpd);
    REQUIRE(b.mss == 9180);
}

TEST_CASE("comments, blank lines, and multi-line files") {
    ScenarioConfig c = parse_scenario_text(
        "# an experiment\n"
        "\n"
        "preset=WAN   # topology\n"
        "n=15\n"
        "tcp=newreno policy=fba z=0.9\n");
    REQUIRE(c.preset == "WAN");
    REQUIRE(c.n == 15);
    REQUIRE(c.flavor == TcpFlavor::kNewReno);
    REQUIRE(c.policy == DropPolicyKind::kFba);
    REQUIRE(c.z == Ratio{9, 10});
}

TEST_CASE("the last preset wins but explicit keys survive") {
    // keys are applied after the preset regardless of their position
    ScenarioConfig c = parse_scenario_text("buffer=77\npreset=LAN\npreset=WAN");
    REQUIRE(c.preset == "WAN");
    REQUIRE(c.buffer == 77);
    REQUIRE(c.window == 600000); // from WAN, untouched by the buffer override
}

TEST_CASE("overrides append after the file") {
    ScenarioConfig c = parse_scenario_text("preset=LAN buffer=1000",
                                           {{"buffer", "3000"}, {"tcp", "vanilla"}});
    REQUIRE(c.buffer == 3000);
    REQUIRE(c.flavor == TcpFlavor::kVanilla);
    // an override can even supply the preset
    ScenarioConfig d = parse_scenario_text("n=2", {{"preset", "GEO"}});
    REQUIRE(d.preset == "GEO");
    REQUIRE(d.n == 2);
}

TEST_CASE("name aliases") {
    REQUIRE(parse_flavor("new_reno", "t") == TcpFlavor::kNewReno);
    REQUIRE(parse_flavor("SACK", "t") == TcpFlavor::kSack);
    REQUIRE(parse_policy("ubr", "t") == DropPolicyKind::kTailDrop);
    REQUIRE(parse_policy("tail_drop", "t") == DropPolicyKind::kTailDrop);
    REQUIRE(parse_policy("sd", "t") == DropPolicyKind::kSelectiveDrop);
    REQUIRE(parse_policy("EPD", "t") == DropPolicyKind::kEpd);
}

TEST_CASE("parse errors carry their source line") {
    REQUIRE_THROWS_WITH(parse_scenario_text("preset=LAN\nbogus_key=1"),
                        ContainsSubstring("line 2") &&
                            ContainsSubstring("bogus_key"));
    REQUIRE_THROWS_WITH(parse_scenario_text("preset=LAN\n\nn=x"),
                        ContainsSubstring("line 3"));
    REQUIRE_THROWS_WITH(parse_scenario_text("preset=LAN stray"),
                        ContainsSubstring("expected key=value"));
    REQUIRE_THROWS_WITH(parse_scenario_text("preset=LAN =5"),
                        ContainsSubstring("expected key=value"));
    REQUIRE_THROWS_WITH(parse_scenario_text("preset=LAN", {{"n", "zz"}}),
                        ContainsSubstring("--n"));
}

TEST_CASE("config validation") {
    REQUIRE_THROWS_AS(parse_scenario_text("n=5"), ConfigError); // no preset
    REQUIRE_THROWS_WITH(parse_scenario_text("n=5"),
                        ContainsSubstring("preset"));
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN buffer=-1"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN n=0"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN n=1025"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN tcp=cubic"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN policy=red"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN duration=0"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN duration=99999"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN window=600000"),
                      ConfigError); // does not fit 16 bits at wscale 0
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN window=256"),
                      ConfigError); // below 2 MSS
    // R/Z are only range-checked for policies that consult them
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN policy=epd r=0"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN policy=epd r=1.5"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN policy=sd z=0"), ConfigError);
    REQUIRE_THROWS_AS(parse_scenario_text("preset=LAN r=abc"), ConfigError);
    REQUIRE_NOTHROW(parse_scenario_text("preset=LAN policy=fba z=1"));
    REQUIRE_NOTHROW(parse_scenario_text("preset=LAN seed=42"));
    REQUIRE_NOTHROW(parse_scenario_text("preset=WAN window=600000")); // wscale 4
}

TEST_CASE("scenario maps onto the network config") {
    ScenarioConfig c = parse_scenario_text(
        "preset=WAN n=3 tcp=newreno policy=fba r=0.9 z=0.8 rto_ms=200 "
        "stagger_us=100 ack_counting=off");
    c.rate_scale = 10;
    c.initial_ssthresh = 12345 * 2; // programmatic knob, passed through
    validate(c);
    NetConfig net = to_net_config(c);
    REQUIRE(net.n_sources == 3);
    REQUIRE(net.tcp.mss == 512);
    REQUIRE(net.tcp.rcvwnd == 600000);
    REQUIRE(net.tcp.wscale == 4);
    REQUIRE(net.tcp.flavor == TcpFlavor::kNewReno);
    REQUIRE_FALSE(net.tcp.ack_counting);
    REQUIRE(net.tcp.initial_ssthresh == 24690);
    REQUIRE(net.tcp.rto_granularity.ns == 200000000);
    REQUIRE(net.policy.kind == DropPolicyKind::kFba);
    REQUIRE(net.policy.r == Ratio{9, 10});
    REQUIRE(net.policy.z == Ratio{4, 5});
    REQUIRE(net.buffer_cells == 12000);
    REQUIRE(net.link_rate_bps == 15552000); // 155.52 Mb/s / rate_scale
    REQUIRE(net.access_delay.ns == 5000000);
    REQUIRE(net.backbone_delay.ns == 5000000);
    REQUIRE(net.duration.ns == 20000000000);
    REQUIRE(net.start_times.size() == 3);
    REQUIRE(net.start_times[0].ns == 0);
    REQUIRE(net.start_times[1].ns == 100000);
    REQUIRE(net.start_times[2].ns == 200000);
}

TEST_CASE("no stagger means no explicit start times") {
    ScenarioConfig c = parse_scenario_text("preset=LAN n=4");
    NetConfig net = to_net_config(c);
    REQUIRE(net.start_times.empty());
}

TEST_CASE("preset summary lists all three rows") {
    const std::string s = preset_summary();
    REQUIRE_THAT(s, ContainsSubstring("LAN") && ContainsSubstring("WAN") &&
                        ContainsSubstring("GEO") && ContainsSubstring("9180"));
}
