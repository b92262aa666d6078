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

#include <random>

#include "exact_oracle.hpp"
#include "ubrsim/atm_switch.hpp"

using namespace ubrsim;

TEST_CASE("ratio parsing is exact decimal") {
    REQUIRE(Ratio::parse("0.9") == Ratio{9, 10});
    REQUIRE(Ratio::parse(".85") == Ratio{17, 20});
    REQUIRE(Ratio::parse("1") == Ratio{1, 1});
    REQUIRE(Ratio::parse("0.875") == Ratio{7, 8});
    REQUIRE(Ratio::parse("0.800000000") == Ratio{4, 5}); // 9 fraction digits ok
    REQUIRE(Ratio::parse("0") == Ratio{0, 1});
    REQUIRE(Ratio::parse("2.5") == Ratio{5, 2});

    REQUIRE_THROWS_AS(Ratio::parse(""), SimFault);
    REQUIRE_THROWS_AS(Ratio::parse("."), SimFault);
    REQUIRE_THROWS_AS(Ratio::parse("0.1234567890"), SimFault); // 10 digits
    REQUIRE_THROWS_AS(Ratio::parse("1e3"), SimFault);
    REQUIRE_THROWS_AS(Ratio::parse("-0.5"), SimFault);
    REQUIRE_THROWS_AS(Ratio::parse("0..5"), SimFault);
}

TEST_CASE("threshold cells is round(R*K), half away from zero") {
    REQUIRE(r_cells(Ratio{9, 10}, 1000) == 900);
    REQUIRE(r_cells(Ratio{9, 10}, 12000) == 10800);
    REQUIRE(r_cells(Ratio{9, 10}, 200000) == 180000);
    REQUIRE(r_cells(Ratio{1, 2}, 5) == 3);    // 2.5 rounds up
    REQUIRE(r_cells(Ratio{1, 3}, 100) == 33); // 33.33 rounds down
    REQUIRE(r_cells(Ratio{2, 3}, 100) == 67); // 66.67 rounds up
}

TEST_CASE("selective drop and fba worked examples") {
    // K=1000, R_cells=900, Na=5, Z=0.8. VC holds 300 of 950 queued cells.
    const Ratio z{4, 5};
    SECTION("over fair share past threshold: selective drop condemns") {
        REQUIRE(selective_drop_test(950, 900, 300, 5, z));
    }
    SECTION("same VC under fba escapes until occupancy climbs") {
        // (X-R)/(K-R) = 50/100 halves the lhs: 300*5*50*5 vs 4*950*100
        REQUIRE_FALSE(fba_test(950, 1000, 900, 300, 5, z));
        REQUIRE(fba_test(1000, 1000, 900, 300, 5, z)); // at X=K the scale is 1
    }
    SECTION("modest VC passes both") {
        REQUIRE_FALSE(selective_drop_test(950, 900, 100, 5, z));
        REQUIRE_FALSE(fba_test(950, 1000, 900, 100, 5, z));
    }
    SECTION("below or at threshold nothing is condemned") {
        REQUIRE_FALSE(selective_drop_test(900, 900, 900, 1, z));
        REQUIRE_FALSE(fba_test(900, 1000, 900, 900, 1, z));
        REQUIRE_FALSE(selective_drop_test(899, 900, 899, 1, z));
    }
    SECTION("strict inequality at the fair-share boundary") {
        // Yi*Na/X == Z exactly: 400*2/1000 == 0.8 -> keep
        REQUIRE_FALSE(selective_drop_test(1000, 900, 400, 2, z));
        REQUIRE(selective_drop_test(1000, 900, 401, 2, z));
    }
}

TEST_CASE("drop predicates agree with the limb-arithmetic oracle") {
    std::mt19937_64 rng(20260815);
    auto rnd = [&](std::uint64_t lo, std::uint64_t hi) {
        return lo + rng() % (hi - lo + 1);
    };

    int drops_sd = 0, drops_fba = 0;
    for (int i = 0; i < 1000000; ++i) {
        const std::int64_t k = static_cast<std::int64_t>(rnd(2, 1000000000));
        const std::int64_t den = static_cast<std::int64_t>(rnd(1, 1000000000));
        const std::int64_t num = static_cast<std::int64_t>(rnd(1, static_cast<std::uint64_t>(den)));
        const Ratio z{num, den};
        const std::int64_t rden = static_cast<std::int64_t>(rnd(2, 1000000));
        const std::int64_t rnum = static_cast<std::int64_t>(rnd(1, static_cast<std::uint64_t>(rden - 1)));
        const std::int64_t rc = r_cells(Ratio{rnum, rden}, k);

        std::int64_t x;
        if (i % 2 == 0 && rc + 4 <= k) {
            // half the samples hug the threshold boundary
            x = rc - 2 + static_cast<std::int64_t>(rnd(0, 6));
            if (x < 0) x = 0;
            if (x > k) x = k;
        } else {
            x = static_cast<std::int64_t>(rnd(0, static_cast<std::uint64_t>(k)));
        }
        const std::int64_t yi = static_cast<std::int64_t>(
            rnd(0, static_cast<std::uint64_t>(x)));
        const std::int64_t na = static_cast<std::int64_t>(rnd(1, 1024));

        const bool sd = selective_drop_test(x, rc, yi, na, z);
        const bool sd_ref = oracle::selective_drop_ref(
            static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(rc),
            static_cast<std::uint64_t>(yi), static_cast<std::uint64_t>(na),
            static_cast<std::uint64_t>(z.num), static_cast<std::uint64_t>(z.den));
        REQUIRE(sd == sd_ref);

        const bool fb = fba_test(x, k, rc, yi, na, z);
        const bool fb_ref = oracle::fba_ref(
            static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(k),
            static_cast<std::uint64_t>(rc), static_cast<std::uint64_t>(yi),
            static_cast<std::uint64_t>(na), static_cast<std::uint64_t>(z.num),
            static_cast<std::uint64_t>(z.den));
        REQUIRE(fb == fb_ref);

        drops_sd += sd;
        drops_fba += fb;
    }
    // both branches must actually be exercised
    REQUIRE(drops_sd > 1000);
    REQUIRE(drops_fba > 1000);
    REQUIRE(drops_sd < 1000000);
    REQUIRE(drops_fba < 1000000);
}

namespace {
Cell mk_cell(std::uint16_t vc, std::uint64_t frame, std::uint32_t index, bool eom) {
    Cell c;
    c.vc = vc;
    c.frame_id = frame;
    c.index = index;
    c.eom = eom;
    return c;
}

// Push a whole n-cell frame; returns how many cells were accepted.
int push_frame(VcLedger& led, std::uint16_t vc, std::uint64_t frame, int n) {
    int accepted = 0;
    for (int i = 0; i < n; ++i) {
        auto res = led.admit(mk_cell(vc, frame, static_cast<std::uint32_t>(i), i == n - 1));
        if (res.decision == DropDecision::kAccept) ++accepted;
    }
    return accepted;
}
} // namespace

TEST_CASE("taildrop ledger: cell-level overflow only") {
    VcLedger led(2, 10, DropPolicy{DropPolicyKind::kTailDrop, {9, 10}, {4, 5}});
    REQUIRE(push_frame(led, 0, 1, 8) == 8);
    REQUIRE(led.x() == 8);
    // next frame: 2 cells fit, the rest overflow, frame keeps going
    REQUIRE(push_frame(led, 1, 1, 5) == 2);
    REQUIRE(led.x() == 10);
    REQUIRE(led.dropped_overflow() == 3);
    REQUIRE(led.dropped_policy() == 0);
    REQUIRE(led.y(0) == 8);
    REQUIRE(led.y(1) == 2);
    REQUIRE(led.na() == 2);
    led.audit();

    SECTION("departures free space and na tracks active VCs") {
        for (int i = 0; i < 8; ++i) led.depart(mk_cell(0, 1, static_cast<std::uint32_t>(i), i == 7));
        REQUIRE(led.x() == 2);
        REQUIRE(led.na() == 1);
        REQUIRE(led.cells_out() == 8);
        led.audit();
    }
}

TEST_CASE("epd condemns whole frames past the threshold") {
    // K=10, R=0.5 -> threshold 5
    VcLedger led(2, 10, DropPolicy{DropPolicyKind::kEpd, {1, 2}, {4, 5}});
    REQUIRE(push_frame(led, 0, 1, 5) == 5); // X: 0 -> 5, started below
    REQUIRE(led.x() == 5);

    SECTION("new frame at X > R is dropped entirely, including EOM") {
        led.admit(mk_cell(0, 2, 0, false)); // X=5 is not > 5: accepted
        REQUIRE(led.x() == 6);
        REQUIRE(push_frame(led, 1, 1, 3) == 0); // X=6 > 5: condemned
        REQUIRE(led.x() == 6);
        REQUIRE(led.dropped_policy() == 3);
        REQUIRE(led.vc_frames_condemned(1) == 1);
        led.audit();
    }

    SECTION("a frame admitted below threshold finishes above it") {
        // 4 more cells of frame 1's VC in a fresh frame starting at X=5:
        // X=5 not > 5 so the frame is admitted and crosses the threshold
        REQUIRE(push_frame(led, 1, 1, 4) == 4);
        REQUIRE(led.x() == 9);
        REQUIRE(led.dropped_policy() == 0);
    }

    SECTION("condemnation is decided once per frame") {
        REQUIRE(push_frame(led, 1, 1, 2) == 2); // X=5 -> 7
        // VC0 second frame sees X=7 > 5: whole frame dies even as X drains
        led.admit(mk_cell(0, 2, 0, false));
        for (int i = 0; i < 5; ++i) led.depart(mk_cell(0, 1, static_cast<std::uint32_t>(i), i == 4));
        REQUIRE(led.x() == 2); // below threshold now
        auto res = led.admit(mk_cell(0, 2, 1, true));
        REQUIRE(res.decision == DropDecision::kDropWholeFrame); // still condemned
        REQUIRE(res.reason == DropReason::kPolicy);
        led.audit();
    }
}

TEST_CASE("selective drop ledger penalizes the hog only") {
    // K=20, R=0.5 (threshold 10), Z=0.5
    VcLedger led(2, 20, DropPolicy{DropPolicyKind::kSelectiveDrop, {1, 2}, {1, 2}});
    REQUIRE(push_frame(led, 0, 1, 9) == 9);
    REQUIRE(push_frame(led, 1, 1, 3) == 3); // X=12 > 10 now, Na=2
    // hog VC0: Yi*Na/X = 9*2/12 = 1.5 > 0.5 -> condemned
    REQUIRE(push_frame(led, 0, 2, 2) == 0);
    REQUIRE(led.dropped_policy() == 2);
    // modest VC1: 3*2/12 = 0.5, not > 0.5 -> accepted
    REQUIRE(push_frame(led, 1, 2, 2) == 2);
    led.audit();
}

TEST_CASE("x == k always drops the cell even mid-frame") {
    VcLedger led(1, 4, DropPolicy{DropPolicyKind::kEpd, {9, 10}, {4, 5}});
    // threshold = round(3.6) = 4 == K: policy never condemns, overflow rules
    REQUIRE(led.threshold_cells() == 4);
    REQUIRE(push_frame(led, 0, 1, 6) == 4);
    REQUIRE(led.dropped_overflow() == 2);
    REQUIRE(led.x() == 4);
    led.audit();
}

TEST_CASE("scripted drops condemn chosen frames") {
    VcLedger led(2, 100, DropPolicy{});
    led.set_scripted_drop([](std::uint16_t vc, std::uint64_t frame) {
        return vc == 1 && frame == 2;
    });
    REQUIRE(push_frame(led, 1, 1, 3) == 3);
    REQUIRE(push_frame(led, 1, 2, 3) == 0);
    REQUIRE(push_frame(led, 1, 3, 3) == 3);
    REQUIRE(push_frame(led, 0, 2, 3) == 3); // other VC untouched
    REQUIRE(led.dropped_scripted() == 3);
    REQUIRE(led.dropped_total() == 3);
    led.audit();
}

TEST_CASE("ledger rejects malformed input") {
    VcLedger led(1, 10, DropPolicy{});
    push_frame(led, 0, 5, 2);
    REQUIRE_THROWS_AS(led.admit(mk_cell(0, 4, 0, true)), SimFault); // id backwards
    REQUIRE_THROWS_AS(led.admit(mk_cell(1, 1, 0, true)), SimFault); // vc range
    VcLedger empty(1, 10, DropPolicy{});
    REQUIRE_THROWS_AS(empty.depart(mk_cell(0, 1, 0, true)), SimFault);
    REQUIRE_THROWS_AS(VcLedger(0, 10, DropPolicy{}), SimFault);
}
