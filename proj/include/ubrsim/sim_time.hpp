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

#include <compare>
#include <cstdint>

#include "ubrsim/fault.hpp"

namespace ubrsim {

// Virtual simulation time in integer nanoseconds. Integer ticks keep long
// runs (40 s of ~2.7 us cell slots) free of float drift.
struct SimTime {
    std::int64_t ns = 0;

    friend auto operator<=>(SimTime, SimTime) = default;
    friend SimTime operator+(SimTime a, SimTime b) { return {a.ns + b.ns}; }
    friend SimTime operator-(SimTime a, SimTime b) { return {a.ns - b.ns}; }
    SimTime& operator+=(SimTime o) { ns += o.ns; return *this; }

    double seconds() const { return static_cast<double>(ns) * 1e-9; }

    static SimTime from_ns(std::int64_t v) { return {v}; }
    static SimTime from_us(std::int64_t v) { return {v * 1000}; }
    static SimTime from_ms(std::int64_t v) { return {v * 1000000}; }
    static SimTime from_s(std::int64_t v) { return {v * 1000000000}; }
    static SimTime from_s(double v) { return {static_cast<std::int64_t>(v * 1e9 + 0.5)}; }
};

inline constexpr int kCellBytes = 53;
inline constexpr int kCellBits = kCellBytes * 8; // 424

// Serialization clock for one transmitter. A cell takes 424e9/rate ns, which
// is not an integer at 155.52 Mbps; the fractional remainder is carried
// across cells so the k-th back-to-back departure lands on the exact rational
// boundary instead of accumulating rounding error.
class CellClock {
public:
    CellClock() = default;
    explicit CellClock(std::int64_t rate_bps)
        : quot_(424000000000LL / rate_bps),
          frac_(424000000000LL % rate_bps),
          den_(rate_bps) {
        UBRSIM_CHECK(rate_bps > 0, "link rate must be positive");
    }

    // Registers one cell starting no earlier than `now`; returns its
    // transmission-complete time.
    SimTime push(SimTime now) {
        if (busy_until_ < now) busy_until_ = now;
        busy_until_.ns += quot_;
        rem_ += frac_;
        if (rem_ >= den_) {
            busy_until_.ns += rem_ / den_;
            rem_ %= den_;
        }
        return busy_until_;
    }

    // Duration of one cell, rounded up to whole ns (for analytic checks).
    SimTime cell_time_ceil() const { return {quot_ + (frac_ ? 1 : 0)}; }
    std::int64_t rate_bps() const { return den_; }

private:
    std::int64_t quot_ = 0;
    std::int64_t frac_ = 0;
    std::int64_t den_ = 1;
    std::int64_t rem_ = 0;
    SimTime busy_until_{0};
};

} // namespace ubrsim
