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
#include <functional>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "ubrsim/fault.hpp"
#include "ubrsim/framing.hpp"

namespace ubrsim {

// Exact rational in [0, +): thresholds R and Z are compared by
// cross-multiplication, never floating point.
struct Ratio {
    std::int64_t num = 0;
    std::int64_t den = 1;

    // Parses a plain decimal like "0.9", ".85", "1". At most 9 fraction
    // digits so downstream products stay inside __int128.
    static Ratio parse(std::string_view s) {
        UBRSIM_CHECK(!s.empty(), "ratio: empty string");
        std::int64_t ip = 0, fp = 0, den = 1;
        std::size_t i = 0;
        bool any = false;
        for (; i < s.size() && s[i] != '.'; ++i) {
            UBRSIM_CHECK(s[i] >= '0' && s[i] <= '9', "ratio: bad character in \"" + std::string(s) + "\"");
            ip = ip * 10 + (s[i] - '0');
            UBRSIM_CHECK(ip <= 1000000000, "ratio: integer part too large");
            any = true;
        }
        if (i < s.size()) { // fraction
            ++i;
            for (; i < s.size(); ++i) {
                UBRSIM_CHECK(s[i] >= '0' && s[i] <= '9', "ratio: bad character in \"" + std::string(s) + "\"");
                UBRSIM_CHECK(den < 1000000000, "ratio: more than 9 fraction digits");
                fp = fp * 10 + (s[i] - '0');
                den *= 10;
                any = true;
            }
        }
        UBRSIM_CHECK(any, "ratio: no digits in \"" + std::string(s) + "\"");
        Ratio r{ip * den + fp, den};
        const std::int64_t g = std::gcd(r.num, r.den);
        if (g > 1) { r.num /= g; r.den /= g; }
        return r;
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

enum class DropPolicyKind : std::uint8_t { kTailDrop, kEpd, kSelectiveDrop, kFba };

inline const char* to_string(DropPolicyKind k) {
    switch (k) {
        case DropPolicyKind::kTailDrop: return "taildrop";
        case DropPolicyKind::kEpd: return "epd";
        case DropPolicyKind::kSelectiveDrop: return "selectivedrop";
        case DropPolicyKind::kFba: return "fba";
    }
    return "?";
}

struct DropPolicy {
    DropPolicyKind kind = DropPolicyKind::kTailDrop;
    Ratio r{9, 10}; // buffer threshold as a fraction of K
    Ratio z{4, 5};  // fair-share scale

    void validate() const {
        if (kind == DropPolicyKind::kTailDrop) return;
        UBRSIM_CHECK(r.num > 0 && r.num < r.den, "policy: R must satisfy 0 < R < 1");
        if (kind == DropPolicyKind::kEpd) return;
        UBRSIM_CHECK(z.num > 0 && z.num <= z.den, "policy: Z must satisfy 0 < Z <= 1");
    }
};

// Threshold in cells: round(R*K) to the nearest integer.
inline std::int64_t r_cells(const Ratio& r, std::int64_t k) {
    return (2 * k * r.num + r.den) / (2 * r.den);
}

// Selective Drop: condemn a newly arriving frame of VC i when the buffer is
// past the threshold and the VC holds more than Z times its fair share:
// X > R_cells and Yi*Na/X > Z.
inline bool selective_drop_test(std::int64_t x, std::int64_t r_cells,
                                std::int64_t yi, std::int64_t na, Ratio z) {
    if (x <= r_cells) return false;
    using I = __int128;
    return I(yi) * na * z.den > I(z.num) * x;
}

// Fair Buffer Allocation: the fair-share bound tightens as occupancy
// approaches K: X > R_cells and Yi*Na/X > Z*(K - R_cells)/(X - R_cells).
inline bool fba_test(std::int64_t x, std::int64_t k, std::int64_t r_cells,
                     std::int64_t yi, std::int64_t na, Ratio z) {
    if (x <= r_cells) return false;
    using I = __int128;
    return I(yi) * na * (x - r_cells) * z.den > I(z.num) * x * (k - r_cells);
}

enum class DropDecision : std::uint8_t { kAccept, kDropCellOnly, kDropWholeFrame };
enum class DropReason : std::uint8_t { kNone, kPolicy, kOverflow, kScripted };

// Per-output-port cell accounting with frame-level drop policy. Owns the
// occupancy numbers (X, Y[i], Na) and per-frame admit state; the queue
// itself lives with the port.
class VcLedger {
public:
    struct AdmitResult {
        DropDecision decision;
        DropReason reason;
    };

    VcLedger(int n_vc, std::int64_t k, DropPolicy policy)
        : k_(k), policy_(policy), r_cells_(r_cells(policy.r, k)), vc_(n_vc) {
        UBRSIM_CHECK(n_vc > 0 && k > 0, "ledger: bad dimensions");
        policy.validate();
    }

    // Test-only frame condemnation (forced-loss scenarios). Checked at each
    // frame's first cell before the regular policy.
    void set_scripted_drop(std::function<bool(std::uint16_t, std::uint64_t)> fn) {
        scripted_ = std::move(fn);
    }

    AdmitResult admit(const Cell& c) {
        VcState& vs = state(c.vc);
        ++vs.cells_in;
        ++cells_in_;
        UBRSIM_CHECK(!vs.seen || (vs.have_frame ? c.frame_id >= vs.cur_frame
                                                : c.frame_id > vs.cur_frame),
                     "ledger: frame id went backwards");
        vs.seen = true;
        if (!vs.have_frame || vs.cur_frame != c.frame_id) {
            vs.have_frame = true;
            vs.cur_frame = c.frame_id;
            vs.condemned = false;
            vs.scripted = false;
            if (scripted_ && scripted_(c.vc, c.frame_id)) {
                vs.condemned = vs.scripted = true;
            } else {
                switch (policy_.kind) {
                    case DropPolicyKind::kTailDrop:
                        break;
                    case DropPolicyKind::kEpd:
                        vs.condemned = x_ > r_cells_;
                        break;
                    case DropPolicyKind::kSelectiveDrop:
                        vs.condemned = selective_drop_test(x_, r_cells_, vs.y, na_, policy_.z);
                        break;
                    case DropPolicyKind::kFba:
                        vs.condemned = fba_test(x_, k_, r_cells_, vs.y, na_, policy_.z);
                        break;
                }
            }
            if (vs.condemned) ++vs.frames_condemned;
        }
        if (vs.condemned) {
            ++vs.cells_dropped;
            const DropReason why = vs.scripted ? DropReason::kScripted : DropReason::kPolicy;
            if (vs.scripted) ++dropped_scripted_; else ++dropped_policy_;
            if (c.eom) vs.have_frame = false;
            return {DropDecision::kDropWholeFrame, why};
        }
        if (x_ >= k_) { // hard overflow: the cell is lost, the frame may survive
            ++vs.cells_dropped;
            ++dropped_overflow_;
            if (c.eom) vs.have_frame = false;
            return {DropDecision::kDropCellOnly, DropReason::kOverflow};
        }
        if (vs.y == 0) ++na_;
        ++vs.y;
        ++x_;
        if (c.eom) vs.have_frame = false;
        return {DropDecision::kAccept, DropReason::kNone};
    }

    void depart(const Cell& c) {
        VcState& vs = state(c.vc);
        UBRSIM_CHECK(vs.y > 0 && x_ > 0, "ledger: departure from empty accounting");
        --vs.y;
        --x_;
        if (vs.y == 0) --na_;
        ++vs.cells_out;
        ++cells_out_;
    }

    std::int64_t x() const { return x_; }
    std::int64_t y(int vc) const { return vc_[static_cast<std::size_t>(vc)].y; }
    int na() const { return na_; }
    std::int64_t k() const { return k_; }
    std::int64_t threshold_cells() const { return r_cells_; }
    const DropPolicy& policy() const { return policy_; }

    std::uint64_t cells_in() const { return cells_in_; }
    std::uint64_t cells_out() const { return cells_out_; }
    std::uint64_t dropped_policy() const { return dropped_policy_; }
    std::uint64_t dropped_overflow() const { return dropped_overflow_; }
    std::uint64_t dropped_scripted() const { return dropped_scripted_; }
    std::uint64_t dropped_total() const {
        return dropped_policy_ + dropped_overflow_ + dropped_scripted_;
    }
    std::uint64_t vc_cells_in(int vc) const { return vc_[static_cast<std::size_t>(vc)].cells_in; }
    std::uint64_t vc_cells_out(int vc) const { return vc_[static_cast<std::size_t>(vc)].cells_out; }
    std::uint64_t vc_cells_dropped(int vc) const { return vc_[static_cast<std::size_t>(vc)].cells_dropped; }
    std::uint64_t vc_frames_condemned(int vc) const { return vc_[static_cast<std::size_t>(vc)].frames_condemned; }

    // Full invariant re-check; wired to every event in paranoid test runs.
    void audit() const {
        std::int64_t sum = 0;
        int active = 0;
        for (const VcState& vs : vc_) {
            UBRSIM_CHECK(vs.y >= 0, "ledger: negative per-VC occupancy");
            sum += vs.y;
            if (vs.y > 0) ++active;
        }
        UBRSIM_CHECK(sum == x_, "ledger: X != sum of Y");
        UBRSIM_CHECK(x_ <= k_, "ledger: occupancy exceeds K");
        UBRSIM_CHECK(active == na_, "ledger: Na out of sync");
        UBRSIM_CHECK(cells_in_ == cells_out_ + dropped_total() +
                         static_cast<std::uint64_t>(x_),
                     "ledger: cell conservation broken");
    }

private:
    struct VcState {
        std::int64_t y = 0;
        std::uint64_t cur_frame = 0;
        bool seen = false;
        bool have_frame = false;
        bool condemned = false;
        bool scripted = false;
        std::uint64_t cells_in = 0;
        std::uint64_t cells_out = 0;
        std::uint64_t cells_dropped = 0;
        std::uint64_t frames_condemned = 0;
    };

    VcState& state(std::uint16_t vc) {
        UBRSIM_CHECK(vc < vc_.size(), "ledger: VC out of range");
        return vc_[vc];
    }

    std::int64_t k_;
    DropPolicy policy_;
    std::int64_t r_cells_;
    std::vector<VcState> vc_;
    std::int64_t x_ = 0;
    int na_ = 0;
    std::uint64_t cells_in_ = 0;
    std::uint64_t cells_out_ = 0;
    std::uint64_t dropped_policy_ = 0;
    std::uint64_t dropped_overflow_ = 0;
    std::uint64_t dropped_scripted_ = 0;
    std::function<bool(std::uint16_t, std::uint64_t)> scripted_;
};

} // namespace ubrsim
