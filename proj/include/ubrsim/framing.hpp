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
#include <vector>

#include "ubrsim/fault.hpp"
#include "ubrsim/sim_time.hpp"

namespace ubrsim {

// TCP/IP/LLC/AAL5 encapsulation constants. Every TCP segment becomes one
// AAL5 frame carved into 48-byte cell payloads.
inline constexpr int kTcpHeaderBytes = 20;
inline constexpr int kIpHeaderBytes = 20;
inline constexpr int kLlcHeaderBytes = 8;
inline constexpr int kAal5TrailerBytes = 8;
inline constexpr int kFrameOverheadBytes =
    kTcpHeaderBytes + kIpHeaderBytes + kLlcHeaderBytes + kAal5TrailerBytes; // 56
inline constexpr int kCellPayloadBytes = 48;

inline int cells_per_segment(std::int64_t payload_len) {
    UBRSIM_CHECK(payload_len >= 0, "negative payload length");
    return static_cast<int>((payload_len + kFrameOverheadBytes +
                             kCellPayloadBytes - 1) /
                            kCellPayloadBytes);
}

// Best possible TCP-payload rate on a link: cell tax (48/53) times the
// per-frame header/padding tax for this MSS.
inline double max_goodput_bps(std::int64_t link_rate_bps, int mss) {
    UBRSIM_CHECK(link_rate_bps > 0 && mss > 0, "max_goodput: bad arguments");
    const double frame_bytes =
        static_cast<double>(kCellPayloadBytes) * cells_per_segment(mss);
    return static_cast<double>(link_rate_bps) *
           (static_cast<double>(kCellPayloadBytes) / kCellBytes) *
           (static_cast<double>(mss) / frame_bytes);
}

struct SackBlock {
    std::uint32_t left = 0;  // first byte of the block
    std::uint32_t right = 0; // one past the last byte

    friend bool operator==(const SackBlock&, const SackBlock&) = default;
};

inline constexpr int kMaxSackBlocks = 3;

enum SegFlags : std::uint8_t {
    kSegData = 1,
    kSegAck = 2,
};

// Logical TCP segment. Payload bytes are never materialized; the sequence
// numbers and lengths fully determine protocol behavior.
struct TcpSegment {
    std::uint16_t vc = 0;
    std::uint8_t flags = 0;
    std::uint8_t n_sack = 0;
    std::uint32_t seq = 0;
    std::uint32_t payload_len = 0;
    std::uint32_t ack = 0;
    SackBlock sack[kMaxSackBlocks]{};

    friend bool operator==(const TcpSegment& a, const TcpSegment& b) {
        if (a.vc != b.vc || a.flags != b.flags || a.n_sack != b.n_sack ||
            a.seq != b.seq || a.payload_len != b.payload_len || a.ack != b.ack)
            return false;
        for (int i = 0; i < a.n_sack; ++i)
            if (!(a.sack[i] == b.sack[i])) return false;
        return true;
    }
};

// One ATM cell. Structural metadata only: frame id, position, end-of-message
// marker. The EOM cell carries the whole segment so reassembly can hand the
// original back without modeling payload bytes.
struct Cell {
    std::uint16_t vc = 0;
    bool eom = false;
    std::uint32_t index = 0;
    std::uint64_t frame_id = 0;
    TcpSegment seg{}; // meaningful only when eom
};

// Emits the cells of one AAL5 frame, last cell flagged EOM and carrying the
// segment. Sink is called once per cell in order.
template <typename CellSink>
void encapsulate(const TcpSegment& seg, std::uint64_t frame_id, CellSink&& sink) {
    const int n = cells_per_segment(seg.payload_len);
    for (int i = 0; i < n; ++i) {
        Cell c;
        c.vc = seg.vc;
        c.index = static_cast<std::uint32_t>(i);
        c.frame_id = frame_id;
        c.eom = (i == n - 1);
        if (c.eom) c.seg = seg;
        sink(c);
    }
}

inline std::vector<Cell> encapsulate(const TcpSegment& seg, std::uint64_t frame_id) {
    std::vector<Cell> out;
    out.reserve(static_cast<std::size_t>(cells_per_segment(seg.payload_len)));
    encapsulate(seg, frame_id, [&](const Cell& c) { out.push_back(c); });
    return out;
}

// Per-VC AAL5 reassembly at a receiving host. Links and switch queues are
// FIFO per VC, so cells of one frame arrive in index order with gaps only
// where a switch dropped cells. A frame is delivered iff every index from 0
// through the EOM arrived; anything else is discarded whole and counted as a
// frame-level loss (the AAL5 CRC failure stand-in).
class Reassembler {
public:
    struct Result {
        bool delivered = false;
        TcpSegment seg{};
    };

    Result feed(const Cell& c) {
        UBRSIM_CHECK(!seen_any_ || c.frame_id >= frame_id_,
                     "frame id went backwards on one VC");
        seen_any_ = true;
        if (!have_frame_ || c.frame_id != frame_id_) {
            if (have_frame_) ++frames_lost_; // previous frame never completed
            have_frame_ = true;
            frame_id_ = c.frame_id;
            next_index_ = 0;
            intact_ = true;
        }
        if (c.index != next_index_) intact_ = false;
        next_index_ = c.index + 1;
        if (!c.eom) return {};
        have_frame_ = false;
        if (!intact_) {
            ++frames_lost_;
            return {};
        }
        ++frames_delivered_;
        return {true, c.seg};
    }

    std::uint64_t frames_delivered() const { return frames_delivered_; }
    std::uint64_t frames_lost() const { return frames_lost_; }

private:
    bool seen_any_ = false;
    bool have_frame_ = false;
    bool intact_ = false;
    std::uint64_t frame_id_ = 0;
    std::uint32_t next_index_ = 0;
    std::uint64_t frames_delivered_ = 0;
    std::uint64_t frames_lost_ = 0;
};

} // namespace ubrsim
