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

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "ubrsim/fault.hpp"
#include "ubrsim/framing.hpp"

namespace ubrsim {

// Receiver-side store of out-of-order data: sorted, disjoint, non-adjacent
// [left, right) byte ranges above rcv_nxt. Touch stamps order the SACK
// option (most recently changed block first).
class RecvBlocks {
public:
    struct Block {
        std::uint32_t left;
        std::uint32_t right;
        std::uint64_t touch;
    };

    void insert(std::uint32_t left, std::uint32_t right) {
        UBRSIM_CHECK(left < right, "RecvBlocks: empty range");
        // Merge with everything overlapping or adjacent.
        auto first = blocks_.begin();
        while (first != blocks_.end() && first->right < left) ++first;
        auto last = first;
        while (last != blocks_.end() && last->left <= right) {
            left = std::min(left, last->left);
            right = std::max(right, last->right);
            ++last;
        }
        first = blocks_.erase(first, last);
        blocks_.insert(first, Block{left, right, ++stamp_});
    }

    // Swallow stored blocks reachable from `next` (cumulative ACK advance);
    // returns the new contiguous edge.
    std::uint32_t absorb(std::uint32_t next) {
        while (!blocks_.empty() && blocks_.front().left <= next) {
            next = std::max(next, blocks_.front().right);
            blocks_.erase(blocks_.begin());
        }
        return next;
    }

    // Up to kMaxSackBlocks blocks, most recently touched first.
    int fill_sack_option(SackBlock out[kMaxSackBlocks]) const {
        std::vector<const Block*> by_touch;
        by_touch.reserve(blocks_.size());
        for (const auto& b : blocks_) by_touch.push_back(&b);
        std::sort(by_touch.begin(), by_touch.end(),
                  [](const Block* a, const Block* b) { return a->touch > b->touch; });
        const int n = std::min<int>(kMaxSackBlocks, static_cast<int>(by_touch.size()));
        for (int i = 0; i < n; ++i) out[i] = {by_touch[i]->left, by_touch[i]->right};
        return n;
    }

    bool empty() const { return blocks_.empty(); }
    const std::vector<Block>& blocks() const { return blocks_; }

private:
    std::vector<Block> blocks_;
    std::uint64_t stamp_ = 0;
};

// Sender-side scoreboard: one record per transmitted segment, kept in
// sequence order. Records whether a segment has been SACKed and whether it
// was already retransmitted during the current recovery episode.
class SendTable {
public:
    struct Hole {
        std::uint32_t left;
        std::uint32_t right;
    };

    // New data transmitted; must abut the previous high mark.
    void extend(std::uint32_t left, std::uint32_t right) {
        UBRSIM_CHECK(left < right, "SendTable: empty range");
        UBRSIM_CHECK(recs_.empty() || left == recs_.back().right,
                     "SendTable: non-contiguous extend");
        recs_.push_back({left, right, false, false});
    }

    // Cumulative ACK advanced: everything below `una` leaves the table.
    void prune(std::uint32_t una) {
        while (!recs_.empty() && recs_.front().right <= una) {
            recs_.pop_front();
            if (cursor_ > 0) --cursor_;
        }
        if (!recs_.empty() && recs_.front().left < una) recs_.front().left = una;
        if (fack_ < una) fack_ = una;
    }

    void apply_sack(const SackBlock* blocks, int n, std::uint32_t snd_max) {
        for (int i = 0; i < n; ++i) {
            const SackBlock& b = blocks[i];
            if (b.left >= b.right || b.right > snd_max) continue; // bogus block
            auto it = std::upper_bound(
                recs_.begin(), recs_.end(), b.left,
                [](std::uint32_t s, const Rec& r) { return s < r.right; });
            for (; it != recs_.end() && it->left < b.right; ++it)
                if (it->left >= b.left && it->right <= b.right) it->sacked = true;
            fack_ = std::max(fack_, b.right);
        }
    }

    bool is_sacked(std::uint32_t seq) const {
        auto it = std::upper_bound(
            recs_.begin(), recs_.end(), seq,
            [](std::uint32_t s, const Rec& r) { return s < r.right; });
        return it != recs_.end() && it->left <= seq && it->sacked;
    }

    // Lowest segment below the highest SACKed edge that is neither SACKed
    // nor already retransmitted this episode. Cursor only moves forward;
    // holes are consumed left to right.
    std::optional<Hole> next_hole() {
        while (cursor_ < recs_.size() &&
               (recs_[cursor_].sacked || recs_[cursor_].rexmit))
            ++cursor_;
        if (cursor_ >= recs_.size()) return std::nullopt;
        const Rec& r = recs_[cursor_];
        if (r.right > fack_) return std::nullopt; // nothing SACKed above it: not a hole
        return Hole{r.left, r.right};
    }

    void mark_retransmitted(std::uint32_t left) {
        for (auto& rec : recs_) {
            if (rec.left == left) {
                rec.rexmit = true;
                return;
            }
        }
        UBRSIM_CHECK(false, "SendTable: retransmit of unknown segment");
    }

    // RTO: prior SACK state must be ignored; new SACKs repopulate it.
    void clear_marks(std::uint32_t una) {
        for (auto& rec : recs_) {
            rec.sacked = false;
            rec.rexmit = false;
        }
        cursor_ = 0;
        fack_ = una;
    }

    std::uint32_t fack() const { return fack_; }
    bool empty() const { return recs_.empty(); }
    std::size_t size() const { return recs_.size(); }

private:
    struct Rec {
        std::uint32_t left;
        std::uint32_t right;
        bool sacked;
        bool rexmit;
    };

    std::deque<Rec> recs_;
    std::size_t cursor_ = 0;
    std::uint32_t fack_ = 0; // highest SACKed right edge (or snd_una)
};

} // namespace ubrsim
