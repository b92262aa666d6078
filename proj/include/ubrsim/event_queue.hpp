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
#include <queue>
#include <utility>
#include <vector>

#include "ubrsim/fault.hpp"
#include "ubrsim/sim_time.hpp"

namespace ubrsim {

// Handle for a scheduled event; valid for cancel() until the event fires.
struct EventHandle {
    std::uint32_t slot = UINT32_MAX;
    std::uint32_t gen = 0;

    bool valid() const { return slot != UINT32_MAX; }
};

// Deterministic discrete-event core. Events fire in (fire_at, insertion seq)
// order; ties broken by insertion order so identical configurations replay
// bit-identically. Single-threaded per simulation run.
//
// Payload is a cheap value type owned by the queue. Cancellation goes through
// a slot pool with generation counters: cancel() is O(1) and reports exactly
// whether the event was still pending.
template <typename Payload>
class EventQueue {
public:
    SimTime now() const { return now_; }
    std::uint64_t fired_count() const { return fired_; }
    bool empty() const { return live_ == 0; }
    std::size_t pending() const { return live_; }

    EventHandle schedule(SimTime fire_at, Payload payload) {
        if (fire_at < now_)
            throw SimFault("schedule: fire_at is in the past");
        std::uint32_t slot = alloc_slot();
        heap_.push(Entry{fire_at, next_seq_++, slot, slots_[slot].gen,
                         std::move(payload)});
        ++live_;
        return EventHandle{slot, slots_[slot].gen};
    }

    // True iff the event existed, had not fired, and will now never fire.
    bool cancel(EventHandle h) {
        if (!h.valid() || h.slot >= slots_.size()) return false;
        Slot& s = slots_[h.slot];
        if (s.gen != h.gen || s.state != Slot::kPending) return false;
        s.state = Slot::kCancelled;
        --live_;
        return true;
    }

    // Fires every event with fire_at <= t_end (including ones scheduled while
    // running), advances the clock to t_end, and returns how many fired.
    // Sink is invoked as sink(payload, fire_at).
    template <typename Sink>
    std::uint64_t run_until(SimTime t_end, Sink&& sink) {
        if (t_end < now_) throw SimFault("run_until: t_end before clock");
        std::uint64_t fired_here = 0;
        while (!heap_.empty() && heap_.top().at <= t_end) {
            Entry e = heap_.top();
            heap_.pop();
            Slot& s = slots_[e.slot];
            if (s.gen != e.gen) throw SimFault("event queue slot corruption");
            bool cancelled = (s.state == Slot::kCancelled);
            release_slot(e.slot);
            if (cancelled) continue;
            UBRSIM_CHECK(e.at >= now_, "event clock went backwards");
            now_ = e.at;
            --live_;
            ++fired_;
            ++fired_here;
            sink(e.payload, e.at);
        }
        now_ = t_end;
        return fired_here;
    }

private:
    struct Entry {
        SimTime at;
        std::uint64_t seq;
        std::uint32_t slot;
        std::uint32_t gen;
        Payload payload;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };
    struct Slot {
        enum State : std::uint8_t { kFree, kPending, kCancelled };
        std::uint32_t gen = 0;
        State state = kFree;
    };

    std::uint32_t alloc_slot() {
        std::uint32_t idx;
        if (!free_.empty()) {
            idx = free_.back();
            free_.pop_back();
        } else {
            idx = static_cast<std::uint32_t>(slots_.size());
            slots_.emplace_back();
        }
        slots_[idx].state = Slot::kPending;
        return idx;
    }

    void release_slot(std::uint32_t idx) {
        slots_[idx].state = Slot::kFree;
        ++slots_[idx].gen;
        free_.push_back(idx);
    }

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::vector<Slot> slots_;
    std::vector<std::uint32_t> free_;
    SimTime now_{0};
    std::uint64_t next_seq_ = 0;
    std::uint64_t fired_ = 0;
    std::size_t live_ = 0;
};

} // namespace ubrsim
