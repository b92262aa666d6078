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
#include <cstdlib>

#include "ubrsim/fault.hpp"
#include "ubrsim/framing.hpp"
#include "ubrsim/scoreboard.hpp"
#include "ubrsim/sim_time.hpp"

namespace ubrsim {

enum class TcpFlavor : std::uint8_t { kVanilla, kReno, kNewReno, kSack };

inline const char* to_string(TcpFlavor f) {
    switch (f) {
        case TcpFlavor::kVanilla: return "vanilla";
        case TcpFlavor::kReno: return "reno";
        case TcpFlavor::kNewReno: return "newreno";
        case TcpFlavor::kSack: return "sack";
    }
    return "?";
}

struct TcpConfig {
    int mss = 512;
    std::int64_t rcvwnd = 65536; // advertised window, already scaled
    int wscale = 0;              // informational; rcvwnd is the effective value
    TcpFlavor flavor = TcpFlavor::kSack;
    bool ack_counting = true;
    bool sack_uses_recover = true;       // RECOVER-based full/partial ACKs in SACK mode
    std::int64_t initial_ssthresh = 0;   // 0 = rcvwnd (unbounded slow start)
    SimTime rto_granularity = SimTime::from_ms(500);
    int min_rto_ticks = 2;
    SimTime max_rto = SimTime::from_s(std::int64_t{64});
};

// Congestion-avoidance increment. The classic per-ACK step is
// MSS*MSS/cwnd in integer bytes, which is 0 once cwnd > MSS*MSS and freezes
// the window. The ACK-counting fix accumulates N ACKs until N*MSS*MSS
// exceeds cwnd, then applies the whole batch at once.
class CaAccumulator {
public:
    std::int64_t on_ack(std::int64_t mss, std::int64_t cwnd, bool ack_counting) {
        const std::int64_t mss2 = mss * mss;
        if (!ack_counting) return mss2 / cwnd; // may be 0: the original bug
        ++acks_;
        const std::int64_t sum = acks_ * mss2;
        if (sum <= cwnd) return 0;
        acks_ = 0;
        return sum / cwnd;
    }
    void reset() { acks_ = 0; }
    std::int64_t pending_acks() const { return acks_; }

private:
    std::int64_t acks_ = 0;
};

// Where a sender's segments go and who owns its retransmission timer.
class TcpSenderHost {
public:
    virtual ~TcpSenderHost() = default;
    virtual void emit_segment(const TcpSegment& seg, bool retransmission) = 0;
    virtual void arm_rto(SimTime deadline) = 0; // replaces any pending timer
    virtual void disarm_rto() = 0;
};

// One TCP sender with a persistent (always-ready) application. Sequence
// numbers start at 0 and must not wrap; runs are far below 2^31 bytes.
class TcpSender {
public:
    struct Stats {
        std::uint64_t segments_sent = 0;
        std::uint64_t retransmissions = 0;
        std::uint64_t timeouts = 0;
        std::uint64_t recovery_episodes = 0;
        std::uint64_t dup_acks_in = 0;
        std::uint64_t acks_in = 0;
        SimTime first_ack_at{-1};
        SimTime last_recovery_enter{-1};
        SimTime last_recovery_exit{-1};
        SimTime last_retransmit_at{-1};
    };

    TcpSender(std::uint16_t vc, const TcpConfig& cfg, TcpSenderHost& host)
        : vc_(vc), cfg_(cfg), host_(host) {
        UBRSIM_CHECK(cfg.mss > 0, "mss must be positive");
        UBRSIM_CHECK(cfg.rcvwnd >= 2 * cfg.mss, "advertised window below 2 MSS");
        cwnd_ = cfg.mss;
        ssthresh_ = cfg.initial_ssthresh > 0 ? cfg.initial_ssthresh : cfg.rcvwnd;
        UBRSIM_CHECK(ssthresh_ >= 2 * cfg.mss, "initial ssthresh below 2 MSS");
    }

    void start(SimTime now) {
        UBRSIM_CHECK(!started_, "sender started twice");
        started_ = true;
        try_send(now);
    }

    void on_ack(const TcpSegment& a, SimTime now) {
        UBRSIM_CHECK(a.ack <= snd_max_, "ACK beyond highest sequence sent");
        ++stats_.acks_in;
        if (stats_.first_ack_at.ns < 0) stats_.first_ack_at = now;
        if (cfg_.flavor == TcpFlavor::kSack && a.n_sack > 0)
            table_.apply_sack(a.sack, a.n_sack, snd_max_);
        if (a.ack > snd_una_)
            handle_new_ack(a.ack, now);
        else if (a.ack == snd_una_ && snd_max_ > snd_una_)
            handle_dup_ack(now);
        try_send(now);
    }

    // Retransmission timer fired. Slow-start restart from snd_una.
    void on_rto(SimTime now) {
        UBRSIM_CHECK(snd_max_ > snd_una_, "RTO with nothing outstanding");
        timer_armed_ = false;
        ++stats_.timeouts;
        ssthresh_ = std::max(cwnd_ / 2, std::int64_t{2} * cfg_.mss);
        set_cwnd(cfg_.mss);
        in_recovery_ = false;
        pipe_ = 0;
        dup_ack_count_ = 0;
        ca_.reset();
        if (uses_recover()) recover_ = snd_max_;
        if (cfg_.flavor == TcpFlavor::kSack) table_.clear_marks(snd_una_);
        snd_nxt_ = snd_una_;
        timing_ = false; // Karn: everything from here on is a retransmission
        backoff_ = std::min(backoff_ * 2, std::int64_t{1} << 12);
        restart_rto_timer(now);
        try_send(now); // cwnd is 1 MSS: exactly one retransmission leaves
    }

    std::int64_t cwnd() const { return cwnd_; }
    std::int64_t ssthresh() const { return ssthresh_; }
    std::int64_t pipe() const { return pipe_; }
    bool in_recovery() const { return in_recovery_; }
    std::uint32_t snd_una() const { return snd_una_; }
    std::uint32_t snd_nxt() const { return snd_nxt_; }
    std::uint32_t snd_max() const { return snd_max_; }
    int dup_ack_count() const { return dup_ack_count_; }
    bool rto_pending() const { return timer_armed_; }
    const Stats& stats() const { return stats_; }
    const TcpConfig& config() const { return cfg_; }
    const SendTable& scoreboard() const { return table_; }

private:
    bool uses_recover() const {
        return cfg_.flavor == TcpFlavor::kNewReno ||
               (cfg_.flavor == TcpFlavor::kSack && cfg_.sack_uses_recover);
    }

    void set_cwnd(std::int64_t w) {
        cwnd_ = std::clamp(w, static_cast<std::int64_t>(cfg_.mss), cfg_.rcvwnd);
    }

    void handle_new_ack(std::uint32_t ack, SimTime now) {
        const bool was_recovery = in_recovery_;
        snd_una_ = ack;
        if (snd_nxt_ < snd_una_) snd_nxt_ = snd_una_;
        dup_ack_count_ = 0;
        backoff_ = 1;
        if (cfg_.flavor == TcpFlavor::kSack) table_.prune(ack);
        if (timing_ && ack > rtt_seq_) {
            rtt_sample(now - rtt_sent_at_);
            timing_ = false;
        }
        if (was_recovery) {
            switch (cfg_.flavor) {
                case TcpFlavor::kReno:
                    exit_recovery(now); // any new ACK ends Reno recovery
                    break;
                case TcpFlavor::kNewReno:
                    if (ack >= recover_) {
                        exit_recovery(now);
                    } else {
                        forced_retransmit(now); // partial ACK: next expected segment
                    }
                    break;
                case TcpFlavor::kSack:
                    if (!cfg_.sack_uses_recover || ack >= recover_) {
                        exit_recovery(now);
                    } else {
                        pipe_ = std::max<std::int64_t>(pipe_ - 2 * cfg_.mss, 0);
                    }
                    break;
                case TcpFlavor::kVanilla:
                    UBRSIM_CHECK(false, "vanilla cannot be in fast recovery");
            }
        } else {
            grow_cwnd();
        }
        if (snd_una_ == snd_max_) {
            if (timer_armed_) {
                host_.disarm_rto();
                timer_armed_ = false;
            }
        } else {
            restart_rto_timer(now);
        }
    }

    void handle_dup_ack(SimTime now) {
        ++dup_ack_count_;
        ++stats_.dup_acks_in;
        if (cfg_.flavor == TcpFlavor::kVanilla) return; // wait for RTO
        if (in_recovery_) {
            if (cfg_.flavor == TcpFlavor::kSack)
                pipe_ = std::max<std::int64_t>(pipe_ - cfg_.mss, 0);
            else
                set_cwnd(cwnd_ + cfg_.mss); // inflate
            return;
        }
        if (dup_ack_count_ != 3) return;
        if (uses_recover() && snd_una_ < recover_) return; // dups for pre-reset data
        enter_recovery(now);
    }

    void enter_recovery(SimTime now) {
        ++stats_.recovery_episodes;
        stats_.last_recovery_enter = now;
        in_recovery_ = true;
        ca_.reset();
        if (uses_recover()) recover_ = snd_max_;
        ssthresh_ = std::max(cwnd_ / 2, std::int64_t{2} * cfg_.mss);
        if (cfg_.flavor == TcpFlavor::kSack) {
            const std::int64_t old_cwnd = cwnd_;
            forced_retransmit(now);
            pipe_ = std::max<std::int64_t>(old_cwnd - 3 * cfg_.mss, 0);
            set_cwnd(ssthresh_);
        } else {
            set_cwnd(ssthresh_ + 3 * cfg_.mss);
            forced_retransmit(now);
        }
    }

    void exit_recovery(SimTime now) {
        in_recovery_ = false;
        pipe_ = 0;
        set_cwnd(ssthresh_);
        stats_.last_recovery_exit = now;
    }

    void grow_cwnd() {
        if (cwnd_ < ssthresh_)
            set_cwnd(cwnd_ + cfg_.mss); // slow start
        else
            set_cwnd(cwnd_ + ca_.on_ack(cfg_.mss, cwnd_, cfg_.ack_counting));
    }

    // Retransmit the first unacknowledged segment outside the normal send
    // window accounting (fast retransmit, New Reno partial-ACK fill).
    void forced_retransmit(SimTime now) {
        send_data(snd_una_, /*rexmit=*/true, now);
        if (cfg_.flavor == TcpFlavor::kSack) table_.mark_retransmitted(snd_una_);
    }

    bool can_send_new() const {
        return static_cast<std::int64_t>(snd_max_ - snd_una_) + cfg_.mss <=
               cfg_.rcvwnd;
    }

    void send_new(SimTime now) {
        const std::uint32_t seq = snd_max_;
        UBRSIM_CHECK(snd_max_ + static_cast<std::uint32_t>(cfg_.mss) <
                         (1u << 31),
                     "sequence space exhausted");
        if (cfg_.flavor == TcpFlavor::kSack)
            table_.extend(seq, seq + cfg_.mss);
        snd_max_ += cfg_.mss;
        snd_nxt_ = snd_max_;
        send_data(seq, /*rexmit=*/false, now);
    }

    void send_data(std::uint32_t seq, bool rexmit, SimTime now) {
        TcpSegment s;
        s.vc = vc_;
        s.flags = kSegData;
        s.seq = seq;
        s.payload_len = static_cast<std::uint32_t>(cfg_.mss);
        ++stats_.segments_sent;
        if (rexmit) {
            ++stats_.retransmissions;
            stats_.last_retransmit_at = now;
            if (timing_ && seq <= rtt_seq_) timing_ = false; // Karn's rule
        } else if (!timing_) {
            timing_ = true;
            rtt_seq_ = seq;
            rtt_sent_at_ = now;
        }
        host_.emit_segment(s, rexmit);
    }

    void try_send(SimTime now) {
        if (!started_) return;
        if (cfg_.flavor == TcpFlavor::kSack && in_recovery_) {
            // Pipe-gated: holes in the scoreboard before any new data.
            while (pipe_ < cwnd_) {
                if (auto h = table_.next_hole()) {
                    send_data(h->left, /*rexmit=*/true, now);
                    table_.mark_retransmitted(h->left);
                } else if (can_send_new()) {
                    send_new(now);
                } else {
                    break;
                }
                pipe_ += cfg_.mss;
            }
        } else {
            const std::int64_t wnd = std::min(cwnd_, cfg_.rcvwnd);
            while (static_cast<std::int64_t>(snd_nxt_ - snd_una_) + cfg_.mss <=
                   wnd) {
                if (snd_nxt_ < snd_max_) {
                    // Walking old data (after an RTO pullback).
                    if (cfg_.flavor == TcpFlavor::kSack &&
                        table_.is_sacked(snd_nxt_)) {
                        snd_nxt_ += cfg_.mss;
                        continue;
                    }
                    send_data(snd_nxt_, /*rexmit=*/true, now);
                    snd_nxt_ += cfg_.mss;
                } else {
                    send_new(now);
                }
            }
        }
        if (snd_max_ > snd_una_ && !timer_armed_) restart_rto_timer(now);
    }

    void rtt_sample(SimTime m) {
        if (!have_srtt_) {
            srtt_ns_ = m.ns;
            rttvar_ns_ = m.ns / 2;
            have_srtt_ = true;
            return;
        }
        const std::int64_t delta = m.ns - srtt_ns_;
        srtt_ns_ += delta / 8;
        rttvar_ns_ += (std::abs(delta) - rttvar_ns_) / 4;
    }

    SimTime current_rto() const {
        const std::int64_t gran = cfg_.rto_granularity.ns;
        std::int64_t rto;
        if (!have_srtt_) {
            rto = cfg_.min_rto_ticks * gran;
        } else {
            rto = srtt_ns_ + 4 * rttvar_ns_;
            rto = (rto + gran - 1) / gran * gran; // round up to a tick
            rto = std::max(rto, cfg_.min_rto_ticks * gran);
        }
        rto *= backoff_;
        return SimTime{std::min(rto, cfg_.max_rto.ns)};
    }

    void restart_rto_timer(SimTime now) {
        host_.arm_rto(now + current_rto());
        timer_armed_ = true;
    }

    std::uint16_t vc_;
    TcpConfig cfg_;
    TcpSenderHost& host_;

    bool started_ = false;
    std::uint32_t snd_una_ = 0;
    std::uint32_t snd_nxt_ = 0;
    std::uint32_t snd_max_ = 0;
    std::int64_t cwnd_ = 0;
    std::int64_t ssthresh_ = 0;
    std::int64_t pipe_ = 0;
    std::uint32_t recover_ = 0;
    bool in_recovery_ = false;
    int dup_ack_count_ = 0;
    CaAccumulator ca_;
    SendTable table_;

    // RTT estimation (one timed segment at a time, Karn's rule).
    bool timing_ = false;
    std::uint32_t rtt_seq_ = 0;
    SimTime rtt_sent_at_{0};
    bool have_srtt_ = false;
    std::int64_t srtt_ns_ = 0;
    std::int64_t rttvar_ns_ = 0;
    std::int64_t backoff_ = 1;
    bool timer_armed_ = false;

    Stats stats_;
};

// Receiving endpoint: immediate ACK per data segment (delayed ACKs are off),
// out-of-order data held aside and reported via SACK blocks when enabled.
class TcpReceiver {
public:
    TcpReceiver(std::uint16_t vc, const TcpConfig& cfg) : vc_(vc), cfg_(cfg) {}

    TcpSegment on_segment(const TcpSegment& data) {
        UBRSIM_CHECK(data.flags & kSegData, "receiver fed a non-data segment");
        UBRSIM_CHECK(data.payload_len > 0, "empty data segment");
        const std::uint32_t end = data.seq + data.payload_len;
        ++segments_in_;
        if (end <= rcv_nxt_) {
            // Stale duplicate; the ACK below re-states the edge.
        } else if (data.seq <= rcv_nxt_) {
            rcv_nxt_ = blocks_.absorb(end);
        } else {
            blocks_.insert(data.seq, end);
        }
        TcpSegment ack;
        ack.vc = vc_;
        ack.flags = kSegAck;
        ack.ack = rcv_nxt_;
        if (cfg_.flavor == TcpFlavor::kSack && !blocks_.empty())
            ack.n_sack = static_cast<std::uint8_t>(blocks_.fill_sack_option(ack.sack));
        ++acks_out_;
        return ack;
    }

    std::uint32_t rcv_nxt() const { return rcv_nxt_; }
    std::uint64_t delivered_bytes() const { return rcv_nxt_; }
    std::uint64_t segments_in() const { return segments_in_; }
    std::uint64_t acks_out() const { return acks_out_; }
    const RecvBlocks& blocks() const { return blocks_; }

private:
    std::uint16_t vc_;
    TcpConfig cfg_;
    std::uint32_t rcv_nxt_ = 0;
    RecvBlocks blocks_;
    std::uint64_t segments_in_ = 0;
    std::uint64_t acks_out_ = 0;
};

} // namespace ubrsim
