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
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ubrsim/atm_switch.hpp"
#include "ubrsim/event_queue.hpp"
#include "ubrsim/fault.hpp"
#include "ubrsim/framing.hpp"
#include "ubrsim/metrics.hpp"
#include "ubrsim/sim_time.hpp"
#include "ubrsim/tcp.hpp"

namespace ubrsim {

// Inputs for the N-source configuration: N sources feed switch A, one
// bottleneck link joins switch A to switch B, N destinations hang off
// switch B. ACKs ride the mirror path.
struct NetConfig {
    int n_sources = 1;
    TcpConfig tcp;
    DropPolicy policy;
    std::int64_t buffer_cells = 1000;           // K at every switch port
    std::int64_t link_rate_bps = 155520000;     // all links equal
    SimTime access_delay = SimTime::from_us(5); // host <-> switch, one way
    SimTime backbone_delay = SimTime::from_us(5); // switch <-> switch, one way
    SimTime duration = SimTime::from_s(std::int64_t{10});
    std::vector<SimTime> start_times; // per source; empty = all at t0
};

class Network {
public:
    explicit Network(const NetConfig& cfg) : cfg_(cfg) {
        UBRSIM_CHECK(cfg.n_sources >= 1, "need at least one source");
        UBRSIM_CHECK(cfg.link_rate_bps > 0, "link rate must be positive");
        UBRSIM_CHECK(cfg.access_delay.ns >= 0 && cfg.backbone_delay.ns >= 0,
                     "negative propagation delay");
        UBRSIM_CHECK(cfg.start_times.empty() ||
                         cfg.start_times.size() ==
                             static_cast<std::size_t>(cfg.n_sources),
                     "start_times size mismatch");
        const int n = cfg.n_sources;
        build_ports();
        injected_.assign(static_cast<std::size_t>(n), 0);
        delivered_.assign(static_cast<std::size_t>(n), 0);
        inflight_.assign(static_cast<std::size_t>(n), 0);
        frame_seq_fwd_.assign(static_cast<std::size_t>(n), 0);
        frame_seq_rev_.assign(static_cast<std::size_t>(n), 0);
        reasm_fwd_.resize(static_cast<std::size_t>(n));
        reasm_rev_.resize(static_cast<std::size_t>(n));
        rto_handles_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            hosts_.push_back(std::make_unique<HostAdapter>(this, i));
            senders_.push_back(std::make_unique<TcpSender>(
                static_cast<std::uint16_t>(i), cfg.tcp, *hosts_.back()));
            receivers_.emplace_back(static_cast<std::uint16_t>(i), cfg.tcp);
        }
        for (int i = 0; i < n; ++i) {
            const SimTime t0 = cfg.start_times.empty() ? SimTime{0}
                                                       : cfg.start_times[static_cast<std::size_t>(i)];
            Ev ev;
            ev.kind = EvKind::kStart;
            ev.target = i;
            q_.schedule(t0, ev);
        }
    }

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    // --- run control -----------------------------------------------------

    void run() { run_until(cfg_.duration); }

    void run_until(SimTime t_end) {
        q_.run_until(t_end, [this](const Ev& ev, SimTime at) {
            now_ = at;
            dispatch(ev, at);
            if (paranoid_) audit();
        });
        now_ = t_end;
    }

    SimTime now() const { return now_; }
    std::uint64_t events_fired() const { return q_.fired_count(); }

    // --- instrumentation --------------------------------------------------

    void set_paranoid(bool on) { paranoid_ = on; }

    // Condemn chosen (vc, frame) pairs at the bottleneck port (test rigs).
    void set_scripted_drop(std::function<bool(std::uint16_t, std::uint64_t)> fn) {
        ports_[static_cast<std::size_t>(bottleneck_)].ledger->set_scripted_drop(
            std::move(fn));
    }

    using DropLogFn =
        std::function<void(SimTime, int port, std::uint16_t vc,
                           std::uint64_t frame_id, DropReason)>;
    void set_drop_log(DropLogFn fn) { drop_log_ = std::move(fn); }

    void enable_trace(TraceWriter* tw, SimTime period) {
        UBRSIM_CHECK(period.ns > 0, "trace period must be positive");
        trace_ = tw;
        trace_period_ = period;
        Ev ev;
        ev.kind = EvKind::kSample;
        ev.target = 0;
        q_.schedule(now_ + period, ev);
    }

    // --- observers ---------------------------------------------------------

    const NetConfig& config() const { return cfg_; }
    const TcpSender& sender(int i) const { return *senders_[static_cast<std::size_t>(i)]; }
    const TcpReceiver& receiver(int i) const { return receivers_[static_cast<std::size_t>(i)]; }
    const VcLedger& bottleneck_ledger() const {
        return *ports_[static_cast<std::size_t>(bottleneck_)].ledger;
    }
    std::int64_t bottleneck_queue_cells() const {
        return static_cast<std::int64_t>(
            ports_[static_cast<std::size_t>(bottleneck_)].q.size());
    }
    std::uint64_t cells_injected(int vc) const { return injected_[static_cast<std::size_t>(vc)]; }
    std::uint64_t cells_delivered(int vc) const { return delivered_[static_cast<std::size_t>(vc)]; }

    std::uint64_t cells_dropped(int vc) const {
        std::uint64_t d = 0;
        for (const Port& p : ports_)
            if (p.ledger) d += p.ledger->vc_cells_dropped(vc);
        return d;
    }

    std::uint64_t cells_dropped_total() const {
        std::uint64_t d = 0;
        for (const Port& p : ports_)
            if (p.ledger) d += p.ledger->dropped_total();
        return d;
    }

    // Cell conservation, exact at any inter-event instant: everything a
    // host injected is delivered, dropped, sitting in a queue, or on a wire.
    void audit() const {
        for (int vc = 0; vc < cfg_.n_sources; ++vc) {
            std::uint64_t queued = 0;
            for (const Port& p : ports_) queued += queued_cells(p, vc);
            const std::uint64_t lhs = injected_[static_cast<std::size_t>(vc)];
            const std::uint64_t rhs = delivered_[static_cast<std::size_t>(vc)] +
                                      cells_dropped(vc) + queued +
                                      inflight_[static_cast<std::size_t>(vc)];
            UBRSIM_CHECK(lhs == rhs, "cell conservation broken for vc " +
                                         std::to_string(vc));
        }
        for (const Port& p : ports_)
            if (p.ledger) p.ledger->audit();
    }

    // App-level integrity: the destination saw exactly the prefix the
    // sender's cumulative ACK state says it saw.
    void check_stream_integrity() const {
        for (int i = 0; i < cfg_.n_sources; ++i) {
            const TcpSender& s = sender(i);
            const TcpReceiver& r = receiver(i);
            UBRSIM_CHECK(s.snd_una() <= r.rcv_nxt() && r.rcv_nxt() <= s.snd_max(),
                         "stream state out of bounds for vc " + std::to_string(i));
        }
    }

    RunResult result() const {
        RunResult r;
        r.n_sources = cfg_.n_sources;
        r.buffer_cells = cfg_.buffer_cells;
        r.flavor = cfg_.tcp.flavor;
        r.policy = cfg_.policy.kind;
        r.duration_s = now_.seconds();
        r.max_goodput_bps = max_goodput_bps(cfg_.link_rate_bps, cfg_.tcp.mss);
        for (int i = 0; i < cfg_.n_sources; ++i) {
            SourceResult s;
            s.delivered_bytes = receiver(i).delivered_bytes();
            s.segments_sent = sender(i).stats().segments_sent;
            s.retransmissions = sender(i).stats().retransmissions;
            s.timeouts = sender(i).stats().timeouts;
            r.timeouts += s.timeouts;
            r.retransmissions += s.retransmissions;
            r.sources.push_back(s);
        }
        r.cells_dropped = cells_dropped_total();
        finalize_result(r);
        return r;
    }

private:
    enum class EvKind : std::uint8_t {
        kStart,
        kArrival,
        kTxDone,
        kDeliverData,
        kDeliverAck,
        kRto,
        kSample,
    };

    struct Ev {
        EvKind kind{};
        std::int32_t target = 0; // port index or endpoint index
        Cell cell{};
    };

    enum class Hop : std::uint8_t { kToPort, kDemuxData, kDemuxAck, kDeliverData, kDeliverAck };

    struct Port {
        std::deque<Cell> q;
        CellClock clock;
        SimTime prop{0};
        Hop hop = Hop::kToPort;
        std::int32_t next = 0; // port index for kToPort
        std::optional<VcLedger> ledger; // none: host NIC, unbounded
        int nic_vc = -1;                // owning VC for NIC ports
        bool tx_pending = false;
        std::uint64_t nic_in = 0;
        std::uint64_t nic_out = 0;

        explicit Port(std::int64_t rate) : clock(rate) {}
    };

    struct HostAdapter final : TcpSenderHost {
        Network* net;
        int idx;
        HostAdapter(Network* n, int i) : net(n), idx(i) {}
        void emit_segment(const TcpSegment& seg, bool rexmit) override {
            (void)rexmit;
            net->emit_data(idx, seg);
        }
        void arm_rto(SimTime deadline) override { net->arm_rto(idx, deadline); }
        void disarm_rto() override { net->disarm_rto(idx); }
    };

    // Port layout; see build_ports.
    int src_nic(int i) const { return i; }
    int swb_out(int i) const { return cfg_.n_sources + 1 + i; }
    int dst_nic(int i) const { return 2 * cfg_.n_sources + 1 + i; }
    int swa_out(int i) const { return 3 * cfg_.n_sources + 2 + i; }

    void build_ports() {
        const int n = cfg_.n_sources;
        const std::int64_t rate = cfg_.link_rate_bps;
        ports_.reserve(static_cast<std::size_t>(4 * n + 2));
        for (int i = 0; i < n; ++i) { // 0..n-1: source NICs
            Port p(rate);
            p.prop = cfg_.access_delay;
            p.hop = Hop::kToPort;
            p.next = 0; // patched below once bottleneck exists
            p.nic_vc = i;
            ports_.push_back(std::move(p));
        }
        bottleneck_ = n;
        {
            Port p(rate); // n: switch A bottleneck output port
            p.prop = cfg_.backbone_delay;
            p.hop = Hop::kDemuxData;
            p.ledger.emplace(n, cfg_.buffer_cells, cfg_.policy);
            ports_.push_back(std::move(p));
        }
        for (int i = 0; i < n; ++i) { // n+1..2n: switch B access ports
            Port p(rate);
            p.prop = cfg_.access_delay;
            p.hop = Hop::kDeliverData;
            p.next = i;
            p.ledger.emplace(n, cfg_.buffer_cells, cfg_.policy);
            ports_.push_back(std::move(p));
        }
        for (int i = 0; i < n; ++i) { // 2n+1..3n: destination NICs
            Port p(rate);
            p.prop = cfg_.access_delay;
            p.hop = Hop::kToPort;
            p.nic_vc = i;
            ports_.push_back(std::move(p));
        }
        swb_rev_ = 3 * n + 1;
        {
            Port p(rate); // 3n+1: switch B reverse backbone port
            p.prop = cfg_.backbone_delay;
            p.hop = Hop::kDemuxAck;
            p.ledger.emplace(n, cfg_.buffer_cells, cfg_.policy);
            ports_.push_back(std::move(p));
        }
        for (int i = 0; i < n; ++i) { // 3n+2..4n+1: switch A access ports
            Port p(rate);
            p.prop = cfg_.access_delay;
            p.hop = Hop::kDeliverAck;
            p.next = i;
            p.ledger.emplace(n, cfg_.buffer_cells, cfg_.policy);
            ports_.push_back(std::move(p));
        }
        for (int i = 0; i < n; ++i) {
            ports_[static_cast<std::size_t>(src_nic(i))].next = bottleneck_;
            ports_[static_cast<std::size_t>(dst_nic(i))].next = swb_rev_;
        }
    }

    void dispatch(const Ev& ev, SimTime at) {
        switch (ev.kind) {
            case EvKind::kStart:
                senders_[static_cast<std::size_t>(ev.target)]->start(at);
                break;
            case EvKind::kArrival:
                --inflight_[ev.cell.vc];
                port_arrival(ev.target, ev.cell, at);
                break;
            case EvKind::kTxDone:
                port_txdone(ev.target, at);
                break;
            case EvKind::kDeliverData:
                --inflight_[ev.cell.vc];
                ++delivered_[ev.cell.vc];
                deliver_data(ev.target, ev.cell, at);
                break;
            case EvKind::kDeliverAck:
                --inflight_[ev.cell.vc];
                ++delivered_[ev.cell.vc];
                deliver_ack(ev.target, ev.cell, at);
                break;
            case EvKind::kRto:
                rto_handles_[static_cast<std::size_t>(ev.target)] = {};
                trace_transition(ev.target, at, [&] {
                    senders_[static_cast<std::size_t>(ev.target)]->on_rto(at);
                });
                break;
            case EvKind::kSample:
                emit_samples(at);
                if (at + trace_period_ <= cfg_.duration) {
                    Ev next;
                    next.kind = EvKind::kSample;
                    next.target = 0;
                    q_.schedule(at + trace_period_, next);
                }
                break;
        }
    }

    void port_arrival(std::int32_t idx, const Cell& c, SimTime at) {
        Port& p = ports_[static_cast<std::size_t>(idx)];
        if (p.ledger) {
            const VcLedger::AdmitResult res = p.ledger->admit(c);
            if (res.decision != DropDecision::kAccept) {
                if (drop_log_) drop_log_(at, idx, c.vc, c.frame_id, res.reason);
                return;
            }
        } else {
            ++p.nic_in;
        }
        p.q.push_back(c);
        if (!p.tx_pending) {
            p.tx_pending = true;
            Ev ev;
            ev.kind = EvKind::kTxDone;
            ev.target = idx;
            q_.schedule(p.clock.push(at), ev);
        }
    }

    void port_txdone(std::int32_t idx, SimTime at) {
        Port& p = ports_[static_cast<std::size_t>(idx)];
        UBRSIM_CHECK(!p.q.empty(), "transmit completion on empty port");
        const Cell c = p.q.front();
        p.q.pop_front();
        if (p.ledger) p.ledger->depart(c);
        else ++p.nic_out;
        ++inflight_[c.vc];
        Ev ev;
        ev.cell = c;
        switch (p.hop) {
            case Hop::kToPort:
                ev.kind = EvKind::kArrival;
                ev.target = p.next;
                break;
            case Hop::kDemuxData:
                ev.kind = EvKind::kArrival;
                ev.target = swb_out(c.vc);
                break;
            case Hop::kDemuxAck:
                ev.kind = EvKind::kArrival;
                ev.target = swa_out(c.vc);
                break;
            case Hop::kDeliverData:
                ev.kind = EvKind::kDeliverData;
                ev.target = p.next;
                break;
            case Hop::kDeliverAck:
                ev.kind = EvKind::kDeliverAck;
                ev.target = p.next;
                break;
        }
        q_.schedule(at + p.prop, ev);
        if (!p.q.empty()) {
            Ev next;
            next.kind = EvKind::kTxDone;
            next.target = idx;
            q_.schedule(p.clock.push(at), next);
        } else {
            p.tx_pending = false;
        }
    }

    void deliver_data(std::int32_t i, const Cell& c, SimTime at) {
        UBRSIM_CHECK(c.vc == i, "data cell delivered to wrong destination");
        const Reassembler::Result r = reasm_fwd_[static_cast<std::size_t>(i)].feed(c);
        if (!r.delivered) return;
        const TcpSegment ack = receivers_[static_cast<std::size_t>(i)].on_segment(r.seg);
        emit_ack(i, ack, at);
    }

    void deliver_ack(std::int32_t i, const Cell& c, SimTime at) {
        UBRSIM_CHECK(c.vc == i, "ack cell delivered to wrong source");
        const Reassembler::Result r = reasm_rev_[static_cast<std::size_t>(i)].feed(c);
        if (!r.delivered) return;
        UBRSIM_CHECK(r.seg.flags & kSegAck, "non-ACK segment on reverse path");
        trace_transition(i, at, [&] {
            senders_[static_cast<std::size_t>(i)]->on_ack(r.seg, at);
        });
    }

    void emit_data(int i, const TcpSegment& seg) {
        const std::uint64_t fid = ++frame_seq_fwd_[static_cast<std::size_t>(i)];
        encapsulate(seg, fid, [&](const Cell& c) {
            ++injected_[c.vc];
            port_arrival(src_nic(i), c, now_);
        });
    }

    void emit_ack(int i, const TcpSegment& seg, SimTime at) {
        const std::uint64_t fid = ++frame_seq_rev_[static_cast<std::size_t>(i)];
        encapsulate(seg, fid, [&](const Cell& c) {
            ++injected_[c.vc];
            port_arrival(dst_nic(i), c, at);
        });
    }

    void arm_rto(int i, SimTime deadline) {
        EventHandle& h = rto_handles_[static_cast<std::size_t>(i)];
        if (h.valid()) q_.cancel(h);
        Ev ev;
        ev.kind = EvKind::kRto;
        ev.target = i;
        h = q_.schedule(deadline, ev);
    }

    void disarm_rto(int i) {
        EventHandle& h = rto_handles_[static_cast<std::size_t>(i)];
        if (h.valid()) {
            q_.cancel(h);
            h = {};
        }
    }

    std::uint64_t queued_cells(const Port& p, int vc) const {
        if (p.ledger) return static_cast<std::uint64_t>(p.ledger->y(vc));
        return p.nic_vc == vc ? p.q.size() : 0;
    }

    // Wraps a sender callback so cwnd/state trace rows appear at recovery
    // entry/exit and timeouts, not just on the sampling grid.
    template <typename Fn>
    void trace_transition(int i, SimTime at, Fn&& fn) {
        if (!trace_) {
            fn();
            return;
        }
        const TcpSender& s = *senders_[static_cast<std::size_t>(i)];
        const bool rec_before = s.in_recovery();
        const std::uint64_t rto_before = s.stats().timeouts;
        fn();
        if (s.in_recovery() != rec_before || s.stats().timeouts != rto_before)
            sample_sender(i, at);
    }

    void sample_sender(int i, SimTime at) {
        const TcpSender& s = *senders_[static_cast<std::size_t>(i)];
        const std::string tag = std::to_string(i);
        trace_->row(at, "cwnd." + tag, s.cwnd());
        trace_->row(at, "ssthresh." + tag, s.ssthresh());
        trace_->row(at, "state." + tag, s.in_recovery() ? 1 : 0);
    }

    void emit_samples(SimTime at) {
        if (!trace_) return;
        for (int i = 0; i < cfg_.n_sources; ++i) sample_sender(i, at);
        const VcLedger& led = bottleneck_ledger();
        trace_->row(at, "qlen.bottleneck", led.x());
        trace_->row(at, "drops.bottleneck",
                    static_cast<std::int64_t>(led.dropped_total()));
    }

    NetConfig cfg_;
    EventQueue<Ev> q_;
    SimTime now_{0};
    bool paranoid_ = false;

    std::vector<Port> ports_;
    int bottleneck_ = 0;
    int swb_rev_ = 0;

    std::vector<std::unique_ptr<HostAdapter>> hosts_;
    std::vector<std::unique_ptr<TcpSender>> senders_;
    std::vector<TcpReceiver> receivers_;
    std::vector<Reassembler> reasm_fwd_;
    std::vector<Reassembler> reasm_rev_;
    std::vector<EventHandle> rto_handles_;
    std::vector<std::uint64_t> frame_seq_fwd_;
    std::vector<std::uint64_t> frame_seq_rev_;

    std::vector<std::uint64_t> injected_;
    std::vector<std::uint64_t> delivered_;
    std::vector<std::int64_t> inflight_;

    TraceWriter* trace_ = nullptr;
    SimTime trace_period_{0};
    DropLogFn drop_log_;
};

} // namespace ubrsim
