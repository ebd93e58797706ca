//! Deterministic discrete-event network simulator.
//!
//! Channels are fair-lossy: each transmission may be lost or duplicated and
//! every copy gets an independently sampled delay, so reordering falls out of
//! the delay distribution. Senders keep unacked messages in a durable outbox
//! and retransmit after `ack_timeout` until acked (or until `max_retries`).
//! Acks travel the same lossy channel.
//!
//! Nodes may crash, either explicitly or with probability `p_f` per epoch.
//! A crash drops the node's volatile state (the actor decides what that is),
//! discards deliveries that arrive while it is down, and invalidates its
//! pending timers. Durable state and the outbox survive.
//!
//! Events pop in `(time, seq)` order; all randomness comes from seeded
//! ChaCha streams, so a run is a pure function of its inputs and seed.

mod latency;
mod report;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::flow::Increment;
use crate::ids::NodeId;
use crate::metrics::{MetricsLedger, ACK_BYTES};

pub use latency::{sample_pareto, LatencyModel, ParetoParams};
pub use report::{Counters, TraceReport};

/// Simulated time in integer units.
pub type SimTime = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetsimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("not quiescent at t={at}: {pending_events} events and {unacked} unacked messages pending")]
    NotQuiescent {
        at: SimTime,
        pending_events: usize,
        unacked: usize,
        report: Box<TraceReport>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub p_loss: f64,
    pub p_dup: f64,
    pub delay: LatencyModel,
    pub ack_timeout: SimTime,
    /// `None` = retransmit forever.
    pub max_retries: Option<u32>,
    /// Forced duplication: every delivered copy is handed to the receiver
    /// this many extra times, back to back. The replies to the extra copies
    /// are discarded, so the random schedule is exactly that of a run with
    /// `echoes = 0`.
    #[serde(default)]
    pub echoes: u32,
}

impl ChannelConfig {
    pub fn reliable(delay: SimTime) -> Self {
        ChannelConfig {
            p_loss: 0.0,
            p_dup: 0.0,
            delay: LatencyModel::constant(delay),
            ack_timeout: delay * 4 + 1,
            max_retries: None,
            echoes: 0,
        }
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        if !(0.0..1.0).contains(&self.p_loss) {
            return Err(NetsimError::InvalidConfig(format!("p_loss must be in [0,1), got {}", self.p_loss)));
        }
        if !(0.0..=1.0).contains(&self.p_dup) {
            return Err(NetsimError::InvalidConfig(format!("p_dup must be in [0,1], got {}", self.p_dup)));
        }
        if self.ack_timeout == 0 {
            return Err(NetsimError::InvalidConfig("ack_timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultConfig {
    /// Crash probability per node per epoch.
    pub p_f: f64,
    pub epoch: SimTime,
    pub recovery_delay: SimTime,
}

impl FaultConfig {
    pub fn none() -> Self {
        FaultConfig {
            p_f: 0.0,
            epoch: 1,
            recovery_delay: 1,
        }
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        if !(0.0..1.0).contains(&self.p_f) {
            return Err(NetsimError::InvalidConfig(format!("p_f must be in [0,1), got {}", self.p_f)));
        }
        if self.epoch == 0 || self.recovery_delay == 0 {
            return Err(NetsimError::InvalidConfig("epoch and recovery_delay must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MsgId(pub u64);

/// A message as seen by its receiver.
#[derive(Debug, Clone)]
pub struct Delivery {
    pub msg: MsgId,
    pub from: NodeId,
    pub inc: Increment,
}

/// Receiver's answer to a delivery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reply {
    Ack,
    /// Refused (e.g. window full); the sender retries after its timeout.
    Nack,
    /// Accepted but not yet complete; the actor acks later via [`Net::ack`].
    Hold,
}

/// Application logic driven by the engine. All callbacks run sequentially on
/// the engine's single timeline.
pub trait Actor {
    fn on_deliver(&mut self, net: &mut Net, node: NodeId, delivery: &Delivery) -> Reply;

    fn on_timer(&mut self, _net: &mut Net, _node: NodeId, _token: u64) {}

    fn on_crash(&mut self, _net: &mut Net, _node: NodeId) {}

    fn on_recover(&mut self, _net: &mut Net, _node: NodeId) {}

    /// `node`'s message `msg` was acknowledged by its receiver.
    fn on_acked(&mut self, _net: &mut Net, _node: NodeId, _msg: MsgId) {}
}

#[derive(Debug, Clone)]
enum EventKind {
    Deliver { msg: MsgId, src: NodeId, dst: NodeId, inc: Box<Increment> },
    Ack { msg: MsgId, to: NodeId },
    Timeout { msg: MsgId },
    Crash { node: NodeId },
    Recover { node: NodeId },
    Timer { node: NodeId, incarnation: u32, token: u64 },
    EpochTick,
}

impl EventKind {
    fn is_work(&self) -> bool {
        matches!(
            self,
            EventKind::Deliver { .. } | EventKind::Ack { .. } | EventKind::Timeout { .. } | EventKind::Timer { .. }
        )
    }
}

#[derive(Debug)]
struct Scheduled {
    time: SimTime,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

#[derive(Debug, Clone)]
struct Pending {
    src: NodeId,
    dst: NodeId,
    inc: Increment,
    attempts: u32,
}

#[derive(Debug, Clone, Copy)]
struct NodeStatus {
    alive: bool,
    incarnation: u32,
    recover_at: SimTime,
}

/// Engine state visible to actors: clock, send/ack/timer primitives, the
/// metrics ledger and a task-level random stream.
pub struct Net {
    now: SimTime,
    seq: u64,
    queue: BinaryHeap<Reverse<Scheduled>>,
    work_events: usize,
    tick_scheduled: bool,
    chan_rng: ChaCha8Rng,
    fault_rng: ChaCha8Rng,
    task_rng: ChaCha8Rng,
    seed: u64,
    channel: ChannelConfig,
    faults: FaultConfig,
    nodes: Vec<NodeStatus>,
    outbox: BTreeMap<MsgId, Pending>,
    next_msg: u64,
    ledger: MetricsLedger,
    counters: Counters,
    hasher: Sha256,
}

impl Net {
    fn new(nodes: usize, channel: ChannelConfig, faults: FaultConfig, seed: u64) -> Self {
        // Independent streams so that actor randomness never perturbs the
        // channel's decisions and vice versa.
        let [chan_rng, fault_rng, task_rng] = split_streams(seed);
        Net {
            now: 0,
            seq: 0,
            queue: BinaryHeap::new(),
            work_events: 0,
            tick_scheduled: false,
            chan_rng,
            fault_rng,
            task_rng,
            seed,
            channel,
            faults,
            nodes: vec![
                NodeStatus {
                    alive: true,
                    incarnation: 0,
                    recover_at: 0,
                };
                nodes
            ],
            outbox: BTreeMap::new(),
            next_msg: 0,
            ledger: MetricsLedger::new(nodes),
            counters: Counters::default(),
            hasher: Sha256::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_alive(&self, node: NodeId) -> bool {
        self.nodes[node.index()].alive
    }

    pub fn ledger(&self) -> &MetricsLedger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut MetricsLedger {
        &mut self.ledger
    }

    /// Random stream reserved for actors (task service times and the like).
    pub fn task_rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.task_rng
    }

    pub fn unacked(&self) -> usize {
        self.outbox.len()
    }

    fn schedule(&mut self, time: SimTime, kind: EventKind) {
        if kind.is_work() {
            self.work_events += 1;
        }
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse(Scheduled { time, seq, kind }));
    }

    /// Reliable-by-retransmission send. Returns the message id used in acks.
    pub fn send(&mut self, src: NodeId, dst: NodeId, inc: Increment) -> MsgId {
        let msg = MsgId(self.next_msg);
        self.next_msg += 1;
        self.counters.sent += 1;
        self.outbox.insert(
            msg,
            Pending {
                src,
                dst,
                inc,
                attempts: 0,
            },
        );
        self.transmit(msg);
        let t = self.now + self.channel.ack_timeout;
        self.schedule(t, EventKind::Timeout { msg });
        msg
    }

    fn transmit(&mut self, msg: MsgId) {
        let Some(p) = self.outbox.get(&msg) else {
            return;
        };
        let (src, dst, inc) = (p.src, p.dst, p.inc.clone());
        self.counters.transmissions += 1;
        if self.chan_rng.gen::<f64>() < self.channel.p_loss {
            self.counters.lost += 1;
            return;
        }
        let copies = if self.chan_rng.gen::<f64>() < self.channel.p_dup { 2 } else { 1 };
        self.counters.duplicated += copies - 1;
        for _ in 0..copies {
            let delay = self.channel.delay.sample(&mut self.chan_rng);
            self.ledger.record_net(inc.size_bytes);
            self.schedule(
                self.now + delay,
                EventKind::Deliver {
                    msg,
                    src,
                    dst,
                    inc: Box::new(inc.clone()),
                },
            );
        }
    }

    /// Acknowledge `msg` from `from` back to its sender `to`.
    pub fn ack(&mut self, from: NodeId, to: NodeId, msg: MsgId) {
        let _ = from;
        self.counters.acks_sent += 1;
        self.ledger.record_net(ACK_BYTES);
        if self.chan_rng.gen::<f64>() < self.channel.p_loss {
            self.counters.acks_lost += 1;
            return;
        }
        let delay = self.channel.delay.sample(&mut self.chan_rng);
        self.schedule(self.now + delay, EventKind::Ack { msg, to });
    }

    /// Fire `on_timer(node, token)` after `delay`, unless the node crashes first.
    pub fn set_timer(&mut self, node: NodeId, delay: SimTime, token: u64) {
        let incarnation = self.nodes[node.index()].incarnation;
        self.schedule(
            self.now + delay,
            EventKind::Timer {
                node,
                incarnation,
                token,
            },
        );
    }

    /// Schedule a crash of `node` at time `at`.
    pub fn inject_crash(&mut self, node: NodeId, at: SimTime) {
        self.schedule(at.max(self.now), EventKind::Crash { node });
    }

    fn hash_event(&mut self, time: SimTime, tag: u8, a: u64, b: u64, c: u128) {
        self.hasher.update(time.to_le_bytes());
        self.hasher.update([tag]);
        self.hasher.update(a.to_le_bytes());
        self.hasher.update(b.to_le_bytes());
        self.hasher.update(c.to_le_bytes());
    }

    fn maybe_schedule_tick(&mut self) {
        if self.faults.p_f > 0.0 && !self.tick_scheduled && self.work_events > 0 {
            self.tick_scheduled = true;
            let t = self.now + self.faults.epoch;
            self.schedule(t, EventKind::EpochTick);
        }
    }
}

fn split_streams(seed: u64) -> [ChaCha8Rng; 3] {
    let mut root = ChaCha8Rng::seed_from_u64(seed);
    [(); 3].map(|_| ChaCha8Rng::seed_from_u64(root.gen()))
}

/// The stream an engine seeded with `seed` hands out via [`Net::task_rng`].
/// Lets analytic drivers consume exactly the samples an engine run would.
pub fn task_stream(seed: u64) -> ChaCha8Rng {
    let [_, _, task] = split_streams(seed);
    task
}

/// One simulated timeline: the network plus the actor it drives.
pub struct Engine<A: Actor> {
    net: Net,
    actor: A,
}

impl<A: Actor> Engine<A> {
    pub fn new(
        nodes: usize,
        channel: ChannelConfig,
        faults: FaultConfig,
        seed: u64,
        actor: A,
    ) -> Result<Self, NetsimError> {
        if nodes == 0 {
            return Err(NetsimError::InvalidConfig("at least one node is required".into()));
        }
        channel.validate()?;
        faults.validate()?;
        Ok(Engine {
            net: Net::new(nodes, channel, faults, seed),
            actor,
        })
    }

    pub fn net(&self) -> &Net {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Net {
        &mut self.net
    }

    pub fn actor(&self) -> &A {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut A {
        &mut self.actor
    }

    /// Run a closure with both halves borrowed, e.g. to inject initial sends.
    pub fn with<R>(&mut self, f: impl FnOnce(&mut A, &mut Net) -> R) -> R {
        f(&mut self.actor, &mut self.net)
    }

    pub fn into_parts(self) -> (A, Net) {
        (self.actor, self.net)
    }

    pub fn ledger(&self) -> &MetricsLedger {
        &self.net.ledger
    }

    /// Process events until the queue drains or the next event lies beyond
    /// `max_time`.
    pub fn run_until_quiescent(&mut self, max_time: SimTime) -> Result<TraceReport, NetsimError> {
        self.net.maybe_schedule_tick();
        while let Some(Reverse(ev)) = self.net.queue.pop() {
            if ev.time > max_time {
                self.net.queue.push(Reverse(ev));
                let report = self.report(false);
                return Err(NetsimError::NotQuiescent {
                    at: self.net.now,
                    pending_events: self.net.queue.len(),
                    unacked: self.net.outbox.len(),
                    report: Box::new(report),
                });
            }
            if ev.kind.is_work() {
                self.net.work_events -= 1;
            }
            self.net.now = ev.time;
            self.net.counters.events += 1;
            self.dispatch(ev.time, ev.kind);
        }
        Ok(self.report(true))
    }

    fn dispatch(&mut self, time: SimTime, kind: EventKind) {
        let net = &mut self.net;
        match kind {
            EventKind::Deliver { msg, src, dst, inc } => {
                net.hash_event(time, 1, msg.0, dst.0 as u64, inc.meta.rid.0);
                if !net.nodes[dst.index()].alive {
                    net.counters.dropped_at_down_node += 1;
                    return;
                }
                net.counters.delivered += 1;
                let delivery = Delivery {
                    msg,
                    from: src,
                    inc: *inc,
                };
                match self.actor.on_deliver(net, dst, &delivery) {
                    Reply::Ack => net.ack(dst, src, msg),
                    Reply::Nack => net.counters.nacks += 1,
                    Reply::Hold => {}
                }
                for _ in 0..net.channel.echoes {
                    net.counters.echoes += 1;
                    let _ = self.actor.on_deliver(net, dst, &delivery);
                }
            }
            EventKind::Ack { msg, to } => {
                net.hash_event(time, 2, msg.0, to.0 as u64, 0);
                if !net.nodes[to.index()].alive {
                    return;
                }
                if net.outbox.remove(&msg).is_some() {
                    net.counters.acked += 1;
                    self.actor.on_acked(net, to, msg);
                }
            }
            EventKind::Timeout { msg } => {
                net.hash_event(time, 3, msg.0, 0, 0);
                let Some(p) = net.outbox.get_mut(&msg) else {
                    return;
                };
                let src = p.src;
                let status = net.nodes[src.index()];
                if !status.alive {
                    let t = status.recover_at.max(time + 1);
                    net.schedule(t, EventKind::Timeout { msg });
                    return;
                }
                p.attempts += 1;
                if let Some(max) = net.channel.max_retries {
                    if p.attempts > max {
                        net.outbox.remove(&msg);
                        net.counters.gave_up += 1;
                        return;
                    }
                }
                net.counters.retransmissions += 1;
                net.transmit(msg);
                let t = time + net.channel.ack_timeout;
                net.schedule(t, EventKind::Timeout { msg });
            }
            EventKind::Crash { node } => {
                net.hash_event(time, 4, node.0 as u64, 0, 0);
                let st = &mut net.nodes[node.index()];
                if !st.alive {
                    return;
                }
                st.alive = false;
                st.incarnation += 1;
                st.recover_at = time + net.faults.recovery_delay;
                let t = st.recover_at;
                net.counters.crashes += 1;
                self.actor.on_crash(net, node);
                net.schedule(t, EventKind::Recover { node });
            }
            EventKind::Recover { node } => {
                net.hash_event(time, 5, node.0 as u64, 0, 0);
                let st = &mut net.nodes[node.index()];
                if st.alive {
                    return;
                }
                st.alive = true;
                net.counters.recoveries += 1;
                self.actor.on_recover(net, node);
            }
            EventKind::Timer {
                node,
                incarnation,
                token,
            } => {
                net.hash_event(time, 6, node.0 as u64, token, 0);
                let st = net.nodes[node.index()];
                if !st.alive || st.incarnation != incarnation {
                    return;
                }
                self.actor.on_timer(net, node, token);
            }
            EventKind::EpochTick => {
                net.hash_event(time, 7, 0, 0, 0);
                net.tick_scheduled = false;
                for i in 0..net.nodes.len() {
                    if net.nodes[i].alive && net.fault_rng.gen::<f64>() < net.faults.p_f {
                        net.schedule(time, EventKind::Crash { node: NodeId(i as u32) });
                    }
                }
            }
        }
        self.net.maybe_schedule_tick();
    }

    fn report(&self, quiescent: bool) -> TraceReport {
        let net = &self.net;
        TraceReport {
            seed: net.seed,
            nodes: net.nodes.len(),
            channel: net.channel,
            faults: net.faults,
            counters: net.counters.clone(),
            final_time: net.now,
            quiescent,
            unacked: net.outbox.len() as u64,
            trace_hash: hex_digest(net.hasher.clone()),
            ledger: net.ledger.summary(),
        }
    }
}

fn hex_digest(h: Sha256) -> String {
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
