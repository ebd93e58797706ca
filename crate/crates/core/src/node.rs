//! Stateless executors with sliding-window admission.
//!
//! Each simulated node holds a bounded window of pending increments, applies
//! registered ops to them and forwards whatever the ops emit. The only durable
//! state a node keeps is the join-semilattice value of the targets it owns
//! (plus its local input partition and a record of consumed pair halves).
//! Everything in the window is volatile: a crash discards it and the senders'
//! retransmissions fill it again.
//!
//! A full window answers `Nack`; the sender retries after its ack timeout.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowError, Increment, Metadata, OpCode, OpRegistry, PairSide, PairTile, Payload};
use crate::ids::{NodeId, Rid, TargetId, TileId};
use crate::lattice::{leq, JoinValue, LatticeError};
use crate::netsim::{Actor, Delivery, LatencyModel, MsgId, Net, Reply, SimTime};

const SERVICE_TIMER: u64 = 0;
const FEED_TIMER: u64 = 1;
const SEEN_RIDS_CAPACITY: usize = 1024;

fn mix64(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Node that owns `target` among `nodes` executors. Pure function of its
/// arguments, so every node computes the same answer without a directory.
pub fn owner_of(target: TargetId, nodes: usize) -> NodeId {
    assert!(nodes >= 1, "owner_of needs at least one node");
    NodeId((mix64(target.0) % nodes as u64) as u32)
}

/// Executor a continuation increment should be sent to. Both halves of a
/// pair land on the same node; anything else is spread by tile id.
pub fn task_home(inc: &Increment, nodes: usize) -> NodeId {
    assert!(nodes >= 1, "task_home needs at least one node");
    let key = match (&inc.payload, inc.meta.op) {
        (Payload::Bytes(b), OpCode::PAIR_JOIN) => match PairTile::decode(b) {
            Ok(t) => mix64(inc.meta.target.0) ^ mix64(t.index.wrapping_add(1)),
            Err(_) => mix64(inc.meta.id.0),
        },
        _ => mix64(inc.meta.id.0),
    };
    NodeId((mix64(key) % nodes as u64) as u32)
}

/// Window capacity `W_p`, in increments and/or bytes. `None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCap {
    pub count: Option<usize>,
    pub bytes: Option<u64>,
}

impl WindowCap {
    pub fn unbounded() -> Self {
        WindowCap { count: None, bytes: None }
    }

    pub fn count(n: usize) -> Self {
        WindowCap {
            count: Some(n),
            bytes: None,
        }
    }

    pub fn fits(&self, count: usize, bytes: u64) -> bool {
        self.count.is_none_or(|c| count <= c) && self.bytes.is_none_or(|b| bytes <= b)
    }
}

/// How owned targets absorb incoming values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeMode {
    /// Lattice join.
    Lattice,
    /// Ablation: `RidKeyedSum` values are added into a plain counter with no
    /// rid bookkeeping, so every duplicate delivery counts again.
    NonIdempotentAdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecConfig {
    pub window: WindowCap,
    /// Service time of one task.
    pub service: LatencyModel,
    pub merge_mode: MergeMode,
    /// Keep every post-merge target state (and every emitted increment).
    pub record_trajectory: bool,
    /// Check `leq(old, new)` on every merge.
    pub verify_monotone: bool,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            window: WindowCap::unbounded(),
            service: LatencyModel::constant(1),
            merge_mode: MergeMode::Lattice,
            record_trajectory: false,
            verify_monotone: true,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodeError {
    #[error("{node} received a merge for target {target}, which is owned by {owner}")]
    Routing { node: NodeId, target: TargetId, owner: NodeId },
    #[error("{node} could not execute increment {rid}: {source}")]
    Flow { node: NodeId, rid: Rid, source: FlowError },
    #[error("{node} could not merge into target {target}: {source}")]
    Lattice { node: NodeId, target: TargetId, source: LatticeError },
    #[error("{node}: {reason}")]
    Pair { node: NodeId, reason: String },
}

#[derive(Debug, Clone)]
enum Origin {
    Net { msg: MsgId, from: NodeId },
    Input(usize),
}

#[derive(Debug, Clone)]
struct Entry {
    inc: Increment,
    origin: Origin,
}

#[derive(Debug, Clone)]
struct Task {
    inc: Increment,
    sources: Vec<TileId>,
    parts: Vec<Entry>,
}

/// FIFO-bounded set of recently completed rids. Only saves re-execution;
/// nothing depends on it for correctness.
#[derive(Debug, Clone, Default)]
struct SeenRids {
    set: HashSet<Rid>,
    order: VecDeque<Rid>,
}

impl SeenRids {
    fn contains(&self, rid: Rid) -> bool {
        self.set.contains(&rid)
    }

    fn insert(&mut self, rid: Rid) {
        if self.set.insert(rid) {
            self.order.push_back(rid);
            if self.order.len() > SEEN_RIDS_CAPACITY {
                let old = self.order.pop_front().unwrap();
                self.set.remove(&old);
            }
        }
    }

    fn clear(&mut self) {
        self.set.clear();
        self.order.clear();
    }
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    // durable
    targets: BTreeMap<TargetId, JoinValue>,
    added: BTreeMap<TargetId, i64>,
    input: Vec<(Increment, u64)>,
    input_done: usize,
    consumed_halves: BTreeSet<Rid>,
    // volatile
    input_next: usize,
    waiting: BTreeMap<(TargetId, u64, PairSide), Entry>,
    queue: VecDeque<Task>,
    in_service: Option<Task>,
    buffered: BTreeSet<Rid>,
    extra_acks: BTreeMap<Rid, Vec<(MsgId, NodeId)>>,
    seen: SeenRids,
    occ_count: usize,
    occ_bytes: u64,
    // diagnostics
    trajectory: Vec<(SimTime, TargetId, JoinValue)>,
    emitted: Vec<Increment>,
    monotone_violations: u64,
    nacks: u64,
    completed: u64,
    last_completion: SimTime,
}

impl NodeState {
    fn new(id: NodeId) -> Self {
        NodeState {
            id,
            targets: BTreeMap::new(),
            added: BTreeMap::new(),
            input: Vec::new(),
            input_done: 0,
            consumed_halves: BTreeSet::new(),
            input_next: 0,
            waiting: BTreeMap::new(),
            queue: VecDeque::new(),
            in_service: None,
            buffered: BTreeSet::new(),
            extra_acks: BTreeMap::new(),
            seen: SeenRids::default(),
            occ_count: 0,
            occ_bytes: 0,
            trajectory: Vec::new(),
            emitted: Vec::new(),
            monotone_violations: 0,
            nacks: 0,
            completed: 0,
            last_completion: 0,
        }
    }

    pub fn targets(&self) -> &BTreeMap<TargetId, JoinValue> {
        &self.targets
    }

    pub fn window_count(&self) -> usize {
        self.occ_count
    }

    pub fn window_bytes(&self) -> u64 {
        self.occ_bytes
    }

    /// `(time, target, state after merge)` for every merge that changed state.
    pub fn trajectory(&self) -> &[(SimTime, TargetId, JoinValue)] {
        &self.trajectory
    }

    /// Increments this node emitted, in emission order.
    pub fn emitted(&self) -> &[Increment] {
        &self.emitted
    }

    pub fn monotone_violations(&self) -> u64 {
        self.monotone_violations
    }

    pub fn nacks(&self) -> u64 {
        self.nacks
    }

    /// Tasks this node has finished.
    pub fn completed(&self) -> u64 {
        self.completed
    }

    pub fn last_completion(&self) -> SimTime {
        self.last_completion
    }

    fn admit(&mut self, size: u64) {
        self.occ_count += 1;
        self.occ_bytes += size;
    }

    fn release(&mut self, size: u64) {
        self.occ_count -= 1;
        self.occ_bytes -= size;
    }

    fn drop_volatile(&mut self) {
        self.input_next = self.input_done;
        self.waiting.clear();
        self.queue.clear();
        self.in_service = None;
        self.buffered.clear();
        self.extra_acks.clear();
        self.seen.clear();
        self.occ_count = 0;
        self.occ_bytes = 0;
    }
}

/// Debugging view of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub node: NodeId,
    pub window_count: usize,
    pub window_bytes: u64,
    pub waiting_halves: usize,
    pub queued_tasks: usize,
    pub targets: BTreeMap<String, String>,
}

impl NodeSnapshot {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }
}

/// One increment the source will introduce into the system.
#[derive(Debug, Clone)]
pub struct Feed {
    pub dst: NodeId,
    pub inc: Increment,
    /// Bytes charged to the slow-storage boundary when this feed is read.
    pub source_bytes: u64,
}

/// Injects increments from slow storage through the network. Durable: its
/// queue survives crashes of the source node.
#[derive(Debug, Clone)]
pub struct Feeder {
    src: NodeId,
    pending: VecDeque<Feed>,
    /// Maximum unacked feeds in flight.
    credits: Option<usize>,
    /// Minimum spacing between two sends.
    pace: Option<SimTime>,
    outstanding: BTreeSet<MsgId>,
    armed: bool,
}

impl Feeder {
    pub fn new(feeds: Vec<Feed>, credits: Option<usize>, pace: Option<SimTime>) -> Self {
        Feeder {
            src: NodeId(0),
            pending: feeds.into(),
            credits,
            pace,
            outstanding: BTreeSet::new(),
            armed: false,
        }
    }

    fn pump(&mut self, net: &mut Net) {
        if self.armed || !net.is_alive(self.src) {
            return;
        }
        while !self.pending.is_empty() && self.credits.is_none_or(|c| self.outstanding.len() < c) {
            let feed = self.pending.pop_front().unwrap();
            net.ledger_mut().record_source_read(feed.source_bytes);
            let msg = net.send(self.src, feed.dst, feed.inc);
            self.outstanding.insert(msg);
            if let Some(p) = self.pace {
                if !self.pending.is_empty() {
                    self.armed = true;
                    net.set_timer(self.src, p, FEED_TIMER);
                }
                return;
            }
        }
    }
}

/// The executor actor for every node of one engine.
#[derive(Debug, Clone)]
pub struct Executor {
    registry: OpRegistry,
    cfg: ExecConfig,
    workers: usize,
    nodes: Vec<NodeState>,
    feeder: Option<Feeder>,
    errors: Vec<NodeError>,
    tasks_done: u64,
}

impl Executor {
    /// `workers` executors and no source node.
    pub fn new(workers: usize, cfg: ExecConfig) -> Self {
        assert!(workers >= 1, "executor needs at least one worker");
        Executor {
            registry: OpRegistry::standard(),
            cfg,
            workers,
            nodes: (0..workers).map(|i| NodeState::new(NodeId(i as u32))).collect(),
            feeder: None,
            errors: Vec::new(),
            tasks_done: 0,
        }
    }

    /// `workers` executors plus one source node (the last id) running `feeder`.
    pub fn with_feeder(workers: usize, cfg: ExecConfig, mut feeder: Feeder) -> Self {
        let mut ex = Self::new(workers, cfg);
        let src = NodeId(workers as u32);
        ex.nodes.push(NodeState::new(src));
        feeder.src = src;
        ex.feeder = Some(feeder);
        ex
    }

    pub fn with_registry(mut self, registry: OpRegistry) -> Self {
        self.registry = registry;
        self
    }

    /// Node count the engine must be built with.
    pub fn total_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn source(&self) -> Option<NodeId> {
        self.feeder.as_ref().map(|f| f.src)
    }

    /// Place `inc` in `node`'s local input partition. Local input is durable
    /// and is pulled into the window as space allows; each pull charges
    /// `source_bytes` to the slow-storage boundary.
    pub fn preload(&mut self, node: NodeId, inc: Increment, source_bytes: u64) {
        self.nodes[node.index()].input.push((inc, source_bytes));
    }

    /// Kick off local input and the feeder. Call once before running.
    pub fn start(&mut self, net: &mut Net) {
        for i in 0..self.workers {
            let node = NodeId(i as u32);
            self.fill_from_input(net, node);
            self.maybe_start(net, node);
        }
        if let Some(f) = self.feeder.as_mut() {
            f.pump(net);
        }
    }

    pub fn node(&self, node: NodeId) -> &NodeState {
        &self.nodes[node.index()]
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn errors(&self) -> &[NodeError] {
        &self.errors
    }

    pub fn tasks_done(&self) -> u64 {
        self.tasks_done
    }

    pub fn monotone_violations(&self) -> u64 {
        self.nodes.iter().map(|n| n.monotone_violations).sum()
    }

    /// Durable state of every target, gathered from the owners.
    pub fn final_targets(&self) -> BTreeMap<TargetId, JoinValue> {
        let mut out = BTreeMap::new();
        for n in &self.nodes {
            for (t, v) in &n.targets {
                out.insert(*t, v.clone());
            }
        }
        out
    }

    /// Counter values kept under [`MergeMode::NonIdempotentAdd`].
    pub fn added_totals(&self) -> BTreeMap<TargetId, i64> {
        let mut out = BTreeMap::new();
        for n in &self.nodes {
            for (t, v) in &n.added {
                *out.entry(*t).or_insert(0) += v;
            }
        }
        out
    }

    pub fn snapshot(&self, node: NodeId) -> NodeSnapshot {
        let n = &self.nodes[node.index()];
        NodeSnapshot {
            node,
            window_count: n.occ_count,
            window_bytes: n.occ_bytes,
            waiting_halves: n.waiting.len(),
            queued_tasks: n.queue.len() + usize::from(n.in_service.is_some()),
            targets: n
                .targets
                .iter()
                .map(|(t, v)| (t.0.to_string(), v.to_canonical_text()))
                .collect(),
        }
    }

    fn check_window(&self, net: &mut Net, node: NodeId) {
        let n = &self.nodes[node.index()];
        assert!(
            self.cfg.window.fits(n.occ_count, n.occ_bytes),
            "{node}: window holds {} increments / {} bytes, over capacity {:?}",
            n.occ_count,
            n.occ_bytes,
            self.cfg.window
        );
        net.ledger_mut().record_buffer(node, n.occ_bytes);
    }

    fn merge_into(&mut self, net: &Net, node: NodeId, target: TargetId, value: &JoinValue) {
        let st = &mut self.nodes[node.index()];
        if self.cfg.merge_mode == MergeMode::NonIdempotentAdd {
            if let JoinValue::RidKeyedSum(m) = value {
                *st.added.entry(target).or_insert(0) += m.values().sum::<i64>();
                return;
            }
        }
        let state = st
            .targets
            .entry(target)
            .or_insert_with(|| JoinValue::bottom(value.kind()));
        let before = (self.cfg.verify_monotone).then(|| state.clone());
        match state.merge_from(value) {
            Err(source) => self.errors.push(NodeError::Lattice { node, target, source }),
            Ok(changed) => {
                if let Some(before) = before {
                    if !matches!(leq(&before, state), Ok(true)) {
                        st.monotone_violations += 1;
                    }
                }
                if changed && self.cfg.record_trajectory {
                    st.trajectory.push((net.now(), target, state.clone()));
                }
            }
        }
    }

    fn route_output(&mut self, net: &mut Net, node: NodeId, out: Increment) {
        if self.cfg.record_trajectory {
            self.nodes[node.index()].emitted.push(out.clone());
        }
        if out.is_merge() {
            let owner = owner_of(out.meta.target, self.workers);
            if owner == node {
                match &out.payload {
                    Payload::Value(v) => self.merge_into(net, node, out.meta.target, v),
                    Payload::Bytes(_) => self.errors.push(NodeError::Flow {
                        node,
                        rid: out.meta.rid,
                        source: FlowError::BadPayload {
                            op: OpCode::MERGE,
                            reason: "merge payload must be a value".into(),
                        },
                    }),
                }
            } else {
                net.send(node, owner, out);
            }
        } else {
            let dst = task_home(&out, self.workers);
            net.send(node, dst, out);
        }
    }

    fn fill_from_input(&mut self, net: &mut Net, node: NodeId) {
        let cap = self.cfg.window;
        let st = &mut self.nodes[node.index()];
        while st.input_next < st.input.len() {
            let (inc, source_bytes) = st.input[st.input_next].clone();
            if !cap.fits(st.occ_count + 1, st.occ_bytes + inc.size_bytes) {
                break;
            }
            net.ledger_mut().record_source_read(source_bytes);
            st.admit(inc.size_bytes);
            st.buffered.insert(inc.meta.rid);
            st.queue.push_back(Task {
                sources: vec![inc.meta.id],
                parts: vec![Entry {
                    inc: inc.clone(),
                    origin: Origin::Input(st.input_next),
                }],
                inc,
            });
            st.input_next += 1;
        }
    }

    fn maybe_start(&mut self, net: &mut Net, node: NodeId) {
        if !net.is_alive(node) {
            return;
        }
        let st = &mut self.nodes[node.index()];
        if st.in_service.is_some() {
            return;
        }
        if let Some(task) = st.queue.pop_front() {
            st.in_service = Some(task);
            let tau = self.cfg.service.sample(net.task_rng());
            net.set_timer(node, tau, SERVICE_TIMER);
        }
    }

    fn complete(&mut self, net: &mut Net, node: NodeId) {
        let Some(task) = self.nodes[node.index()].in_service.take() else {
            return;
        };
        let result = match &task.inc.payload {
            Payload::Bytes(b) => self.registry.apply_op(
                task.inc.meta.op,
                b,
                task.inc.meta.next,
                task.inc.meta.target,
                &task.sources,
            ),
            Payload::Value(_) => Err(FlowError::BadPayload {
                op: task.inc.meta.op,
                reason: "continuation payload must be raw bytes".into(),
            }),
        };
        match result {
            Ok(outs) => {
                for out in outs {
                    self.route_output(net, node, out);
                }
            }
            Err(source) => self.errors.push(NodeError::Flow {
                node,
                rid: task.inc.meta.rid,
                source,
            }),
        }
        let is_pair = task.inc.meta.op == OpCode::PAIR_JOIN;
        let st = &mut self.nodes[node.index()];
        for part in task.parts {
            let rid = part.inc.meta.rid;
            st.release(part.inc.size_bytes);
            st.buffered.remove(&rid);
            st.seen.insert(rid);
            if is_pair {
                st.consumed_halves.insert(rid);
            }
            match part.origin {
                Origin::Net { msg, from } => net.ack(node, from, msg),
                Origin::Input(i) => {
                    debug_assert_eq!(i, st.input_done, "local input completes in order");
                    st.input_done = st.input_done.max(i + 1);
                }
            }
            for (msg, from) in st.extra_acks.remove(&rid).unwrap_or_default() {
                net.ack(node, from, msg);
            }
        }
        self.tasks_done += 1;
        let now = net.now();
        let st = &mut self.nodes[node.index()];
        st.completed += 1;
        st.last_completion = now;
        net.ledger_mut().record_completion(now);
        self.fill_from_input(net, node);
        self.maybe_start(net, node);
    }

    /// Buffer one pair half; returns `false` if it was rejected outright.
    fn admit_half(&mut self, node: NodeId, entry: Entry) -> bool {
        let st = &mut self.nodes[node.index()];
        let inc = &entry.inc;
        let tile = match inc.payload.as_bytes().map(PairTile::decode) {
            Some(Ok(t)) => t,
            Some(Err(reason)) => {
                self.errors.push(NodeError::Pair { node, reason });
                return false;
            }
            None => {
                self.errors.push(NodeError::Pair {
                    node,
                    reason: "pair half must carry raw bytes".into(),
                });
                return false;
            }
        };
        let target = inc.meta.target;
        let other = match tile.side {
            PairSide::Left => PairSide::Right,
            PairSide::Right => PairSide::Left,
        };
        if st.waiting.contains_key(&(target, tile.index, tile.side)) {
            self.errors.push(NodeError::Pair {
                node,
                reason: format!("two distinct {:?} halves for pair {} of target {target}", tile.side, tile.index),
            });
            return false;
        }
        let Some(partner) = st.waiting.remove(&(target, tile.index, other)) else {
            st.waiting.insert((target, tile.index, tile.side), entry);
            return true;
        };
        let (l, r) = match tile.side {
            PairSide::Left => (entry, partner),
            PairSide::Right => (partner, entry),
        };
        let lt = PairTile::decode(l.inc.payload.as_bytes().unwrap()).unwrap();
        let rt = PairTile::decode(r.inc.payload.as_bytes().unwrap()).unwrap();
        let joined = Increment::new(
            Metadata {
                id: l.inc.meta.id,
                target,
                op: OpCode::PAIR_JOIN,
                next: l.inc.meta.next,
                rid: l.inc.meta.rid,
            },
            Payload::Bytes(PairTile::join_payload(&lt, &rt)),
        );
        st.queue.push_back(Task {
            inc: joined,
            sources: vec![l.inc.meta.id, r.inc.meta.id],
            parts: vec![l, r],
        });
        true
    }

    fn on_deliver_inner(&mut self, net: &mut Net, node: NodeId, d: &Delivery) -> Reply {
        let inc = &d.inc;
        if inc.is_merge() {
            let owner = owner_of(inc.meta.target, self.workers);
            if owner != node {
                self.errors.push(NodeError::Routing {
                    node,
                    target: inc.meta.target,
                    owner,
                });
                return Reply::Ack;
            }
            match &inc.payload {
                Payload::Value(v) => self.merge_into(net, node, inc.meta.target, v),
                Payload::Bytes(_) => self.errors.push(NodeError::Flow {
                    node,
                    rid: inc.meta.rid,
                    source: FlowError::BadPayload {
                        op: OpCode::MERGE,
                        reason: "merge payload must be a value".into(),
                    },
                }),
            }
            return Reply::Ack;
        }
        let rid = inc.meta.rid;
        let cap = self.cfg.window;
        let st = &mut self.nodes[node.index()];
        if st.seen.contains(rid) || (inc.meta.op == OpCode::PAIR_JOIN && st.consumed_halves.contains(&rid)) {
            return Reply::Ack;
        }
        if st.buffered.contains(&rid) {
            let acks = st.extra_acks.entry(rid).or_default();
            if !acks.contains(&(d.msg, d.from)) {
                acks.push((d.msg, d.from));
            }
            return Reply::Hold;
        }
        if !cap.fits(st.occ_count + 1, st.occ_bytes + inc.size_bytes) {
            st.nacks += 1;
            return Reply::Nack;
        }
        let entry = Entry {
            inc: inc.clone(),
            origin: Origin::Net { msg: d.msg, from: d.from },
        };
        if inc.meta.op == OpCode::PAIR_JOIN {
            if !self.admit_half(node, entry) {
                return Reply::Ack;
            }
        } else {
            st.queue.push_back(Task {
                inc: inc.clone(),
                sources: vec![inc.meta.id],
                parts: vec![entry],
            });
        }
        let st = &mut self.nodes[node.index()];
        st.admit(inc.size_bytes);
        st.buffered.insert(rid);
        self.maybe_start(net, node);
        Reply::Hold
    }
}

impl Actor for Executor {
    fn on_deliver(&mut self, net: &mut Net, node: NodeId, delivery: &Delivery) -> Reply {
        let reply = self.on_deliver_inner(net, node, delivery);
        self.check_window(net, node);
        reply
    }

    fn on_timer(&mut self, net: &mut Net, node: NodeId, token: u64) {
        match token {
            SERVICE_TIMER => self.complete(net, node),
            FEED_TIMER => {
                if let Some(f) = self.feeder.as_mut() {
                    f.armed = false;
                    f.pump(net);
                }
            }
            _ => {}
        }
        self.check_window(net, node);
    }

    fn on_crash(&mut self, net: &mut Net, node: NodeId) {
        self.nodes[node.index()].drop_volatile();
        if let Some(f) = self.feeder.as_mut() {
            if f.src == node {
                f.armed = false;
            }
        }
        self.check_window(net, node);
    }

    fn on_recover(&mut self, net: &mut Net, node: NodeId) {
        if node.index() < self.workers {
            self.fill_from_input(net, node);
            self.maybe_start(net, node);
        }
        if let Some(f) = self.feeder.as_mut() {
            if f.src == node {
                f.pump(net);
            }
        }
        self.check_window(net, node);
    }

    fn on_acked(&mut self, net: &mut Net, node: NodeId, msg: MsgId) {
        if let Some(f) = self.feeder.as_mut() {
            if f.src == node && f.outstanding.remove(&msg) {
                f.pump(net);
            }
        }
    }
}
