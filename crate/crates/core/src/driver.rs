//! Workload generators and the two scheduling drivers: barrier-less
//! asynchronous execution on the simulator, and bulk-synchronous rounds.
//!
//! The BSP driver is analytic at task granularity: a round lasts as long as
//! its slowest task. The async driver runs the real executors.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{derive_rid, encode_value, tile_id_for, Increment, Metadata, Next, OpCode, PairSide, PairTile, Payload, Provenance};
use crate::ids::{NodeId, Rid, TargetId, TileId};
use crate::lattice::{join_all, JoinValue, TileCell, TileKind, VariantKind};
use crate::metrics::{amplification, MetricsLedger};
use crate::netsim::{task_stream, ChannelConfig, Engine, FaultConfig, LatencyModel, NetsimError, SimTime, TraceReport};
use crate::node::{task_home, ExecConfig, Executor, Feed, Feeder, MergeMode, WindowCap};
use crate::sk::{parse, reduce_oracle, Reduction, SkError};

/// Op code stamped into the provenance of generated input tiles.
const WORKLOAD_OP: u16 = 0xF000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),
    #[error("need at least 3 distinct P values to fit an exponent, got {0}")]
    TooFewPoints(usize),
    #[error("cannot fit a log-log line through non-positive value {value} at P={p}")]
    NonPositive { p: f64, value: f64 },
    #[error("no quiescence by t={at}: {pending_events} events and {unacked} unacked messages pending")]
    Timeout {
        at: SimTime,
        pending_events: usize,
        unacked: usize,
    },
    #[error("{0} workloads are not run by this driver")]
    Unsupported(&'static str),
    #[error(transparent)]
    Netsim(NetsimError),
    #[error(transparent)]
    Sk(#[from] SkError),
}

impl From<NetsimError> for DriverError {
    fn from(e: NetsimError) -> Self {
        match e {
            NetsimError::NotQuiescent {
                at,
                pending_events,
                unacked,
                ..
            } => DriverError::Timeout {
                at,
                pending_events,
                unacked,
            },
            e => DriverError::Netsim(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueDist {
    /// Value `i` is `values[i % len]`.
    Explicit(Vec<i64>),
    /// Uniform over `lo..=hi`.
    Uniform { lo: i64, hi: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalOrder {
    Interleaved,
    AllLeftThenRight,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorkloadKind {
    /// `n` input tiles of `tile_size` bytes, each consumed by `consumers`
    /// tasks that fold into one `MaxRegister` output.
    BroadcastAggregate { n: usize, consumers: usize, tile_size: usize },
    /// `n` left/right tile pairs, each pair joined once into a rid-keyed sum.
    StreamPair { n: usize, order: ArrivalOrder, width: usize },
    SkReduce { expr: String },
    /// `count` unit tasks, task `i` lifting one value into target `i % targets`.
    RandomIncrements {
        count: usize,
        variant: VariantKind,
        values: ValueDist,
        targets: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workload {
    pub kind: WorkloadKind,
    pub seed: u64,
}

impl Workload {
    pub fn new(kind: WorkloadKind, seed: u64) -> Self {
        Workload { kind, seed }
    }

    pub fn validate(&self) -> Result<(), DriverError> {
        let bad = |m: &str| Err(DriverError::InvalidWorkload(m.to_string()));
        match &self.kind {
            WorkloadKind::BroadcastAggregate { n, consumers, tile_size } => {
                if *n == 0 || *consumers == 0 || *tile_size == 0 {
                    return bad("n, consumers and tile_size must be positive");
                }
            }
            WorkloadKind::StreamPair { n, width, .. } => {
                if *n == 0 || *width == 0 {
                    return bad("n and width must be positive");
                }
            }
            WorkloadKind::SkReduce { expr } => {
                parse(expr).map_err(SkError::from)?;
            }
            WorkloadKind::RandomIncrements {
                count, values, targets, ..
            } => {
                if *count == 0 || *targets == 0 {
                    return bad("count and targets must be positive");
                }
                match values {
                    ValueDist::Explicit(v) if v.is_empty() => return bad("explicit value list is empty"),
                    ValueDist::Uniform { lo, hi } if lo > hi => return bad("uniform range is empty"),
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// What a completed run must produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Oracle {
    Targets(BTreeMap<TargetId, JoinValue>),
    NormalForm(String),
    StepLimit,
}

/// One unit of input: a task increment and the input tile it reads.
#[derive(Debug, Clone)]
pub struct WorkItem {
    pub inc: Increment,
    pub tile: usize,
}

#[derive(Debug, Clone)]
pub struct GeneratedWorkload {
    pub items: Vec<WorkItem>,
    pub oracle: Oracle,
    /// Size of each distinct input tile.
    pub tile_sizes: Vec<u64>,
    /// How many items read each tile.
    pub consumption_counts: Vec<u64>,
    pub output_bytes: u64,
}

impl GeneratedWorkload {
    /// `|I|`.
    pub fn input_bytes(&self) -> u64 {
        self.tile_sizes.iter().sum()
    }

    pub fn consumption_events(&self) -> u64 {
        self.consumption_counts.iter().sum()
    }
}

/// Bytes of a value as written to storage (its encoding minus the variant tag).
pub fn value_bytes(v: &JoinValue) -> u64 {
    encode_value(v).len() as u64 - 1
}

fn input_rid(seed: u64, i: usize, part: u32) -> Rid {
    derive_rid(&Provenance::new(vec![TileId(seed), TileId(i as u64)], WORKLOAD_OP, 0, part))
}

const STORE_ORACLE_STEPS: usize = 1000;

/// Task increments plus the expected result, computed by direct sequential
/// evaluation. Deterministic in `workload.seed`.
pub fn gen_workload(workload: &Workload) -> Result<GeneratedWorkload, DriverError> {
    workload.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(workload.seed);
    match &workload.kind {
        WorkloadKind::RandomIncrements {
            count,
            variant,
            values,
            targets,
        } => {
            let mut items = Vec::with_capacity(*count);
            let mut per_target: BTreeMap<TargetId, Vec<JoinValue>> = BTreeMap::new();
            let mut sizes = Vec::with_capacity(*count);
            for i in 0..*count {
                let v = match values {
                    ValueDist::Explicit(vs) => vs[i % vs.len()],
                    ValueDist::Uniform { lo, hi } => rng.gen_range(*lo..=*hi),
                };
                let rid = input_rid(workload.seed, i, 0);
                let value = match variant {
                    VariantKind::MaxRegister => JoinValue::MaxRegister(v),
                    VariantKind::GrowSet => JoinValue::GrowSet([v.to_le_bytes().to_vec()].into()),
                    VariantKind::RidKeyedSum => JoinValue::single_contribution(rid, v),
                    VariantKind::TileStore => {
                        let cell_rid = Rid(rng.gen_range(0..4));
                        let cell = if rng.gen_bool(0.3) {
                            TileCell::tombstone(cell_rid)
                        } else {
                            let kind = match rng.gen_range(0..3) {
                                0 => TileKind::S,
                                1 => TileKind::K,
                                _ => TileKind::Var(format!("v{}", v.rem_euclid(5))),
                            };
                            TileCell::present(kind, cell_rid)
                        };
                        JoinValue::single_tile(TileId(v.rem_euclid(8) as u64), cell)
                    }
                };
                let target = TargetId((i % targets) as u64);
                let inc = Increment::lift(target, rid, &value);
                sizes.push(inc.payload.encoded_len());
                per_target.entry(target).or_default().push(value);
                items.push(WorkItem { inc, tile: i });
            }
            let oracle: BTreeMap<_, _> = per_target
                .into_iter()
                .map(|(t, vs)| (t, join_all(&vs).expect("one variant per workload")))
                .collect();
            let output_bytes = oracle.values().map(value_bytes).sum();
            Ok(GeneratedWorkload {
                items,
                oracle: Oracle::Targets(oracle),
                consumption_counts: vec![1; sizes.len()],
                tile_sizes: sizes,
                output_bytes,
            })
        }
        WorkloadKind::BroadcastAggregate { n, consumers, tile_size } => {
            let target = TargetId(0);
            let mut items = Vec::with_capacity(n * consumers);
            let mut best = i64::MIN;
            for k in 0..*n {
                let bytes: Vec<u8> = (0..*tile_size).map(|_| rng.gen()).collect();
                let sum: i64 = bytes.iter().map(|&b| b as i64).sum();
                for c in 0..*consumers {
                    best = best.max(sum * (c as i64 + 1));
                    let rid = input_rid(workload.seed, k * consumers + c, 1);
                    let mut payload = (c as u32).to_le_bytes().to_vec();
                    payload.extend_from_slice(&bytes);
                    let inc = Increment::new(
                        Metadata {
                            id: tile_id_for(rid),
                            target,
                            op: OpCode::CONSUME_TILE,
                            next: Next::Op(OpCode::MERGE),
                            rid,
                        },
                        Payload::Bytes(payload),
                    );
                    items.push(WorkItem { inc, tile: k });
                }
            }
            let out = JoinValue::MaxRegister(best);
            Ok(GeneratedWorkload {
                items,
                output_bytes: value_bytes(&out),
                oracle: Oracle::Targets([(target, out)].into()),
                tile_sizes: vec![*tile_size as u64; *n],
                consumption_counts: vec![*consumers as u64; *n],
            })
        }
        WorkloadKind::StreamPair { n, order, width } => {
            let target = TargetId(0);
            let mut lefts = Vec::with_capacity(*n);
            let mut rights = Vec::with_capacity(*n);
            let mut contributions = BTreeMap::new();
            for i in 0..*n {
                let half = |side: PairSide, part: u32, rng: &mut ChaCha8Rng| {
                    let values: Vec<i64> = (0..*width).map(|_| rng.gen_range(-100..=100)).collect();
                    let rid = input_rid(workload.seed, i, 2 + part);
                    let tile = PairTile {
                        index: i as u64,
                        side,
                        values,
                    };
                    let inc = Increment::new(
                        Metadata {
                            id: tile_id_for(rid),
                            target,
                            op: OpCode::PAIR_JOIN,
                            next: Next::Op(OpCode::MERGE),
                            rid,
                        },
                        Payload::Bytes(tile.encode()),
                    );
                    (inc, tile)
                };
                let (li, lt) = half(PairSide::Left, 0, &mut rng);
                let (ri, rt) = half(PairSide::Right, 1, &mut rng);
                let dot: i64 = lt.values.iter().zip(&rt.values).map(|(a, b)| a * b).sum();
                let out_rid = derive_rid(&Provenance::new(
                    vec![li.meta.id, ri.meta.id],
                    OpCode::PAIR_JOIN.0,
                    0,
                    0,
                ));
                contributions.insert(out_rid, dot);
                lefts.push(li);
                rights.push(ri);
            }
            let mut items = Vec::with_capacity(2 * n);
            let mut push = |inc: Increment| {
                let tile = items.len();
                items.push(WorkItem { inc, tile });
            };
            match order {
                ArrivalOrder::Interleaved => {
                    for (l, r) in lefts.into_iter().zip(rights) {
                        push(l);
                        push(r);
                    }
                }
                ArrivalOrder::AllLeftThenRight => {
                    lefts.into_iter().chain(rights).for_each(push);
                }
            }
            let sizes: Vec<u64> = items.iter().map(|w| w.inc.payload.encoded_len()).collect();
            let out = JoinValue::RidKeyedSum(contributions);
            Ok(GeneratedWorkload {
                items,
                output_bytes: 8,
                oracle: Oracle::Targets([(target, out)].into()),
                consumption_counts: vec![1; sizes.len()],
                tile_sizes: sizes,
            })
        }
        WorkloadKind::SkReduce { expr } => {
            let e = parse(expr).map_err(SkError::from)?;
            let (oracle, output_bytes) = match reduce_oracle(&e, STORE_ORACLE_STEPS) {
                Reduction::NormalForm { expr, .. } => {
                    let s = expr.to_string();
                    let len = s.len() as u64;
                    (Oracle::NormalForm(s), len)
                }
                Reduction::StepLimit { .. } => (Oracle::StepLimit, 0),
            };
            Ok(GeneratedWorkload {
                items: Vec::new(),
                oracle,
                tile_sizes: vec![expr.len() as u64],
                consumption_counts: vec![1],
                output_bytes,
            })
        }
    }
}

/// How tiles leave slow storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FetchMode {
    /// Every consumer reads its tile from storage independently.
    MultiFetch,
    /// Each tile is read once and replicated over the network.
    SingleRead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Placement {
    /// Item `k` starts in node `k % P`'s local input.
    Preload,
    /// A source node sends every item to its executor over the network.
    Feed {
        credits: Option<usize>,
        pace: Option<SimTime>,
        fetch: FetchMode,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsyncOptions {
    pub seed: u64,
    pub service: LatencyModel,
    pub window: WindowCap,
    pub placement: Placement,
    pub merge_mode: MergeMode,
    pub record_trajectory: bool,
    pub verify_monotone: bool,
    pub max_time: SimTime,
}

impl Default for AsyncOptions {
    fn default() -> Self {
        AsyncOptions {
            seed: 0,
            service: LatencyModel::constant(1),
            window: WindowCap::unbounded(),
            placement: Placement::Feed {
                credits: None,
                pace: None,
                fetch: FetchMode::SingleRead,
            },
            merge_mode: MergeMode::Lattice,
            record_trajectory: false,
            verify_monotone: true,
            max_time: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    #[serde(rename = "P")]
    pub p: usize,
    pub tasks_done: u64,
    pub makespan: SimTime,
    pub throughput: f64,
    /// Completions per time unit while every executor still has work: up to
    /// the earliest time some executor finishes its last task. Equals
    /// `throughput` for BSP, whose rounds all end together.
    pub steady_throughput: f64,
    /// Per-round maximum task latency (BSP only).
    pub round_max: Vec<SimTime>,
}

impl ThroughputReport {
    fn new(p: usize, tasks_done: u64, makespan: SimTime, round_max: Vec<SimTime>) -> Self {
        let throughput = if makespan == 0 {
            0.0
        } else {
            tasks_done as f64 / makespan as f64
        };
        ThroughputReport {
            p,
            tasks_done,
            makespan,
            throughput,
            steady_throughput: throughput,
            round_max,
        }
    }
}

/// Everything a finished async run leaves behind.
#[derive(Debug, Clone)]
pub struct AsyncOutcome {
    pub report: ThroughputReport,
    pub trace: TraceReport,
    pub executor: Executor,
    pub ledger: MetricsLedger,
    pub targets: BTreeMap<TargetId, JoinValue>,
    pub oracle_ok: bool,
}

impl AsyncOutcome {
    /// Source-boundary amplification, output write included.
    pub fn amplification(&self) -> Option<f64> {
        amplification(&self.ledger).ok()
    }
}

/// Run `workload` on `p` executors with no barriers: every task runs as
/// soon as its input is in an executor's window.
pub fn run_async(
    workload: &Workload,
    p: usize,
    channel: ChannelConfig,
    faults: FaultConfig,
    opts: &AsyncOptions,
) -> Result<AsyncOutcome, DriverError> {
    if p == 0 {
        return Err(DriverError::InvalidWorkload("P must be at least 1".into()));
    }
    if matches!(workload.kind, WorkloadKind::SkReduce { .. }) {
        return Err(DriverError::Unsupported("SK reduction (use sk::run_distributed)"));
    }
    let g = gen_workload(workload)?;
    let cfg = ExecConfig {
        window: opts.window,
        service: opts.service,
        merge_mode: opts.merge_mode,
        record_trajectory: opts.record_trajectory,
        verify_monotone: opts.verify_monotone,
    };
    let executor = match opts.placement {
        Placement::Preload => {
            let mut ex = Executor::new(p, cfg);
            let mut charged = vec![false; g.tile_sizes.len()];
            for (k, item) in g.items.iter().enumerate() {
                let bytes = if std::mem::replace(&mut charged[item.tile], true) {
                    0
                } else {
                    g.tile_sizes[item.tile]
                };
                ex.preload(NodeId((k % p) as u32), item.inc.clone(), bytes);
            }
            ex
        }
        Placement::Feed { credits, pace, fetch } => {
            let mut charged = vec![false; g.tile_sizes.len()];
            let feeds = g
                .items
                .iter()
                .map(|item| {
                    let first = !std::mem::replace(&mut charged[item.tile], true);
                    let source_bytes = if first || fetch == FetchMode::MultiFetch {
                        g.tile_sizes[item.tile]
                    } else {
                        0
                    };
                    Feed {
                        dst: task_home(&item.inc, p),
                        inc: item.inc.clone(),
                        source_bytes,
                    }
                })
                .collect();
            Executor::with_feeder(p, cfg, Feeder::new(feeds, credits, pace))
        }
    };
    let mut eng = Engine::new(executor.total_nodes(), channel, faults, opts.seed, executor)?;
    eng.net_mut().ledger_mut().set_io(g.input_bytes(), g.output_bytes);
    eng.with(|a, net| a.start(net));
    let trace = eng.run_until_quiescent(opts.max_time)?;
    let (executor, net) = eng.into_parts();
    let mut ledger = net.ledger().clone();
    ledger.record_source_write(g.output_bytes);
    let makespan = ledger.completions().iter().copied().max().unwrap_or(0);
    let mut report = ThroughputReport::new(p, executor.tasks_done(), makespan, Vec::new());
    let horizon = executor.nodes()[..p]
        .iter()
        .map(|n| n.last_completion())
        .min()
        .unwrap_or(0);
    if horizon > 0 {
        let done = ledger.completions().iter().filter(|&&t| t <= horizon).count();
        report.steady_throughput = done as f64 / horizon as f64;
    }
    let targets = executor.final_targets();
    let oracle_ok = match &g.oracle {
        Oracle::Targets(expected) => opts.merge_mode == MergeMode::Lattice && &targets == expected,
        _ => false,
    };
    Ok(AsyncOutcome {
        report,
        trace,
        executor,
        ledger,
        targets,
        oracle_ok,
    })
}

/// Bulk-synchronous rounds of `p` tasks each. A round ends when its slowest
/// task does. Samples come from the same stream an engine seeded with
/// `seed` hands its tasks, drawn round by round, node by node.
pub fn run_bsp(p: usize, rounds: usize, latency: LatencyModel, seed: u64) -> Result<ThroughputReport, DriverError> {
    if p == 0 || rounds == 0 {
        return Err(DriverError::InvalidWorkload("P and rounds must be at least 1".into()));
    }
    let mut rng = task_stream(seed);
    let round_max: Vec<SimTime> = (0..rounds)
        .map(|_| (0..p).map(|_| latency.sample(&mut rng)).max().unwrap())
        .collect();
    let makespan = round_max.iter().sum();
    Ok(ThroughputReport::new(p, (p * rounds) as u64, makespan, round_max))
}

/// Unit-task workload for scaling runs: `rounds` tasks per executor.
pub fn scaling_workload(p: usize, rounds: usize, seed: u64) -> Workload {
    Workload::new(
        WorkloadKind::RandomIncrements {
            count: p * rounds,
            variant: VariantKind::MaxRegister,
            values: ValueDist::Uniform { lo: 0, hi: 1_000_000 },
            targets: p,
        },
        seed,
    )
}

/// Async counterpart of [`run_bsp`]: `rounds` preloaded tasks per executor.
pub fn run_async_rounds(p: usize, rounds: usize, latency: LatencyModel, seed: u64) -> Result<ThroughputReport, DriverError> {
    let opts = AsyncOptions {
        seed,
        service: latency,
        placement: Placement::Preload,
        verify_monotone: false,
        ..Default::default()
    };
    let out = run_async(
        &scaling_workload(p, rounds, seed),
        p,
        ChannelConfig::reliable(1),
        FaultConfig::none(),
        &opts,
    )?;
    Ok(out.report)
}

/// Least-squares line through `(ln P, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// 95% normal-approximation half-width, `1.96 * stderr`.
    pub half_width: f64,
    pub points: usize,
}

pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<ExponentFit, DriverError> {
    for &(p, value) in points {
        if value.is_nan() || p.is_nan() || value <= 0.0 || p <= 0.0 {
            return Err(DriverError::NonPositive { p, value });
        }
    }
    let mut distinct: Vec<f64> = points.iter().map(|&(p, _)| p).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(DriverError::TooFewPoints(distinct.len()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|&(p, _)| p.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if points.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ExponentFit {
        slope,
        intercept,
        stderr,
        half_width: 1.96 * stderr,
        points: points.len(),
    })
}

/// One CSV summary row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    #[serde(rename = "P")]
    pub p: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub throughput: Option<f64>,
    #[serde(rename = "W_max")]
    pub w_max: Option<u64>,
    #[serde(rename = "R_A")]
    pub r_a: Option<f64>,
    pub exponent: Option<f64>,
    pub exponent_se: Option<f64>,
    pub n: Option<usize>,
    #[serde(rename = "U")]
    pub u: Option<usize>,
}

impl ReportRow {
    pub fn new(experiment: &str) -> Self {
        ReportRow {
            experiment: experiment.to_string(),
            p: None,
            seed: None,
            alpha: None,
            throughput: None,
            w_max: None,
            r_a: None,
            exponent: None,
            exponent_se: None,
            n: None,
            u: None,
        }
    }
}

/// Render rows as CSV with a header line.
pub fn rows_to_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    if rows.is_empty() {
        w.write_record([
            "experiment",
            "P",
            "seed",
            "alpha",
            "throughput",
            "W_max",
            "R_A",
            "exponent",
            "exponent_se",
            "n",
            "U",
        ])
        .expect("header writes");
    }
    String::from_utf8(w.into_inner().expect("csv flushes")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests;
