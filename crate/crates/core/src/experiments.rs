//! Seeded experiment runners behind the `sdpf` subcommands.
//!
//! Each command takes a fully resolved [`ExperimentConfig`], fans its
//! independent runs out over rayon, and assembles a [`Report`] sorted by
//! `(P, seed)`. Reports are pure functions of the config, so two runs with
//! the same config render to the same bytes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::driver::{
    fit_scaling_exponent, gen_workload, rows_to_csv, run_async, run_async_rounds, run_bsp, ArrivalOrder,
    AsyncOptions, DriverError, ExponentFit, FetchMode, Oracle, Placement, ReportRow, ValueDist, Workload,
    WorkloadKind,
};
use crate::flow::{Increment, Next, OpCode, Payload};
use crate::ids::{Rid, TargetId, TileId};
use crate::lattice::{leq, JoinValue, VariantKind};
use crate::metrics::{peak_memory, prop51_bound};
use crate::netsim::{ChannelConfig, FaultConfig, LatencyModel, NetsimError, SimTime};
use crate::node::{MergeMode, WindowCap};
use crate::sk::{
    duplicate_subtree_corpus, generate_corpus, parse, reduce_oracle, run_distributed, run_translation,
    translate_collapsed, CorpusSpec, ExprNode, SkRunConfig,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error(transparent)]
    Driver(#[from] DriverError),
    #[error(transparent)]
    Netsim(#[from] NetsimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Converge,
    Scale,
    Ioamp,
    Memory,
    Skrun,
    Ablate,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Converge,
        Experiment::Scale,
        Experiment::Ioamp,
        Experiment::Memory,
        Experiment::Skrun,
        Experiment::Ablate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Converge => "converge",
            Experiment::Scale => "scale",
            Experiment::Ioamp => "ioamp",
            Experiment::Memory => "memory",
            Experiment::Skrun => "skrun",
            Experiment::Ablate => "ablate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Fully resolved parameters of one experiment. Every field is echoed into
/// the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// First seed; runs use `seed..seed + seeds`.
    pub seed: u64,
    pub seeds: usize,
    /// Node counts. Commands that run at a single size use the first entry.
    #[serde(rename = "P_sweep")]
    pub p_sweep: Vec<usize>,
    /// Pareto tail index of task latencies (scale) or message delays (others).
    pub alpha: f64,
    /// scale: use unit task latency instead of Pareto.
    pub constant_latency: bool,
    pub rounds: usize,
    pub p_loss: f64,
    pub p_dup: f64,
    /// Crash probability per node per epoch of 10 time units.
    pub p_f: f64,
    /// Per-node window `W_p`, in increments.
    pub window: usize,
    pub n_sweep: Vec<usize>,
    /// ioamp consumer counts; 0 stands for `U = n`.
    pub consumers: Vec<usize>,
    pub tile_size: usize,
    /// memory: values per stream-pair half.
    pub width: usize,
    /// Increments per converge/ablate run.
    pub count: usize,
    pub exprs: Vec<String>,
    /// skrun: number of generated normalizing expressions added to `exprs`.
    pub corpus: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            seed: 0,
            seeds: 1,
            p_sweep: vec![4],
            alpha: 2.0,
            constant_latency: false,
            rounds: 200,
            p_loss: 0.0,
            p_dup: 0.0,
            p_f: 0.0,
            window: 8,
            n_sweep: Vec::new(),
            consumers: Vec::new(),
            tile_size: 10,
            width: 4,
            count: 64,
            exprs: Vec::new(),
            corpus: 0,
            out: None,
            format: Format::Json,
        };
        match experiment {
            Experiment::Converge => ExperimentConfig {
                seeds: 100,
                p_loss: 0.1,
                p_dup: 0.2,
                p_f: 0.01,
                ..base
            },
            Experiment::Scale => ExperimentConfig {
                seeds: 3,
                rounds: 1000,
                p_sweep: vec![2, 4, 8, 16, 32, 64, 128, 256],
                ..base
            },
            Experiment::Ioamp => ExperimentConfig {
                n_sweep: vec![4, 8, 16, 32, 64],
                consumers: vec![3, 0],
                ..base
            },
            Experiment::Memory => ExperimentConfig {
                p_sweep: vec![1],
                n_sweep: vec![100, 1000, 10_000],
                ..base
            },
            Experiment::Skrun => ExperimentConfig {
                seeds: 10,
                p_sweep: vec![3],
                p_loss: 0.1,
                p_dup: 0.3,
                p_f: 0.01,
                exprs: vec!["S x y z".into(), "K a b".into()],
                corpus: 30,
                ..base
            },
            Experiment::Ablate => ExperimentConfig {
                seeds: 100,
                p_dup: 0.3,
                count: 50,
                ..base
            },
        }
    }

    /// Defaults, then the config file, then `flags`.
    pub fn resolve(
        experiment: Experiment,
        file: Option<&Path>,
        flags: &ConfigOverrides,
    ) -> Result<Self, ExperimentError> {
        let mut cfg = Self::defaults(experiment);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let o: ConfigOverrides = toml::from_str(&text).map_err(|source| ExperimentError::Toml {
                path: path.to_path_buf(),
                source,
            })?;
            cfg.apply(&o);
        }
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &o.$f { self.$f = v.clone(); } )* };
        }
        take!(
            seed,
            seeds,
            p_sweep,
            alpha,
            constant_latency,
            rounds,
            p_loss,
            p_dup,
            p_f,
            window,
            n_sweep,
            consumers,
            tile_size,
            width,
            count,
            exprs,
            corpus,
            format
        );
        if o.out.is_some() {
            self.out = o.out.clone();
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if self.p_sweep.is_empty() || self.p_sweep.contains(&0) {
            return bad("P sweep must be non-empty with positive entries".into());
        }
        if self.alpha.is_nan() || self.alpha <= 1.0 {
            return bad(format!("alpha must exceed 1, got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.p_loss) || !(0.0..=1.0).contains(&self.p_dup) || !(0.0..1.0).contains(&self.p_f) {
            return bad("p_loss and p_f must be in [0,1), p_dup in [0,1]".into());
        }
        if self.rounds == 0 || self.window == 0 || self.tile_size == 0 || self.width == 0 || self.count == 0 {
            return bad("rounds, window, tile_size, width and count must be positive".into());
        }
        if self.n_sweep.contains(&0) {
            return bad("n sweep entries must be positive".into());
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).map(|k| self.seed + k).collect()
    }

    fn nodes(&self) -> usize {
        self.p_sweep[0]
    }

    fn chaos_channel(&self) -> Result<ChannelConfig, ExperimentError> {
        Ok(ChannelConfig {
            p_loss: self.p_loss,
            p_dup: self.p_dup,
            delay: LatencyModel::pareto(self.alpha, 1.0)?,
            ack_timeout: 20,
            max_retries: None,
            echoes: 0,
        })
    }

    fn faults(&self) -> FaultConfig {
        if self.p_f == 0.0 {
            FaultConfig::none()
        } else {
            FaultConfig {
                p_f: self.p_f,
                epoch: 10,
                recovery_delay: 10,
            }
        }
    }
}

/// Partial config: the shape of a config file and of the CLI flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigOverrides {
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    #[serde(rename = "P_sweep", alias = "p_sweep")]
    pub p_sweep: Option<Vec<usize>>,
    pub alpha: Option<f64>,
    pub constant_latency: Option<bool>,
    pub rounds: Option<usize>,
    pub p_loss: Option<f64>,
    pub p_dup: Option<f64>,
    pub p_f: Option<f64>,
    pub window: Option<usize>,
    pub n_sweep: Option<Vec<usize>>,
    pub consumers: Option<Vec<usize>>,
    pub tile_size: Option<usize>,
    pub width: Option<usize>,
    pub count: Option<usize>,
    pub exprs: Option<Vec<String>>,
    pub corpus: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

/// One independent run: its place in the sweep and what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(rename = "P")]
    pub p: usize,
    pub seed: u64,
    pub run: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub runs: Vec<RunRecord>,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(config: &ExperimentConfig, mut runs: Vec<RunRecord>, rows: Vec<ReportRow>, checks: Vec<Check>) -> Self {
        runs.sort_by_key(|r| (r.p, r.seed));
        Report {
            config: config.clone(),
            runs,
            rows,
            checks,
        }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One line per run, each carrying the config and seed, then a summary line.
    pub fn to_json_lines(&self) -> String {
        let config = serde_json::to_value(&self.config).expect("config serializes");
        let mut out = String::new();
        for r in &self.runs {
            let line = json!({
                "experiment": self.config.experiment,
                "config": config,
                "P": r.p,
                "seed": r.seed,
                "run": r.run,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        let summary = json!({
            "experiment": self.config.experiment,
            "config": config,
            "checks": self.checks,
            "pass": self.pass(),
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json_lines(),
            Format::Csv => self.to_csv(),
        }
    }

    /// SHA-256 of the JSON-lines rendering.
    pub fn digest(&self) -> String {
        hex(&Sha256::digest(self.to_json_lines().as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn state_hash(targets: &BTreeMap<TargetId, JoinValue>) -> String {
    let mut h = Sha256::new();
    for (t, v) in targets {
        h.update(t.0.to_le_bytes());
        h.update(v.to_canonical_text().as_bytes());
        h.update([0]);
    }
    hex(&h.finalize())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, ExperimentError> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Converge => cmd_converge(cfg),
        Experiment::Scale => cmd_scale(cfg),
        Experiment::Ioamp => cmd_ioamp(cfg),
        Experiment::Memory => cmd_memory(cfg),
        Experiment::Skrun => cmd_skrun(cfg),
        Experiment::Ablate => cmd_ablate(cfg),
    }
}

const VARIANTS: [VariantKind; 4] = [
    VariantKind::MaxRegister,
    VariantKind::GrowSet,
    VariantKind::RidKeyedSum,
    VariantKind::TileStore,
];

/// Outcome of one chaos convergence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRun {
    pub variant: VariantKind,
    pub oracle_match: bool,
    pub monotone: bool,
    pub final_hash: String,
    pub oracle_hash: String,
    pub trace_hash: String,
    pub tasks: u64,
    pub crashes: u64,
    pub duplicated: u64,
    pub lost: u64,
}

impl ConvergeRun {
    pub fn pass(&self) -> bool {
        self.oracle_match && self.monotone
    }
}

/// RandomIncrements of `variant` drawn from `workload_seed`, executed under
/// the config's chaos with engine seed `seed`.
pub fn converge_run(
    cfg: &ExperimentConfig,
    variant: VariantKind,
    workload_seed: u64,
    seed: u64,
) -> Result<ConvergeRun, ExperimentError> {
    let workload = Workload::new(
        WorkloadKind::RandomIncrements {
            count: cfg.count,
            variant,
            values: ValueDist::Uniform { lo: 0, hi: 1000 },
            targets: 8,
        },
        workload_seed,
    );
    let Oracle::Targets(expected) = gen_workload(&workload)?.oracle else {
        unreachable!("increment workloads have target oracles")
    };
    let opts = AsyncOptions {
        seed,
        record_trajectory: true,
        ..Default::default()
    };
    let out = run_async(&workload, cfg.nodes(), cfg.chaos_channel()?, cfg.faults(), &opts)?;
    let mut monotone = out.executor.monotone_violations() == 0 && out.executor.errors().is_empty();
    for node in out.executor.nodes() {
        let mut last: BTreeMap<TargetId, &JoinValue> = BTreeMap::new();
        for (_, t, v) in node.trajectory() {
            if let Some(prev) = last.insert(*t, v) {
                monotone &= leq(prev, v).unwrap_or(false);
            }
        }
    }
    Ok(ConvergeRun {
        variant,
        oracle_match: out.targets == expected,
        monotone,
        final_hash: state_hash(&out.targets),
        oracle_hash: state_hash(&expected),
        trace_hash: out.trace.trace_hash.clone(),
        tasks: out.executor.tasks_done(),
        crashes: out.trace.counters.crashes,
        duplicated: out.trace.counters.duplicated,
        lost: out.trace.counters.lost,
    })
}

pub fn cmd_converge(cfg: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let p = cfg.nodes();
    let results: Vec<(u64, ConvergeRun)> = cfg
        .seed_list()
        .into_par_iter()
        .map(|seed| converge_run(cfg, VARIANTS[(seed % 4) as usize], seed, seed).map(|r| (seed, r)))
        .collect::<Result<_, _>>()?;
    let passed = results.iter().filter(|(_, r)| r.pass()).count();
    let failed: Vec<u64> = results.iter().filter(|(_, r)| !r.pass()).map(|(s, _)| *s).collect();
    let rows = results
        .iter()
        .map(|(seed, _)| ReportRow {
            p: Some(p),
            seed: Some(*seed),
            alpha: Some(cfg.alpha),
            ..ReportRow::new("converge")
        })
        .collect();
    let runs = results
        .into_iter()
        .map(|(seed, r)| RunRecord {
            p,
            seed,
            run: serde_json::to_value(&r).expect("run serializes"),
        })
        .collect();
    let checks = vec![Check::new(
        "oracle_and_monotone",
        failed.is_empty(),
        format!("{passed}/{} seeds converged to the oracle; failing seeds {failed:?}", cfg.seeds),
    )];
    Ok(Report::new(cfg, runs, rows, checks))
}

/// Expected BSP throughput exponent for the config's latency model.
pub fn expected_bsp_exponent(cfg: &ExperimentConfig) -> f64 {
    if cfg.constant_latency {
        1.0
    } else {
        1.0 - 1.0 / cfg.alpha
    }
}

/// Scale of task latencies in simulated time units. Large enough that
/// rounding samples up to whole units does not bend the fitted exponents.
pub const LATENCY_SCALE: f64 = 100.0;

pub const BSP_TOLERANCE: f64 = 0.15;
pub const ASYNC_TOLERANCE: f64 = 0.1;

pub fn cmd_scale(cfg: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let latency = if cfg.constant_latency {
        LatencyModel::constant(LATENCY_SCALE as SimTime)
    } else {
        LatencyModel::pareto(cfg.alpha, LATENCY_SCALE)?
    };
    let jobs: Vec<(usize, u64)> = cfg
        .p_sweep
        .iter()
        .flat_map(|&p| cfg.seed_list().into_iter().map(move |s| (p, s)))
        .collect();
    let mut results = jobs
        .into_par_iter()
        .map(|(p, seed)| -> Result<_, ExperimentError> {
            let bsp = run_bsp(p, cfg.rounds, latency, seed)?;
            let asy = run_async_rounds(p, cfg.rounds, latency, seed)?;
            Ok((p, seed, bsp, asy))
        })
        .collect::<Result<Vec<_>, _>>()?;
    results.sort_by_key(|r| (r.0, r.1));

    let fit = |pick: &dyn Fn(&(usize, u64, _, _)) -> f64| {
        let pts: Vec<(f64, f64)> = results.iter().map(|r| (r.0 as f64, pick(r))).collect();
        fit_scaling_exponent(&pts)
    };
    let bsp_fit = fit(&|r| r.2.throughput)?;
    let async_fit = fit(&|r| r.3.steady_throughput)?;

    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (p, seed, bsp, asy) in &results {
        for (name, rep) in [("scale_bsp", bsp), ("scale_async", asy)] {
            rows.push(ReportRow {
                p: Some(*p),
                seed: Some(*seed),
                alpha: Some(cfg.alpha),
                throughput: Some(rep.steady_throughput),
                ..ReportRow::new(name)
            });
        }
        let mean_round = bsp.makespan as f64 / bsp.round_max.len() as f64;
        runs.push(RunRecord {
            p: *p,
            seed: *seed,
            run: json!({
                "bsp": {"tasks_done": bsp.tasks_done, "makespan": bsp.makespan, "throughput": bsp.throughput, "mean_round": mean_round},
                "async": {"tasks_done": asy.tasks_done, "makespan": asy.makespan, "throughput": asy.throughput, "steady_throughput": asy.steady_throughput},
            }),
        });
    }
    for (name, f) in [("scale_bsp_fit", &bsp_fit), ("scale_async_fit", &async_fit)] {
        rows.push(ReportRow {
            alpha: Some(cfg.alpha),
            exponent: Some(f.slope),
            exponent_se: Some(f.stderr),
            ..ReportRow::new(name)
        });
    }
    let expected = expected_bsp_exponent(cfg);
    let checks = vec![
        fit_check("bsp_exponent", &bsp_fit, expected, BSP_TOLERANCE),
        fit_check("async_exponent", &async_fit, 1.0, ASYNC_TOLERANCE),
    ];
    Ok(Report::new(cfg, runs, rows, checks))
}

fn fit_check(name: &str, f: &ExponentFit, expected: f64, tol: f64) -> Check {
    Check::new(
        name,
        (f.slope - expected).abs() <= tol,
        format!(
            "slope {:.4} (95% CI ±{:.4}), expected {expected:.4} ± {tol}",
            f.slope, f.half_width
        ),
    )
}

/// One BroadcastAggregate configuration in both fetch modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoampRun {
    pub n: usize,
    #[serde(rename = "U")]
    pub u: usize,
    pub multi_r_a: f64,
    pub single_r_a: f64,
    pub bound: f64,
    pub multi_q_source: u64,
    /// `|I| + |O| + sum_k (U_k - 1) * |tile_k|`: the bound in bytes.
    pub bound_bytes: u64,
    pub multi_q_net: u64,
    pub single_q_net: u64,
    pub oracle_match: bool,
}

pub fn ioamp_run(cfg: &ExperimentConfig, n: usize, u: usize, seed: u64) -> Result<IoampRun, ExperimentError> {
    let workload = Workload::new(
        WorkloadKind::BroadcastAggregate {
            n,
            consumers: u,
            tile_size: cfg.tile_size,
        },
        seed,
    );
    let g = gen_workload(&workload)?;
    let channel = ChannelConfig {
        p_loss: cfg.p_loss,
        p_dup: cfg.p_dup,
        ..ChannelConfig::reliable(1)
    };
    let run = |fetch| {
        let opts = AsyncOptions {
            seed,
            placement: Placement::Feed {
                credits: None,
                pace: None,
                fetch,
            },
            ..Default::default()
        };
        run_async(&workload, cfg.nodes(), channel, cfg.faults(), &opts)
    };
    let multi = run(FetchMode::MultiFetch)?;
    let single = run(FetchMode::SingleRead)?;
    let io_total = g.input_bytes() + g.output_bytes;
    let bound = prop51_bound(&g.tile_sizes, &g.consumption_counts, io_total).expect("generated counts are positive");
    Ok(IoampRun {
        n,
        u,
        multi_r_a: multi.amplification().expect("io_total is positive"),
        single_r_a: single.amplification().expect("io_total is positive"),
        bound,
        multi_q_source: multi.ledger.q_source_bytes(),
        bound_bytes: io_total
            + g.tile_sizes
                .iter()
                .zip(&g.consumption_counts)
                .map(|(s, u)| (u - 1) * s)
                .sum::<u64>(),
        multi_q_net: multi.ledger.q_net_bytes(),
        single_q_net: single.ledger.q_net_bytes(),
        oracle_match: multi.oracle_ok && single.oracle_ok,
    })
}

fn ioamp_configs(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &n in &cfg.n_sweep {
        let mut us: Vec<usize> = cfg.consumers.iter().map(|&u| if u == 0 { n } else { u }).collect();
        us.sort_unstable();
        us.dedup();
        out.extend(us.into_iter().map(|u| (n, u)));
    }
    out
}

pub fn cmd_ioamp(cfg: &ExperimentConfig) -> Result<Report, ExperimentError> {
    if cfg.n_sweep.is_empty() || cfg.consumers.is_empty() {
        return Err(ExperimentError::Config("ioamp needs n_sweep and consumers".into()));
    }
    let p = cfg.nodes();
    let jobs: Vec<(usize, usize, u64)> = ioamp_configs(cfg)
        .into_iter()
        .flat_map(|(n, u)| cfg.seed_list().into_iter().map(move |s| (n, u, s)))
        .collect();
    let mut results = jobs
        .into_par_iter()
        .map(|(n, u, seed)| ioamp_run(cfg, n, u, seed).map(|r| (seed, r)))
        .collect::<Result<Vec<_>, _>>()?;
    results.sort_by_key(|(seed, r)| (r.n, r.u, *seed));

    let mut rows = Vec::new();
    for (seed, r) in &results {
        for (name, r_a) in [("ioamp_multi", r.multi_r_a), ("ioamp_single", r.single_r_a)] {
            rows.push(ReportRow {
                p: Some(p),
                seed: Some(*seed),
                r_a: Some(r_a),
                n: Some(r.n),
                u: Some(r.u),
                ..ReportRow::new(name)
            });
        }
    }
    let above: Vec<_> = results.iter().filter(|(_, r)| r.multi_q_source < r.bound_bytes).map(|(_, r)| (r.n, r.u)).collect();
    let not_one: Vec<_> = results.iter().filter(|(_, r)| r.single_r_a != 1.0).map(|(_, r)| (r.n, r.u)).collect();
    let wrong: Vec<_> = results.iter().filter(|(_, r)| !r.oracle_match).map(|(_, r)| (r.n, r.u)).collect();
    let mut checks = vec![
        Check::new(
            "multi_fetch_above_bound",
            above.is_empty(),
            format!("configurations below the bound: {above:?}"),
        ),
        Check::new(
            "single_read_exactly_one",
            not_one.is_empty(),
            format!("configurations with R_A != 1: {not_one:?}"),
        ),
        Check::new("oracle", wrong.is_empty(), format!("wrong outputs: {wrong:?}")),
    ];
    let diag: Vec<(f64, f64)> = results
        .iter()
        .filter(|(_, r)| r.u == r.n)
        .map(|(_, r)| (r.n as f64, r.multi_r_a))
        .collect();
    if let Ok(f) = fit_scaling_exponent(&diag) {
        rows.push(ReportRow {
            exponent: Some(f.slope),
            exponent_se: Some(f.stderr),
            ..ReportRow::new("ioamp_multi_fit")
        });
        checks.push(fit_check("multi_fetch_linear_in_n", &f, 1.0, 0.1));
    }
    let runs = results
        .into_iter()
        .map(|(seed, r)| RunRecord {
            p,
            seed,
            run: serde_json::to_value(&r).expect("run serializes"),
        })
        .collect();
    let mut report = Report::new(cfg, runs, rows, checks);
    // keep sweep order inside one seed
    report.runs.sort_by_key(|r| (r.p, r.seed, r.run["n"].as_u64(), r.run["U"].as_u64()));
    Ok(report)
}

/// Peak buffered bytes for one StreamPair run under one memory policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryRun {
    pub n: usize,
    pub policy: MemoryPolicy,
    pub w_max: u64,
    pub increment_bytes: u64,
    pub cap_bytes: Option<u64>,
    pub oracle_match: bool,
    pub makespan: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryPolicy {
    /// All left halves first, unbounded window: nothing can be joined until
    /// the right halves arrive.
    Hoarding,
    /// Interleaved arrival, window of `W_p` increments and as many feed credits.
    SlidingWindow,
}

pub fn memory_run(
    cfg: &ExperimentConfig,
    n: usize,
    policy: MemoryPolicy,
    seed: u64,
) -> Result<MemoryRun, ExperimentError> {
    let order = match policy {
        MemoryPolicy::Hoarding => ArrivalOrder::AllLeftThenRight,
        MemoryPolicy::SlidingWindow => ArrivalOrder::Interleaved,
    };
    let workload = Workload::new(
        WorkloadKind::StreamPair {
            n,
            order,
            width: cfg.width,
        },
        seed,
    );
    let increment_bytes = gen_workload(&workload)?
        .items
        .iter()
        .map(|w| w.inc.size_bytes)
        .max()
        .unwrap_or(0);
    let (window, credits, pace) = match policy {
        MemoryPolicy::Hoarding => (WindowCap::unbounded(), None, Some(1)),
        MemoryPolicy::SlidingWindow => (WindowCap::count(cfg.window), Some(cfg.window), None),
    };
    let opts = AsyncOptions {
        seed,
        window,
        placement: Placement::Feed {
            credits,
            pace,
            fetch: FetchMode::SingleRead,
        },
        // the per-merge monotonicity self-check is linear in the output size
        verify_monotone: false,
        ..Default::default()
    };
    // The channel never loses anything here; a long ack timeout keeps held
    // halves from being resent over and over while they wait for partners.
    let channel = ChannelConfig {
        ack_timeout: 1_000_000,
        ..ChannelConfig::reliable(1)
    };
    let out = run_async(&workload, cfg.nodes(), channel, FaultConfig::none(), &opts)?;
    Ok(MemoryRun {
        n,
        policy,
        w_max: peak_memory(&out.ledger).unwrap_or(0),
        increment_bytes,
        cap_bytes: window.count.map(|c| c as u64 * increment_bytes),
        oracle_match: out.oracle_ok,
        makespan: out.report.makespan,
    })
}

pub fn cmd_memory(cfg: &ExperimentConfig) -> Result<Report, ExperimentError> {
    if cfg.n_sweep.is_empty() {
        return Err(ExperimentError::Config("memory needs n_sweep".into()));
    }
    let p = cfg.nodes();
    let seed = cfg.seed;
    let jobs: Vec<(usize, MemoryPolicy)> = cfg
        .n_sweep
        .iter()
        .flat_map(|&n| [(n, MemoryPolicy::Hoarding), (n, MemoryPolicy::SlidingWindow)])
        .collect();
    let results = jobs
        .into_par_iter()
        .map(|(n, policy)| memory_run(cfg, n, policy, seed))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows: Vec<ReportRow> = results
        .iter()
        .map(|r| ReportRow {
            p: Some(p),
            seed: Some(seed),
            w_max: Some(r.w_max),
            n: Some(r.n),
            ..ReportRow::new(match r.policy {
                MemoryPolicy::Hoarding => "memory_hoarding",
                MemoryPolicy::SlidingWindow => "memory_window",
            })
        })
        .collect();
    let hoard: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| r.policy == MemoryPolicy::Hoarding)
        .map(|r| (r.n as f64, r.w_max as f64))
        .collect();
    let window: Vec<&MemoryRun> = results.iter().filter(|r| r.policy == MemoryPolicy::SlidingWindow).collect();

    let mut checks = Vec::new();
    match fit_scaling_exponent(&hoard) {
        Ok(f) => {
            rows.push(ReportRow {
                exponent: Some(f.slope),
                exponent_se: Some(f.stderr),
                ..ReportRow::new("memory_hoarding_fit")
            });
            checks.push(Check::new(
                "hoarding_grows",
                f.slope > 0.5,
                format!("beta {:.4} ± {:.4} (must exceed 0.5)", f.slope, f.half_width),
            ));
        }
        Err(e) => checks.push(Check::new("hoarding_grows", false, e.to_string())),
    }
    let expected: Vec<u64> = window
        .iter()
        .map(|r| (cfg.window.min(2 * r.n)) as u64 * r.increment_bytes)
        .collect();
    let got: Vec<u64> = window.iter().map(|r| r.w_max).collect();
    checks.push(Check::new(
        "window_constant",
        got == expected,
        format!("W_max {got:?}, expected W_p x increment size {expected:?}"),
    ));
    let over: Vec<usize> = window
        .iter()
        .filter(|r| r.cap_bytes.is_some_and(|c| r.w_max > c))
        .map(|r| r.n)
        .collect();
    checks.push(Check::new("window_within_cap", over.is_empty(), format!("over cap at n={over:?}")));
    let wrong: Vec<usize> = results.iter().filter(|r| !r.oracle_match).map(|r| r.n).collect();
    checks.push(Check::new("oracle", wrong.is_empty(), format!("wrong outputs at n={wrong:?}")));

    let runs = results
        .into_iter()
        .map(|r| RunRecord {
            p,
            seed,
            run: serde_json::to_value(&r).expect("run serializes"),
        })
        .collect();
    let mut report = Report::new(cfg, runs, rows, checks);
    report.runs.sort_by_key(|r| (r.run["n"].as_u64(), r.run["policy"].as_str().map(str::to_owned)));
    Ok(report)
}

/// Chaos configuration used for distributed SK runs.
pub fn sk_config(cfg: &ExperimentConfig, seed: u64) -> Result<SkRunConfig, ExperimentError> {
    Ok(SkRunConfig {
        nodes: cfg.nodes(),
        channel: cfg.chaos_channel()?,
        faults: cfg.faults(),
        seed,
        max_time: 10_000_000,
        max_steps: 2_000,
    })
}

pub const ORACLE_STEPS: usize = 200;

/// The expressions `skrun` reduces: the configured ones, then the generated corpus.
pub fn skrun_exprs(cfg: &ExperimentConfig) -> Result<Vec<ExprNode>, ExperimentError> {
    let mut out = cfg
        .exprs
        .iter()
        .map(|s| parse(s).map_err(|e| ExperimentError::Config(format!("expression {s:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if cfg.corpus > 0 {
        out.extend(generate_corpus(&CorpusSpec {
            count: cfg.corpus,
            seed: cfg.seed,
            oracle_steps: ORACLE_STEPS,
            ..Default::default()
        }));
    }
    Ok(out)
}

pub fn cmd_skrun(cfg: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let exprs = skrun_exprs(cfg)?;
    let oracles: Vec<Option<ExprNode>> = exprs
        .iter()
        .map(|e| reduce_oracle(e, ORACLE_STEPS).normal_form().cloned())
        .collect();
    let first = cfg.seed;
    let jobs: Vec<(usize, u64)> = (0..exprs.len())
        .flat_map(|i| cfg.seed_list().into_iter().map(move |s| (i, s)))
        .collect();
    let mut results = jobs
        .into_par_iter()
        .map(|(i, seed)| -> Result<_, ExperimentError> {
            let sc = sk_config(cfg, seed)?;
            let run = run_distributed(&exprs[i], &sc)?;
            let nf = run.normal_form().cloned();
            let agree = nf == oracles[i];
            let mut rec = json!({
                "input": exprs[i].to_string(),
                "oracle_nf": oracles[i].as_ref().map(|e| e.to_string()),
                "distributed_nf": nf.as_ref().map(|e| e.to_string()),
                "outcome": match &run.outcome {
                    Ok(o) => format!("{o:?}"),
                    Err(e) => e.to_string(),
                },
                "steps": run.steps,
                "agree": agree,
                "monotone": run.monotone_violations == 0,
                "trace_hash": run.trace.trace_hash,
            });
            let mut dup_identical = None;
            if seed == first {
                let mut echoed = sc;
                echoed.channel.echoes = 2;
                let again = run_distributed(&exprs[i], &echoed)?;
                dup_identical = Some(again.stores == run.stores);
                rec["dup_identical"] = json!(dup_identical);
            }
            Ok((i, seed, agree && run.monotone_violations == 0, dup_identical, rec))
        })
        .collect::<Result<Vec<_>, _>>()?;
    results.sort_by_key(|r| (r.0, r.1));

    let p = cfg.nodes();
    let total = results.len();
    let agreed = results.iter().filter(|r| r.2).count();
    let disagree: Vec<(String, u64)> = results
        .iter()
        .filter(|r| !r.2)
        .map(|r| (exprs[r.0].to_string(), r.1))
        .collect();
    let dup_bad: Vec<String> = results
        .iter()
        .filter(|r| r.3 == Some(false))
        .map(|r| exprs[r.0].to_string())
        .collect();
    let checks = vec![
        Check::new(
            "oracle_agreement",
            disagree.is_empty(),
            format!("{agreed}/{total} runs agree; disagreeing {disagree:?}"),
        ),
        Check::new(
            "duplicates_bit_identical",
            dup_bad.is_empty(),
            format!("stores changed by 3x delivery: {dup_bad:?}"),
        ),
    ];
    let rows = results
        .iter()
        .map(|r| ReportRow {
            p: Some(p),
            seed: Some(r.1),
            ..ReportRow::new("skrun")
        })
        .collect();
    let runs = results
        .into_iter()
        .map(|(i, seed, _, _, mut rec)| {
            rec["index"] = json!(i);
            RunRecord { p, seed, run: rec }
        })
        .collect();
    let mut report = Report::new(cfg, runs, rows, checks);
    report.runs.sort_by_key(|r| (r.run["index"].as_u64(), r.seed));
    Ok(report)
}

/// Final counter of a rid-keyed sum of `count` unit increments when merges
/// add without rid deduplication.
pub fn rid_off_total(cfg: &ExperimentConfig, p_dup: f64, seed: u64) -> Result<i64, ExperimentError> {
    let workload = Workload::new(
        WorkloadKind::RandomIncrements {
            count: cfg.count,
            variant: VariantKind::RidKeyedSum,
            values: ValueDist::Explicit(vec![1]),
            targets: 1,
        },
        seed,
    );
    let channel = ChannelConfig {
        p_dup,
        ..ChannelConfig::reliable(1)
    };
    let opts = AsyncOptions {
        seed,
        merge_mode: MergeMode::NonIdempotentAdd,
        ..Default::default()
    };
    let out = run_async(&workload, cfg.nodes(), channel, FaultConfig::none(), &opts)?;
    Ok(out.executor.added_totals().get(&TargetId(0)).copied().unwrap_or(0))
}

/// Build attempts with one metadata field left out; each must fail.
pub fn field_ablations() -> Vec<(&'static str, Result<Increment, String>)> {
    let build = |skip: &str| {
        let mut b = Increment::builder().id(TileId(1)).rid(Rid(3)).payload(Payload::Bytes(vec![0; 8]));
        if skip != "target" {
            b = b.target(TargetId(2));
        }
        if skip != "op" {
            b = b.op(OpCode::MAX_EXTRACT);
        }
        if skip != "next" {
            b = b.next(Next::Op(OpCode::MERGE));
        }
        b.build().map_err(|e| e.to_string())
    };
    vec![("target", build("target")), ("op", build("op")), ("next", build("next"))]
}

pub fn cmd_ablate(cfg: &ExperimentConfig) -> Result<Report, ExperimentError> {
    let p = cfg.nodes();
    let seeds = cfg.seed_list();
    let totals = seeds
        .par_iter()
        .map(|&s| -> Result<_, ExperimentError> { Ok((s, rid_off_total(cfg, cfg.p_dup, s)?, rid_off_total(cfg, 0.0, s)?)) })
        .collect::<Result<Vec<_>, _>>()?;
    let oracle = cfg.count as i64;
    let exceeded = totals.iter().filter(|t| t.1 > oracle).count();
    let control_bad: Vec<u64> = totals.iter().filter(|t| t.2 != oracle).map(|t| t.0).collect();
    let need = (cfg.seeds * 9).div_ceil(10);

    let sc = sk_config(
        &ExperimentConfig {
            p_sweep: vec![3],
            p_loss: 0.1,
            p_dup: 0.3,
            p_f: 0.01,
            ..cfg.clone()
        },
        cfg.seed,
    )?;
    let collapsed = duplicate_subtree_corpus()
        .into_par_iter()
        .map(|e| -> Result<_, ExperimentError> {
            let oracle = reduce_oracle(&e, ORACLE_STEPS).normal_form().cloned();
            let run = run_translation(&translate_collapsed(&e), &sc)?;
            let nf = run.normal_form().cloned();
            let verdict = match &run.outcome {
                Err(err) => format!("integrity error: {err}"),
                Ok(_) if nf != oracle => format!(
                    "wrong normal form {}",
                    nf.as_ref().map_or_else(|| "(none)".to_string(), |n| n.to_string())
                ),
                Ok(_) => "matched oracle".to_string(),
            };
            let broken = run.outcome.is_err() || nf != oracle;
            Ok((e.to_string(), oracle.map(|o| o.to_string()), broken, verdict))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fields = field_ablations();

    let mut runs: Vec<RunRecord> = totals
        .iter()
        .map(|&(seed, total, control)| RunRecord {
            p,
            seed,
            run: json!({"ablation": "rid_off", "p_dup": cfg.p_dup, "total": total, "control_total": control, "oracle": oracle}),
        })
        .collect();
    runs.extend(collapsed.iter().enumerate().map(|(i, (e, o, broken, verdict))| RunRecord {
        p: 3,
        seed: cfg.seed,
        run: json!({"ablation": "id_collapsed", "index": i, "input": e, "oracle_nf": o, "broken": broken, "verdict": verdict}),
    }));
    runs.extend(fields.iter().map(|(field, r)| RunRecord {
        p: 0,
        seed: cfg.seed,
        run: json!({"ablation": format!("{field}_off"), "rejected": r.is_err(), "error": r.as_ref().err()}),
    }));
    let rows = totals
            .iter()
            .map(|t| ReportRow {
                p: Some(p),
                seed: Some(t.0),
                ..ReportRow::new("ablate_rid_off")
            })
            .collect();
    let checks = vec![
            Check::new(
                "rid_off_overcounts",
                exceeded >= need,
                format!("{exceeded}/{} seeds exceed the oracle {oracle} (need {need})", cfg.seeds),
            ),
            Check::new(
                "rid_off_without_duplicates_matches",
                control_bad.is_empty(),
                format!("seeds off the oracle at p_dup=0: {control_bad:?}"),
            ),
            Check::new(
                "id_collapsed_breaks",
                collapsed.iter().all(|c| c.2),
                format!(
                    "{}/{} duplicate-subtree expressions broken",
                    collapsed.iter().filter(|c| c.2).count(),
                    collapsed.len()
                ),
            ),
            Check::new(
                "missing_fields_rejected",
                fields.iter().all(|(_, r)| r.is_err()),
                fields
                    .iter()
                    .map(|(f, r)| format!("{f}: {}", r.as_ref().err().map_or("accepted", |e| e.as_str())))
                    .collect::<Vec<_>>()
                    .join("; "),
            ),
    ];
    // ablations keep their generation order, so no (P, seed) sort here
    Ok(Report {
        config: cfg.clone(),
        runs,
        rows,
        checks,
    })
}

#[cfg(test)]
mod tests;
