use super::*;
use crate::netsim::LatencyModel;

fn unit_opts(seed: u64) -> AsyncOptions {
    AsyncOptions {
        seed,
        placement: Placement::Preload,
        ..Default::default()
    }
}

#[test]
fn random_increments_oracle_is_the_join() {
    let w = Workload::new(
        WorkloadKind::RandomIncrements {
            count: 5,
            variant: VariantKind::MaxRegister,
            values: ValueDist::Explicit(vec![3, 1, 4, 1, 5]),
            targets: 1,
        },
        0,
    );
    let g = gen_workload(&w).unwrap();
    assert_eq!(g.items.len(), 5);
    assert_eq!(
        g.oracle,
        Oracle::Targets([(TargetId(0), JoinValue::MaxRegister(5))].into())
    );
}

#[test]
fn broadcast_aggregate_sizes() {
    let w = Workload::new(
        WorkloadKind::BroadcastAggregate {
            n: 4,
            consumers: 3,
            tile_size: 10,
        },
        1,
    );
    let g = gen_workload(&w).unwrap();
    assert_eq!(g.input_bytes(), 40);
    assert_eq!(g.consumption_events(), 12);
    assert_eq!(g.items.len(), 12);
    assert_eq!(g.output_bytes, 8);
}

#[test]
fn sk_workload_oracle_is_the_normal_form() {
    let w = Workload::new(WorkloadKind::SkReduce { expr: "S K K a".into() }, 0);
    assert_eq!(gen_workload(&w).unwrap().oracle, Oracle::NormalForm("a".into()));
    let omega = Workload::new(WorkloadKind::SkReduce { expr: "S I I (S I I)".replace('I', "(S K K)") }, 0);
    assert_eq!(gen_workload(&omega).unwrap().oracle, Oracle::StepLimit);
    let bad = Workload::new(WorkloadKind::SkReduce { expr: "(S K".into() }, 0);
    assert!(matches!(gen_workload(&bad), Err(DriverError::Sk(SkError::Parse(_)))));
}

#[test]
fn invalid_workloads_are_rejected() {
    let w = Workload::new(
        WorkloadKind::RandomIncrements {
            count: 3,
            variant: VariantKind::MaxRegister,
            values: ValueDist::Explicit(vec![]),
            targets: 1,
        },
        0,
    );
    assert!(matches!(gen_workload(&w), Err(DriverError::InvalidWorkload(_))));
}

#[test]
fn generation_is_deterministic() {
    let w = Workload::new(
        WorkloadKind::StreamPair {
            n: 6,
            order: ArrivalOrder::Interleaved,
            width: 3,
        },
        9,
    );
    let a = gen_workload(&w).unwrap();
    let b = gen_workload(&w).unwrap();
    assert_eq!(a.oracle, b.oracle);
    let ia: Vec<_> = a.items.iter().map(|i| i.inc.clone()).collect();
    let ib: Vec<_> = b.items.iter().map(|i| i.inc.clone()).collect();
    assert_eq!(ia, ib);
}

#[test]
fn single_executor_runs_unit_tasks_back_to_back() {
    let w = scaling_workload(1, 10, 0);
    let out = run_async(&w, 1, ChannelConfig::reliable(1), FaultConfig::none(), &unit_opts(0)).unwrap();
    assert_eq!(out.report.tasks_done, 10);
    assert_eq!(out.report.makespan, 10);
    assert!((out.report.throughput - 1.0).abs() < 1e-12);
    assert!(out.oracle_ok);
}

#[test]
fn eight_executors_speed_up_at_least_six_times() {
    let one = run_async_rounds(1, 64, LatencyModel::constant(1), 0).unwrap();
    let eight = run_async_rounds(8, 64, LatencyModel::constant(1), 0).unwrap();
    assert!(eight.throughput >= 6.0 * one.throughput, "{} vs {}", eight.throughput, one.throughput);
}

#[test]
fn bsp_with_constant_latency_takes_rounds_times_c() {
    let r = run_bsp(16, 25, LatencyModel::constant(3), 4).unwrap();
    assert_eq!(r.makespan, 75);
    assert_eq!(r.tasks_done, 400);
    assert!(r.round_max.iter().all(|&m| m == 3));
}

#[test]
fn bsp_round_is_its_slowest_task() {
    let lat = LatencyModel::pareto(1.5, 1.0).unwrap();
    let (p, rounds, seed) = (5, 7, 11);
    let r = run_bsp(p, rounds, lat, seed).unwrap();
    let mut rng = task_stream(seed);
    let samples: Vec<SimTime> = (0..p * rounds).map(|_| lat.sample(&mut rng)).collect();
    for (k, chunk) in samples.chunks(p).enumerate() {
        assert_eq!(r.round_max[k], *chunk.iter().max().unwrap());
    }
    assert_eq!(r.makespan, samples.chunks(p).map(|c| *c.iter().max().unwrap()).sum::<u64>());
}

#[test]
fn bsp_and_async_agree_on_one_executor() {
    let lat = LatencyModel::pareto(2.0, 1.0).unwrap();
    for seed in 0..5 {
        let bsp = run_bsp(1, 40, lat, seed).unwrap();
        let asy = run_async_rounds(1, 40, lat, seed).unwrap();
        assert_eq!(bsp.makespan, asy.makespan, "seed {seed}");
        assert_eq!(bsp.tasks_done, asy.tasks_done);
    }
}

#[test]
fn sk_workloads_go_through_the_sk_runner() {
    let w = Workload::new(WorkloadKind::SkReduce { expr: "K a b".into() }, 0);
    let r = run_async(&w, 2, ChannelConfig::reliable(1), FaultConfig::none(), &AsyncOptions::default());
    assert!(matches!(r, Err(DriverError::Unsupported(_))));
}

#[test]
fn fit_recovers_exact_power_laws() {
    let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&p: &f64| (p, 3.0 * p.powf(0.5))).collect();
    let f = fit_scaling_exponent(&pts).unwrap();
    assert!((f.slope - 0.5).abs() < 1e-12);
    assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(f.stderr < 1e-9);
}

#[test]
fn fit_rejects_degenerate_input() {
    assert_eq!(
        fit_scaling_exponent(&[(2.0, 1.0), (4.0, 2.0), (2.0, 1.1)]),
        Err(DriverError::TooFewPoints(2))
    );
    assert!(matches!(
        fit_scaling_exponent(&[(2.0, 1.0), (4.0, 0.0), (8.0, 1.0)]),
        Err(DriverError::NonPositive { .. })
    ));
}

#[test]
fn fit_on_noisy_data_stays_near_the_true_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pts = Vec::new();
    for p in [2.0f64, 4.0, 8.0, 16.0, 32.0] {
        for _ in 0..50 {
            let noise: f64 = rng.gen_range(-0.1..0.1);
            pts.push((p, p.powf(0.7) * noise.exp()));
        }
    }
    let f = fit_scaling_exponent(&pts).unwrap();
    assert!((f.slope - 0.7).abs() < 0.05, "{}", f.slope);
    assert!(f.half_width > 0.0 && f.half_width < 0.05);
}

#[test]
fn async_broadcast_matches_oracle_under_chaos() {
    let w = Workload::new(
        WorkloadKind::BroadcastAggregate {
            n: 6,
            consumers: 3,
            tile_size: 16,
        },
        2,
    );
    let ch = ChannelConfig {
        p_loss: 0.2,
        p_dup: 0.3,
        ..ChannelConfig::reliable(2)
    };
    for seed in 0..5 {
        let opts = AsyncOptions {
            seed,
            ..Default::default()
        };
        let out = run_async(&w, 4, ch, FaultConfig::none(), &opts).unwrap();
        assert!(out.oracle_ok, "seed {seed}");
    }
}

#[test]
fn stream_pairs_join_exactly_once() {
    for order in [ArrivalOrder::Interleaved, ArrivalOrder::AllLeftThenRight] {
        let w = Workload::new(WorkloadKind::StreamPair { n: 8, order, width: 4 }, 3);
        let ch = ChannelConfig {
            p_dup: 0.5,
            ..ChannelConfig::reliable(1)
        };
        let out = run_async(&w, 3, ch, FaultConfig::none(), &AsyncOptions::default()).unwrap();
        assert!(out.oracle_ok, "{order:?}");
    }
}

#[test]
fn single_read_amplification_is_one_plus_output() {
    let w = Workload::new(
        WorkloadKind::BroadcastAggregate {
            n: 8,
            consumers: 4,
            tile_size: 32,
        },
        0,
    );
    let run = |fetch| {
        let opts = AsyncOptions {
            placement: Placement::Feed {
                credits: None,
                pace: None,
                fetch,
            },
            ..Default::default()
        };
        run_async(&w, 2, ChannelConfig::reliable(1), FaultConfig::none(), &opts)
            .unwrap()
            .amplification()
            .unwrap()
    };
    let io = 8.0 * 32.0 + 8.0;
    assert!((run(FetchMode::SingleRead) - 1.0).abs() < 1e-12);
    assert!((run(FetchMode::MultiFetch) - (8.0 * 4.0 * 32.0 + 8.0) / io).abs() < 1e-12);
}

#[test]
fn csv_rows_have_a_fixed_header() {
    let mut r = ReportRow::new("scale");
    r.p = Some(4);
    r.throughput = Some(2.5);
    let text = rows_to_csv(&[r]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("experiment,P,seed,alpha,throughput,W_max,R_A,exponent,exponent_se,n,U"));
    assert_eq!(lines.next(), Some("scale,4,,,2.5,,,,,,"));
    assert!(rows_to_csv(&[]).starts_with("experiment,P,"));
}
