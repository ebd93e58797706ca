//! Unit increments pushed through a lossy, duplicating network with node
//! crashes still converge to the sequential join.
//!
//!     cargo run --example chaos_converge -- [seed]

use sdpf::driver::{gen_workload, run_async, AsyncOptions, Oracle, ValueDist, Workload, WorkloadKind};
use sdpf::netsim::{ChannelConfig, FaultConfig, LatencyModel};
use sdpf::node::owner_of;
use sdpf::{TargetId, VariantKind};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let workload = Workload::new(
        WorkloadKind::RandomIncrements {
            count: 200,
            variant: VariantKind::RidKeyedSum,
            values: ValueDist::Uniform { lo: -10, hi: 10 },
            targets: 4,
        },
        seed,
    );
    let channel = ChannelConfig {
        p_loss: 0.1,
        p_dup: 0.2,
        delay: LatencyModel::pareto(2.0, 1.0).unwrap(),
        ack_timeout: 20,
        max_retries: None,
        echoes: 0,
    };
    let faults = FaultConfig {
        p_f: 0.02,
        epoch: 10,
        recovery_delay: 15,
    };
    let opts = AsyncOptions {
        seed,
        ..Default::default()
    };
    let out = run_async(&workload, 4, channel, faults, &opts).unwrap();
    let Oracle::Targets(expected) = gen_workload(&workload).unwrap().oracle else {
        unreachable!()
    };
    let c = &out.trace.counters;
    println!(
        "seed {seed}: {} tasks, {} lost, {} duplicated, {} retransmitted, {} crashes",
        out.report.tasks_done, c.lost, c.duplicated, c.retransmissions, c.crashes
    );
    for (target, value) in &out.targets {
        println!("  target {target}: total {:?} (oracle {:?})", value.total(), expected[target].total());
    }
    println!("matches oracle: {}", out.targets == expected);
    let owner = owner_of(TargetId(0), 4);
    println!("owner of target 0: {}", out.executor.snapshot(owner).to_json());
}
