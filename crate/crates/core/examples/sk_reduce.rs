//! Reduce an SK expression on simulated nodes over a faulty network and
//! compare with the sequential normal-order reducer.
//!
//!     cargo run --example sk_reduce -- "S (K a) (S K K) b"

use sdpf::netsim::{ChannelConfig, FaultConfig, LatencyModel};
use sdpf::sk::{parse, reduce_oracle, run_distributed, SkRunConfig};

fn main() {
    let text = std::env::args().nth(1).unwrap_or_else(|| "S (K a) (S K K) b".to_string());
    let expr = match parse(&text) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let oracle = reduce_oracle(&expr, 1000);
    println!("input:  {expr}");
    println!("oracle: {:?}", oracle.normal_form().map(|e| e.to_string()));
    for seed in 0..5 {
        let cfg = SkRunConfig {
            nodes: 3,
            channel: ChannelConfig {
                p_loss: 0.1,
                p_dup: 0.3,
                delay: LatencyModel::pareto(2.0, 1.0).unwrap(),
                ack_timeout: 20,
                max_retries: None,
                echoes: 0,
            },
            faults: FaultConfig {
                p_f: 0.01,
                epoch: 10,
                recovery_delay: 10,
            },
            seed,
            max_time: 10_000_000,
            max_steps: 2_000,
        };
        let run = run_distributed(&expr, &cfg).unwrap();
        println!(
            "seed {seed}: {:?} after {} rewrites, {} transmissions",
            run.normal_form().map(|e| e.to_string()),
            run.steps,
            run.trace.counters.transmissions
        );
    }
}
