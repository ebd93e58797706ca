//! What breaks when a metadata field is taken away.

use sdpf::experiments::{field_ablations, rid_off_total, Experiment, ExperimentConfig};
use sdpf::netsim::{ChannelConfig, FaultConfig, LatencyModel};
use sdpf::sk::{duplicate_subtree_corpus, reduce_oracle, run_translation, translate_collapsed, SkRunConfig};

fn main() {
    let cfg = ExperimentConfig::defaults(Experiment::Ablate);
    println!("rid off: {} unit increments, additive merge", cfg.count);
    for seed in 0..5 {
        println!(
            "  seed {seed}: p_dup=0 -> {}, p_dup=0.3 -> {}",
            rid_off_total(&cfg, 0.0, seed).unwrap(),
            rid_off_total(&cfg, 0.3, seed).unwrap()
        );
    }

    println!("ids collapsed by structure:");
    let sk = SkRunConfig {
        nodes: 3,
        channel: ChannelConfig {
            p_dup: 0.3,
            delay: LatencyModel::pareto(2.0, 1.0).unwrap(),
            ack_timeout: 20,
            ..ChannelConfig::reliable(1)
        },
        faults: FaultConfig::none(),
        seed: 0,
        max_time: 10_000_000,
        max_steps: 2_000,
    };
    for e in duplicate_subtree_corpus() {
        let run = run_translation(&translate_collapsed(&e), &sk).unwrap();
        let got = match &run.outcome {
            Ok(_) => format!("{:?}", run.normal_form().map(|n| n.to_string())),
            Err(err) => err.to_string(),
        };
        let want = reduce_oracle(&e, 200).normal_form().map(|n| n.to_string());
        println!("  {e}: got {got}, want {want:?}");
    }

    println!("missing fields:");
    for (field, r) in field_ablations() {
        println!("  {field}: {}", r.err().unwrap_or_else(|| "accepted".into()));
    }
}
