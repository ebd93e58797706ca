//! Peak buffered bytes for stream pairs: arrival order decides whether a
//! node must hoard inputs or can work inside a fixed window.

use sdpf::experiments::{memory_run, Experiment, ExperimentConfig, MemoryPolicy};

fn main() {
    let cfg = ExperimentConfig::defaults(Experiment::Memory);
    for n in [10, 100, 1000, 10_000] {
        let h = memory_run(&cfg, n, MemoryPolicy::Hoarding, 0).unwrap();
        let w = memory_run(&cfg, n, MemoryPolicy::SlidingWindow, 0).unwrap();
        println!(
            "n={n:>6}  hoarding W_max={:>8}  window W_max={:>5} (cap {:?})",
            h.w_max, w.w_max, w.cap_bytes
        );
    }
}
