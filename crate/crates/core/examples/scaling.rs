//! Barrier rounds against barrier-less execution under heavy-tailed task
//! latency. Prints per-P throughput and the fitted log-log slopes.
//!
//!     cargo run --release --example scaling -- [alpha]

use sdpf::driver::{fit_scaling_exponent, run_async_rounds, run_bsp};
use sdpf::netsim::LatencyModel;

fn main() {
    let alpha: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let latency = LatencyModel::pareto(alpha, 100.0).unwrap();
    let rounds = 500;
    let (mut bsp, mut asy) = (Vec::new(), Vec::new());
    println!("{:>5} {:>12} {:>12}", "P", "bsp", "async");
    for p in [2, 4, 8, 16, 32, 64, 128, 256] {
        let b = run_bsp(p, rounds, latency, 1).unwrap();
        let a = run_async_rounds(p, rounds, latency, 1).unwrap();
        println!("{p:>5} {:>12.4} {:>12.4}", b.steady_throughput, a.steady_throughput);
        bsp.push((p as f64, b.steady_throughput));
        asy.push((p as f64, a.steady_throughput));
    }
    let fb = fit_scaling_exponent(&bsp).unwrap();
    let fa = fit_scaling_exponent(&asy).unwrap();
    println!("bsp slope   {:.3} ± {:.3}  (1 - 1/alpha = {:.3})", fb.slope, fb.half_width, 1.0 - 1.0 / alpha);
    println!("async slope {:.3} ± {:.3}", fa.slope, fa.half_width);
}
