//! Every consumer fetching its tile from storage, against reading each tile
//! once and replicating it over the network.

use sdpf::experiments::{ioamp_run, Experiment, ExperimentConfig};

fn main() {
    let cfg = ExperimentConfig::defaults(Experiment::Ioamp);
    println!("{:>4} {:>4} {:>10} {:>10} {:>10} {:>10}", "n", "U", "bound", "multi", "single", "q_net");
    for n in [4, 8, 16, 32, 64] {
        for u in [1, 3, n] {
            let r = ioamp_run(&cfg, n, u, 0).unwrap();
            println!(
                "{n:>4} {u:>4} {:>10.3} {:>10.3} {:>10.3} {:>10}",
                r.bound, r.multi_r_a, r.single_r_a, r.single_q_net
            );
        }
    }
}
