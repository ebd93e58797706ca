use super::*;
use crate::netsim::{ChannelConfig, FaultConfig, LatencyModel};

fn chaos(nodes: usize, seed: u64) -> SkRunConfig {
    SkRunConfig {
        nodes,
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
    }
}

fn p(s: &str) -> ExprNode {
    parse(s).unwrap()
}

#[test]
fn k_rule_distributed_many_seeds() {
    for seed in 0..50 {
        let run = run_distributed(&p("K a b"), &chaos(3, seed)).unwrap();
        assert_eq!(run.normal_form(), Some(&p("a")), "seed {seed}: {:?}", run.outcome);
        assert_eq!(run.monotone_violations, 0);
    }
}

#[test]
fn skk_distributed() {
    for seed in 0..10 {
        let run = run_distributed(&p("S K K a"), &chaos(4, seed)).unwrap();
        assert_eq!(run.normal_form(), Some(&p("a")), "seed {seed}");
        assert_eq!(run.steps, 2);
    }
}

#[test]
fn s_rule_distributed() {
    let run = run_distributed(&p("S x y z"), &chaos(3, 1)).unwrap();
    assert_eq!(run.normal_form(), Some(&p("x z (y z)")));
}

#[test]
fn duplicate_subtrees_reduced_separately() {
    let e = p("(K (f x) a)(K (f x) b)");
    for seed in 0..5 {
        let run = run_distributed(&e, &chaos(3, seed)).unwrap();
        assert_eq!(run.normal_form(), Some(&p("(f x)(f x)")));
    }
}

#[test]
fn single_node_run() {
    let mut cfg = chaos(1, 0);
    cfg.faults = FaultConfig::none();
    let run = run_distributed(&p("S (K a) (S K K) b"), &cfg).unwrap();
    assert_eq!(run.normal_form(), reduce_oracle(&p("S (K a) (S K K) b"), 100).normal_form());
}

#[test]
fn step_budget_is_reported() {
    let omega = p("S (S K K) (S K K) (S (S K K) (S K K))");
    let mut cfg = chaos(2, 0);
    cfg.max_steps = 30;
    let run = run_distributed(&omega, &cfg).unwrap();
    assert_eq!(run.outcome, Ok(SkOutcome::StepLimit));
}

#[test]
fn timeout_is_reported() {
    let mut cfg = chaos(3, 0);
    cfg.max_time = 2;
    let run = run_distributed(&p("S K K a"), &cfg).unwrap();
    assert!(matches!(run.outcome, Ok(SkOutcome::Timeout { .. })), "{:?}", run.outcome);
}

#[test]
fn echoed_combines_leave_stores_identical() {
    let e = p("S (K a) (S K K) (K b c)");
    let base = chaos(3, 7);
    let mut echoed = base;
    echoed.channel.echoes = 2;
    let a = run_distributed(&e, &base).unwrap();
    let b = run_distributed(&e, &echoed).unwrap();
    assert_eq!(a.stores, b.stores);
    assert!(b.trace.counters.echoes > 0);
}

#[test]
fn collapsed_ids_fail_on_duplicate_subtrees() {
    for e in duplicate_subtree_corpus() {
        let oracle = reduce_oracle(&e, 200);
        let run = run_translation(&translate_collapsed(&e), &chaos(3, 0)).unwrap();
        assert_ne!(run.normal_form(), oracle.normal_form(), "{e}");
        // distinct ids get it right
        let ok = run_distributed(&e, &chaos(3, 0)).unwrap();
        assert_eq!(ok.normal_form(), oracle.normal_form(), "{e}");
    }
}

#[test]
fn translation_round_trip_random() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 500 {
        let e = random_expr(&mut rng, 1 + checked % 40, 5);
        if e.depth() > 8 {
            continue;
        }
        let t = translate(&e);
        assert_eq!(reconstruct(&t.store(), t.root).unwrap(), e);
        checked += 1;
    }
}

#[test]
fn corpus_is_deterministic_and_normalizing() {
    let corpus_spec = CorpusSpec {
        count: 10,
        ..Default::default()
    };
    let a = generate_corpus(&corpus_spec);
    assert_eq!(a.len(), 10);
    assert_eq!(a, generate_corpus(&corpus_spec));
    for e in &a {
        assert!(reduce_oracle(e, 200).normal_form().is_some());
    }
}
