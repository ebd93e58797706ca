use super::*;

fn small(e: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        seeds: 2,
        ..ExperimentConfig::defaults(e)
    }
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "seeds = 7\nalpha = 1.5\nP_sweep = [2, 8]\nformat = \"csv\"\n").unwrap();
    let flags = ConfigOverrides {
        alpha: Some(3.0),
        ..Default::default()
    };
    let cfg = ExperimentConfig::resolve(Experiment::Scale, Some(&path), &flags).unwrap();
    assert_eq!(cfg.seeds, 7);
    assert_eq!(cfg.alpha, 3.0);
    assert_eq!(cfg.p_sweep, vec![2, 8]);
    assert_eq!(cfg.format, Format::Csv);
    assert_eq!(cfg.rounds, ExperimentConfig::defaults(Experiment::Scale).rounds);
}

#[test]
fn bad_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "sedes = 3\n").unwrap();
    let none = ConfigOverrides::default();
    assert!(matches!(
        ExperimentConfig::resolve(Experiment::Converge, Some(&path), &none),
        Err(ExperimentError::Toml { .. })
    ));
    let flags = ConfigOverrides {
        p_loss: Some(1.0),
        ..Default::default()
    };
    assert!(matches!(
        ExperimentConfig::resolve(Experiment::Converge, None, &flags),
        Err(ExperimentError::Config(_))
    ));
    assert!(matches!(
        ExperimentConfig::resolve(Experiment::Converge, Some(&dir.path().join("missing.toml")), &none),
        Err(ExperimentError::Io { .. })
    ));
}

#[test]
fn one_increment_without_chaos_is_that_increment() {
    let cfg = ExperimentConfig {
        count: 1,
        p_loss: 0.0,
        p_dup: 0.0,
        p_f: 0.0,
        ..ExperimentConfig::defaults(Experiment::Converge)
    };
    let r = converge_run(&cfg, VariantKind::MaxRegister, 5, 5).unwrap();
    assert!(r.pass());
    assert_eq!(r.tasks, 1);
}

#[test]
fn delivery_order_does_not_change_the_final_state() {
    let cfg = ExperimentConfig::defaults(Experiment::Converge);
    for variant in VARIANTS {
        let a = converge_run(&cfg, variant, 3, 100).unwrap();
        let b = converge_run(&cfg, variant, 3, 200).unwrap();
        assert_ne!(a.trace_hash, b.trace_hash);
        assert_eq!(a.final_hash, b.final_hash, "{variant}");
        assert!(a.pass() && b.pass());
    }
}

#[test]
fn converge_report_lists_every_seed() {
    let r = cmd_converge(&small(Experiment::Converge)).unwrap();
    assert!(r.pass());
    assert_eq!(r.runs.len(), 2);
    let text = r.to_json_lines();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["config"]["experiment"], "converge");
    }
}

#[test]
fn constant_latency_barriers_are_harmless() {
    let cfg = ExperimentConfig {
        constant_latency: true,
        seeds: 1,
        rounds: 20,
        p_sweep: vec![2, 4, 8],
        ..ExperimentConfig::defaults(Experiment::Scale)
    };
    let r = cmd_scale(&cfg).unwrap();
    assert!(r.pass(), "{:?}", r.checks);
    let fit = r.rows.iter().find(|row| row.experiment == "scale_bsp_fit").unwrap();
    assert!((fit.exponent.unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn ioamp_single_consumer_has_no_amplification() {
    let cfg = ExperimentConfig::defaults(Experiment::Ioamp);
    let r = ioamp_run(&cfg, 4, 1, 0).unwrap();
    assert_eq!(r.multi_r_a, 1.0);
    assert_eq!(r.single_r_a, 1.0);
    assert_eq!(r.bound, 1.0);
}

#[test]
fn ioamp_small_broadcast_meets_the_bound() {
    let cfg = ExperimentConfig::defaults(Experiment::Ioamp);
    let r = ioamp_run(&cfg, 4, 3, 0).unwrap();
    // 4 tiles of 10 bytes, 3 consumers each, 8 output bytes
    assert_eq!(r.bound_bytes, 48 + 80);
    assert!(r.multi_q_source >= r.bound_bytes);
    assert!(r.multi_r_a >= 1.0 + 80.0 / 48.0 - 1e-12);
    assert_eq!(r.single_r_a, 1.0);
    assert!(r.oracle_match);
}

#[test]
fn one_pair_looks_the_same_under_both_policies() {
    let cfg = ExperimentConfig::defaults(Experiment::Memory);
    let h = memory_run(&cfg, 1, MemoryPolicy::Hoarding, 0).unwrap();
    let w = memory_run(&cfg, 1, MemoryPolicy::SlidingWindow, 0).unwrap();
    assert_eq!(h.w_max, w.w_max);
    assert_eq!(h.w_max, 2 * h.increment_bytes);
}

#[test]
fn sliding_window_fills_exactly_to_the_cap() {
    let cfg = ExperimentConfig {
        window: 4,
        ..ExperimentConfig::defaults(Experiment::Memory)
    };
    for n in [10, 40] {
        let r = memory_run(&cfg, n, MemoryPolicy::SlidingWindow, 1).unwrap();
        assert_eq!(Some(r.w_max), r.cap_bytes, "n={n}");
        assert!(r.oracle_match);
    }
}

#[test]
fn rid_off_needs_duplicates_to_go_wrong() {
    let cfg = ExperimentConfig::defaults(Experiment::Ablate);
    for seed in 0..5 {
        assert_eq!(rid_off_total(&cfg, 0.0, seed).unwrap(), 50);
    }
    assert!(rid_off_total(&cfg, 0.3, 0).unwrap() > 50);
}

#[test]
fn missing_metadata_is_rejected() {
    for (field, r) in field_ablations() {
        let err = r.unwrap_err();
        assert!(err.contains(field), "{err}");
    }
}

#[test]
fn skrun_reports_agreement_per_run() {
    let cfg = ExperimentConfig {
        seeds: 2,
        corpus: 0,
        ..ExperimentConfig::defaults(Experiment::Skrun)
    };
    let r = cmd_skrun(&cfg).unwrap();
    assert!(r.pass(), "{:?}", r.checks);
    assert_eq!(r.runs.len(), 4);
    assert_eq!(r.runs[0].run["input"], "S x y z");
    assert_eq!(r.runs[0].run["distributed_nf"], "x z (y z)");
    assert_eq!(r.runs[0].run["dup_identical"], true);
}

#[test]
fn unparsable_expressions_are_config_errors() {
    let cfg = ExperimentConfig {
        exprs: vec!["(K a".into()],
        corpus: 0,
        ..ExperimentConfig::defaults(Experiment::Skrun)
    };
    assert!(matches!(cmd_skrun(&cfg), Err(ExperimentError::Config(_))));
}

#[test]
fn reports_are_reproducible() {
    for e in [Experiment::Converge, Experiment::Ioamp, Experiment::Ablate] {
        let cfg = ExperimentConfig {
            seeds: 3,
            ..ExperimentConfig::defaults(e)
        };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.digest(), b.digest(), "{e}");
        assert_eq!(a.to_csv(), b.to_csv());
    }
}
