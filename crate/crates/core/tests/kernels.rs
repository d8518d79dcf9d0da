use vcluster::config::MachineConfig;
use vcluster::isa::parse_program;
use vcluster::kernels::{
    gen_kernel, oracle_eval, run_and_validate, KernelError, KernelKind, KernelSpec, NarrowFormat,
};
use vcluster::sim::SimOptions;

fn validate(kind: KernelKind, n: usize, cfg: &MachineConfig) -> vcluster::kernels::Validation {
    let v = run_and_validate(&KernelSpec::new(kind, n), cfg, &SimOptions::default())
        .unwrap_or_else(|e| panic!("{kind} n={n}: {e}"));
    assert!(v.passed(), "{kind} n={n}: {}", v.mismatch.as_ref().unwrap());
    assert_eq!(v.report.chaining_violations, 0, "{kind} n={n}");
    v
}

#[test]
fn small_problems_match_their_oracles() {
    let cfg = MachineConfig::default();
    let cases = [
        (KernelKind::Matmul, &[1, 2, 3, 5, 8, 13][..]),
        (KernelKind::WidMatmul(NarrowFormat::Fp16), &[2, 6, 10]),
        (KernelKind::WidMatmul(NarrowFormat::Fp8), &[2, 8, 14]),
        (KernelKind::Conv2d, &[7, 8, 11, 16]),
        (KernelKind::Dotp, &[1, 7, 33, 64, 100]),
        (KernelKind::Fft, &[1, 2, 4, 8, 32]),
    ];
    for (kind, sizes) in cases {
        for &n in sizes {
            validate(kind, n, &cfg);
        }
    }
}

#[test]
fn full_scale_problems_match_their_oracles() {
    let cfg = MachineConfig::default();
    for (kind, n) in [
        (KernelKind::Matmul, 64),
        (KernelKind::WidMatmul(NarrowFormat::Fp16), 128),
        (KernelKind::WidMatmul(NarrowFormat::Fp8), 128),
        (KernelKind::Conv2d, 64),
        (KernelKind::Dotp, 4096),
        (KernelKind::Fft, 256),
    ] {
        validate(kind, n, &cfg);
    }
}

#[test]
fn other_machine_shapes_stay_correct() {
    let shapes = [
        MachineConfig {
            pes: 1,
            ..MachineConfig::default()
        },
        MachineConfig {
            pes: 4,
            ..MachineConfig::default()
        },
        MachineConfig {
            vlen_bytes: 128,
            ..MachineConfig::default()
        },
        MachineConfig::with_fpus(2),
        MachineConfig {
            vlsu_ports: 8,
            ..MachineConfig::default()
        },
    ];
    for cfg in &shapes {
        for kind in KernelKind::ALL {
            let n = match kind {
                KernelKind::Dotp => 300,
                KernelKind::Fft => 64,
                _ => 20,
            };
            validate(kind, n, cfg);
        }
    }
}

#[test]
fn empty_problems_do_nothing() {
    let cfg = MachineConfig::default();
    for kind in KernelKind::ALL {
        let v = validate(kind, 0, &cfg);
        assert_eq!(v.report.cycles, 0);
        assert!(oracle_eval(&KernelSpec::new(kind, 0)).iter().all(|e| e.values.is_empty()));
    }
}

#[test]
fn unsupported_sizes_are_rejected() {
    let cfg = MachineConfig::default();
    let err = |kind, n| gen_kernel(&KernelSpec::new(kind, n), &cfg).unwrap_err();
    assert!(matches!(err(KernelKind::Matmul, 80), KernelError::TooLarge { .. }));
    assert!(matches!(err(KernelKind::Dotp, 8192), KernelError::TooLarge { .. }));
    assert!(matches!(
        err(KernelKind::WidMatmul(NarrowFormat::Fp16), 7),
        KernelError::InvalidSize { .. }
    ));
    assert!(matches!(err(KernelKind::Fft, 12), KernelError::InvalidSize { .. }));
    assert!(matches!(err(KernelKind::Conv2d, 6), KernelError::InvalidSize { .. }));
    // 128x128 fp16 operands plus fp32 result fill L1 exactly.
    assert!(gen_kernel(&KernelSpec::new(KernelKind::WidMatmul(NarrowFormat::Fp16), 128), &cfg).is_ok());
}

#[test]
fn emitted_text_reassembles_to_the_same_program() {
    let cfg = MachineConfig::default();
    for kind in KernelKind::ALL {
        let k = gen_kernel(&KernelSpec::new(kind, 16), &cfg).unwrap();
        assert_eq!(parse_program(&k.source).unwrap(), k.program, "{kind}");
    }
}

#[test]
fn seeds_change_data_but_not_timing() {
    let cfg = MachineConfig::default();
    let a = KernelSpec::new(KernelKind::Matmul, 16);
    let b = KernelSpec { seed: 7, ..a };
    assert_ne!(oracle_eval(&a)[0].values, oracle_eval(&b)[0].values);
    let ra = run_and_validate(&a, &cfg, &SimOptions::default()).unwrap();
    let rb = run_and_validate(&b, &cfg, &SimOptions::default()).unwrap();
    assert!(ra.passed() && rb.passed());
    assert_eq!(ra.report.cycles, rb.report.cycles);
}

#[test]
fn matmul_utilization_grows_with_size() {
    let cfg = MachineConfig::default();
    let util: Vec<f64> = [16, 32, 64]
        .into_iter()
        .map(|n| validate(KernelKind::Matmul, n, &cfg).report.utilization())
        .collect();
    assert!(util.windows(2).all(|w| w[0] <= w[1]), "{util:?}");
}

#[test]
fn more_ports_speed_up_dotp_and_barely_touch_matmul() {
    let four = MachineConfig::default();
    let eight = MachineConfig {
        vlsu_ports: 8,
        ..four.clone()
    };
    let dotp4 = validate(KernelKind::Dotp, 4096, &four).report.cycles;
    let dotp8 = validate(KernelKind::Dotp, 4096, &eight).report.cycles;
    assert!(dotp8 < dotp4, "{dotp8} vs {dotp4}");
    let mm4 = validate(KernelKind::Matmul, 64, &four).report.cycles as f64;
    let mm8 = validate(KernelKind::Matmul, 64, &eight).report.cycles as f64;
    assert!((mm8 - mm4).abs() / mm4 <= 0.02, "{mm8} vs {mm4}");
}

#[test]
fn widening_reaches_four_times_the_double_rate() {
    let cfg = MachineConfig::default();
    let mm = validate(KernelKind::Matmul, 64, &cfg).report;
    let wid = validate(KernelKind::WidMatmul(NarrowFormat::Fp16), 64, &cfg).report;
    // Same number of multiply-accumulates per element pair, four lanes per FPU.
    let rate = |r: &vcluster::sim::SimReport| r.total().flops as f64 / r.cycles as f64;
    assert!(rate(&wid) > 3.5 * rate(&mm), "{} vs {}", rate(&wid), rate(&mm));
}
