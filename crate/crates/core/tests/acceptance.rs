//! Acceptance criteria 1 to 10. Prints one verdict line per criterion, then fails if
//! any criterion outside `KNOWN_GAPS` fails, or if a known gap starts passing.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vcluster::cluster::{simulate, L1Arbiter};
use vcluster::config::MachineConfig;
use vcluster::energy::{
    access_energy, balance_check, breakdown, fit_scm_coefficients, optimize_vlen, AccessKind, ClusterEnergyParams,
    ScmCoefficients, ScmEnergyModel, ScmSample, VlenSearch,
};
use vcluster::isa::parse_program;
use vcluster::kernels::{oracle_eval, run_and_validate, KernelKind, KernelSpec, NarrowFormat, Validation};
use vcluster::sim::SimOptions;
use vcluster::vrf::{arbitrate, PortKind, Requester, VrfPortRequest, READ_PORTS, WRITE_PORTS};

/// Criteria that fail for a documented reason (README, "Known gaps").
const KNOWN_GAPS: &[u32] = &[8];

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
}

fn within(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn run(kind: KernelKind, n: usize, cfg: &MachineConfig) -> (Validation, Duration) {
    let t = Instant::now();
    let v = run_and_validate(&KernelSpec::new(kind, n), cfg, &SimOptions::default())
        .unwrap_or_else(|e| panic!("{kind} n={n}: {e}"));
    (v, t.elapsed())
}

fn energy_golden() -> Verdict {
    let t = Instant::now();
    let b = breakdown(&ClusterEnergyParams::default(), &ScmEnergyModel::reconciled());
    let fast = t.elapsed() < Duration::from_secs(1);
    let pass = within(b.fpu, 106.5, 0.1)
        && within(b.l0, 22.7, 0.4)
        && within(b.l1, 17.2, 0.3)
        && within(b.efficiency, 108.7, 0.4)
        && fast;
    Verdict {
        id: 1,
        pass,
        detail: format!(
            "fpu {:.2} (106.5±0.1), l0 {:.2} (22.7±0.4), l1 {:.2} (17.2±0.3) pJ/cycle, {:.2} GFLOPS/W (108.7±0.4)",
            b.fpu, b.l0, b.l1, b.efficiency
        ),
    }
}

fn optimizer() -> Verdict {
    let p = ClusterEnergyParams::default();
    let m = ScmEnergyModel::reconciled();
    let (best, peak) = optimize_vlen(&p, &m, 8..=256, VlenSearch::Dense).unwrap();
    let (pow2, _) = optimize_vlen(&p, &m, 8..=256, VlenSearch::PowersOfTwo).unwrap();
    Verdict {
        id: 2,
        pass: best.abs_diff(58) <= 2 && within(peak, 108.8, 0.5) && pow2 == 64,
        detail: format!("argmax {best} B (58±2), peak {peak:.2} GFLOPS/W (108.8±0.5), power of two {pow2} B (64)"),
    }
}

fn balance() -> Verdict {
    let z = 32.0 * 64.0;
    let b = balance_check(2.0, 4.0, 3.0, z).beta_min;
    let quad = balance_check(2.0, 4.0, 3.0, 4.0 * z).beta_min;
    Verdict {
        id: 3,
        pass: within(b, 2.83, 0.01) && quad == b / 2.0,
        detail: format!("beta_min {b:.4} words/cycle (2.83±0.01), x4 capacity {quad:.4} (exactly half)"),
    }
}

fn scm_formulas() -> Verdict {
    // Hand evaluation of a·W + b·W·K + c·K at W = 32 B, K = 1024 B.
    let read_hand = 47.7588 * 32.0 + 0.001792 * 32.0 * 1024.0 + 0.27497 * 1024.0;
    let write_hand = 72.0772 * 32.0 + 0.005721 * 32.0 * 1024.0 + 3.11102 * 1024.0;
    let m = ScmEnergyModel::reconciled();
    let read = access_energy(AccessKind::Read, 32.0, 1024.0, &m).unwrap();
    let write = access_energy(AccessKind::Write, 32.0, 1024.0, &m).unwrap();
    Verdict {
        id: 4,
        pass: within(read, read_hand, 0.1)
            && within(write, write_hand, 0.1)
            && within(read, 1868.6, 0.1)
            && within(write, 5679.6, 0.1),
        detail: format!("read {read:.3} fJ (hand {read_hand:.3}), write {write:.3} fJ (hand {write_hand:.3})"),
    }
}

fn fit_recovery() -> Verdict {
    let truth = ScmCoefficients {
        a: 47.7588,
        b: 0.001792,
        c: 0.27497,
    };
    let samples: Vec<ScmSample> = [8.0, 16.0, 32.0, 64.0]
        .iter()
        .flat_map(|&w| [128.0, 512.0, 2048.0].map(|k| (w, k)))
        .map(|(w, k)| ScmSample {
            width: w,
            capacity: k,
            energy: truth.a * w + truth.b * w * k + truth.c * k,
        })
        .collect();
    let t = Instant::now();
    let got = fit_scm_coefficients(&samples).unwrap();
    let fast = t.elapsed() < Duration::from_secs(1);
    let rel = [(got.a, truth.a), (got.b, truth.b), (got.c, truth.c)]
        .iter()
        .map(|(g, w)| ((g - w) / w).abs())
        .fold(0.0, f64::max);
    Verdict {
        id: 5,
        pass: samples.len() == 12 && rel <= 1e-9 && fast,
        detail: format!("{} samples, worst relative error {rel:.2e} (<= 1e-9)", samples.len()),
    }
}

fn fma_latency() -> Verdict {
    let src = "li a0, 32\nvsetvli t0, a0, e64, m4\nvfmacc.vv v8, v4, v0\n";
    let cfg = MachineConfig::default();
    let out = simulate(&parse_program(src).unwrap(), &cfg, &SimOptions::default()).unwrap();
    let busy = out.report.per_pe[0].vau_busy;
    Verdict {
        id: 6,
        pass: busy == 8 && cfg.fpus == 4 && cfg.vlen_bytes == 64,
        detail: format!("vfmacc.vv, LMUL 4, VLEN 64 B, 4 FPUs: VAU issue stage busy {busy} cycles (8)"),
    }
}

fn utilization_bands() -> Verdict {
    let cfg = MachineConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut check = |label: &str, kind, n, lo: f64, hi: f64, widen: f64| {
        let (v, took) = run(kind, n, &cfg);
        let r = &v.report;
        let util = r.total().flops as f64 / (widen * 2.0 * (r.pes * r.fpus) as f64 * r.cycles as f64);
        let ok = v.passed() && util >= lo && util <= hi && took <= Duration::from_secs(60);
        pass &= ok;
        parts.push(format!("{label} {:.1} % [{:.0}, {:.0}]", 100.0 * util, 100.0 * lo, 100.0 * hi));
    };
    check("matmul64", KernelKind::Matmul, 64, 0.95, 1.0, 1.0);
    check("matmul16", KernelKind::Matmul, 16, 0.60, 0.85, 1.0);
    check("conv2d64", KernelKind::Conv2d, 64, 0.90, 1.0, 1.0);
    check(
        "wid-matmul16 n=128 (of 4x peak)",
        KernelKind::WidMatmul(NarrowFormat::Fp16),
        128,
        0.90,
        1.0,
        4.0,
    );
    check("dotp4096", KernelKind::Dotp, 4096, 0.25, 0.50, 1.0);
    Verdict {
        id: 7,
        pass,
        detail: parts.join(", "),
    }
}

fn port_doubling() -> Verdict {
    let four = MachineConfig::default();
    let eight = MachineConfig {
        vlsu_ports: 8,
        ..four.clone()
    };
    let cycles = |kind, n, cfg: &MachineConfig| {
        let (v, _) = run(kind, n, cfg);
        assert!(v.passed());
        v.report.cycles as f64
    };
    let speedup = cycles(KernelKind::Dotp, 4096, &four) / cycles(KernelKind::Dotp, 4096, &eight);
    let mm4 = cycles(KernelKind::Matmul, 64, &four);
    let change = (cycles(KernelKind::Matmul, 64, &eight) - mm4).abs() / mm4;
    Verdict {
        id: 8,
        pass: speedup >= 1.5 && change <= 0.02,
        detail: format!(
            "dotp4096 speed-up {speedup:.3}x (>= 1.5x), matmul64 change {:.2} % (<= 2 %)",
            100.0 * change
        ),
    }
}

fn functional() -> Verdict {
    let cfg = MachineConfig::default();
    let cases = [
        (KernelKind::Matmul, [8, 64], 1e-10),
        (KernelKind::WidMatmul(NarrowFormat::Fp16), [10, 128], 1e-6),
        (KernelKind::WidMatmul(NarrowFormat::Fp8), [10, 128], 1e-2),
        (KernelKind::Conv2d, [11, 64], 1e-10),
        (KernelKind::Dotp, [100, 4096], 1e-10),
        (KernelKind::Fft, [16, 256], 1e-9),
    ];
    let mut pass = true;
    let mut worst = Vec::new();
    for (kind, sizes, bound) in cases {
        for n in sizes {
            let spec = KernelSpec::new(kind, n);
            // Outputs must be checked no looser than the bound of their format.
            let pinned = oracle_eval(&spec).iter().all(|a| a.tolerance <= bound);
            let (v, _) = run(kind, n, &cfg);
            pass &= pinned && v.passed();
            worst.push(format!("{kind}/{n} {:.1e}", v.max_error));
        }
    }
    Verdict {
        id: 9,
        pass,
        detail: format!("worst relative error: {}", worst.join(", ")),
    }
}

fn random_port_request(rng: &mut ChaCha8Rng) -> VrfPortRequest {
    VrfPortRequest {
        kind: if rng.gen_bool(0.6) { PortKind::Read } else { PortKind::Write },
        bank: rng.gen_range(0..2),
        row: rng.gen_range(0..32),
        strobe: u64::MAX,
        requester: [Requester::Vau, Requester::Vsldu, Requester::Vlsu, Requester::Sequencer][rng.gen_range(0..4)],
    }
}

/// Requests arrive over 200 cycles and retry until granted; each must be granted once.
fn vrf_conservation(rng: &mut ChaCha8Rng) -> bool {
    let mut pending: Vec<(usize, VrfPortRequest)> = Vec::new();
    let mut granted = Vec::new();
    let mut issued = 0;
    for cycle in 0..10_000 {
        if cycle < 200 {
            for _ in 0..rng.gen_range(0..6) {
                pending.push((issued, random_port_request(rng)));
                issued += 1;
            }
        } else if pending.is_empty() {
            break;
        }
        let reqs: Vec<_> = pending.iter().map(|(_, r)| *r).collect();
        let arb = arbitrate(&reqs);
        if arb.granted.len() + arb.stalled.len() != reqs.len() {
            return false;
        }
        for bank in 0..2 {
            let n = |kind| arb.granted.iter().filter(|&&i| reqs[i].bank == bank && reqs[i].kind == kind).count();
            if n(PortKind::Read) > READ_PORTS || n(PortKind::Write) > WRITE_PORTS {
                return false;
            }
        }
        granted.extend(arb.granted.iter().map(|&i| pending[i].0));
        pending = arb.stalled.iter().map(|&i| pending[i]).collect();
    }
    granted.sort_unstable();
    pending.is_empty() && granted == (0..issued).collect::<Vec<_>>()
}

/// Held requests to random banks: nobody waits `initiators` cycles or more.
fn l1_fairness(rng: &mut ChaCha8Rng) -> bool {
    let initiators = rng.gen_range(2..=16);
    let banks = 1 << rng.gen_range(0..5);
    let mut arb = L1Arbiter::new(banks, initiators);
    let mut want: Vec<Option<(usize, usize)>> = vec![None; initiators];
    for _ in 0..500 {
        for w in want.iter_mut().filter(|w| w.is_none()) {
            if rng.gen_bool(0.8) {
                *w = Some((rng.gen_range(0..banks), 0));
            }
        }
        let reqs: Vec<Option<usize>> = want.iter().map(|w| w.map(|(b, _)| b)).collect();
        let got = arb.arbitrate(&reqs);
        for (i, g) in got.iter().enumerate() {
            match (&mut want[i], g) {
                (w @ Some(_), true) => *w = None,
                (Some((_, waited)), false) => {
                    *waited += 1;
                    if *waited >= initiators {
                        return false;
                    }
                }
                (None, true) => return false,
                (None, false) => {}
            }
        }
    }
    true
}

fn properties() -> Verdict {
    let mut chain_failures = 0;
    for seed in 0..1000 {
        if let Err(e) = common::check_case(&common::random_case(seed)) {
            if chain_failures == 0 {
                eprintln!("random program {seed}: {e}");
            }
            chain_failures += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let conservation = (0..200).all(|_| vrf_conservation(&mut rng));
    let fairness = (0..200).all(|_| l1_fairness(&mut rng));
    let case = common::random_case(0xD5);
    let program = parse_program(&case.source).unwrap();
    let opts = SimOptions {
        trace: true,
        ..SimOptions::default()
    };
    let a = simulate(&program, &case.cfg, &opts).unwrap();
    let b = simulate(&program, &case.cfg, &opts).unwrap();
    let cfg = MachineConfig::default();
    let deterministic = a.report == b.report
        && a.memory == b.memory
        && a.trace.lines() == b.trace.lines()
        && run(KernelKind::Dotp, 1000, &cfg).0.report == run(KernelKind::Dotp, 1000, &cfg).0.report;
    Verdict {
        id: 10,
        pass: chain_failures == 0 && conservation && fairness && deterministic,
        detail: format!(
            "chaining/reference mismatches {chain_failures}/1000, VRF conservation {conservation}, \
             L1 round-robin fairness {fairness}, bit-identical reruns {deterministic}"
        ),
    }
}

#[test]
fn acceptance() {
    let checks: [fn() -> Verdict; 10] = [
        energy_golden,
        optimizer,
        balance,
        scm_formulas,
        fit_recovery,
        fma_latency,
        utilization_bands,
        port_doubling,
        functional,
        properties,
    ];
    let mut unexpected = Vec::new();
    for check in checks {
        let v = check();
        let known = KNOWN_GAPS.contains(&v.id);
        let tag = match (v.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known gap)",
            (false, false) => "FAIL",
        };
        println!("criterion {:>2}: {tag}: {}", v.id, v.detail);
        if v.pass == known {
            unexpected.push(v.id);
        }
    }
    assert!(
        unexpected.is_empty(),
        "criteria {unexpected:?} changed verdict; update KNOWN_GAPS only with a documented reason"
    );
}
