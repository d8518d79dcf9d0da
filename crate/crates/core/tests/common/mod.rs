//! Random dependent vector programs for differential testing.

#![allow(dead_code)]

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vcluster::cluster::simulate;
use vcluster::config::MachineConfig;
use vcluster::isa::parse_program;
use vcluster::sim::reference::run_reference;
use vcluster::sim::SimOptions;

/// Index group, loaded once and never overwritten.
const INDEX_BASE: usize = 24;

pub struct RandomCase {
    pub cfg: MachineConfig,
    pub source: String,
}

fn random_config(rng: &mut ChaCha8Rng) -> MachineConfig {
    let fpus = *[1, 2, 4].choose(rng).unwrap();
    let vlens: Vec<usize> = [32, 64, 128].into_iter().filter(|v| *v >= 16 * fpus).collect();
    MachineConfig {
        pes: rng.gen_range(1..=2),
        fpus,
        vlen_bytes: *vlens.choose(rng).unwrap(),
        vlsu_ports: *[1, 2, 4, 8].choose(rng).unwrap(),
        l1_banks: *[4, 16].choose(rng).unwrap(),
        fpu_latency: rng.gen_range(1..=6),
        ..MachineConfig::default()
    }
}

/// Register groups written so far, oldest first.
struct Chain {
    written: Vec<usize>,
}

impl Chain {
    /// A source group, biased towards recent results so instructions depend on each other.
    fn source(&self, rng: &mut ChaCha8Rng, lmul: usize) -> usize {
        let recent: Vec<usize> = self
            .written
            .iter()
            .rev()
            .take(4)
            .map(|r| r - r % lmul)
            .collect();
        if !recent.is_empty() && rng.gen_bool(0.75) {
            *recent.choose(rng).unwrap()
        } else {
            any_group(rng, lmul)
        }
    }
}

fn any_group(rng: &mut ChaCha8Rng, lmul: usize) -> usize {
    lmul * rng.gen_range(0..INDEX_BASE / lmul)
}

fn disjoint_group(rng: &mut ChaCha8Rng, lmul: usize, other: usize) -> usize {
    loop {
        let g = any_group(rng, lmul);
        if g + lmul <= other || other + lmul <= g {
            return g;
        }
    }
}

/// Program text for `pe`: vector chains mixed with scalar memory traffic.
fn pe_code(rng: &mut ChaCha8Rng, cfg: &MachineConfig, pe: usize, len: usize) -> String {
    let words = cfg.vlen_bytes; // e64 elements in an m8 group
    let mut s = String::new();
    let line = |s: &mut String, text: String| {
        s.push_str(&text);
        s.push('\n');
    };
    line(&mut s, format!("li a0, {words}"));
    line(&mut s, "vsetvli zero, a0, e64, m8".into());
    line(&mut s, "li a1, idx".into());
    line(&mut s, format!("vle64.v v{INDEX_BASE}, (a1)"));
    line(&mut s, "li a1, src".into());
    line(&mut s, format!("li a2, out{pe}"));
    line(&mut s, "fld f1, 8(a1)".into());
    line(&mut s, "fld f2, 16(a1)".into());

    let mut chain = Chain { written: Vec::new() };
    let mut sew = 64;
    let mut lmul = 8;
    for _ in 0..len {
        let roll = rng.gen_range(0..100);
        if roll < 10 {
            sew = if rng.gen_bool(0.8) { 64 } else { 32 };
            lmul = *[1, 2, 4, 8].choose(rng).unwrap();
            let vlmax = lmul * cfg.vlen_bytes / (sew / 8);
            line(&mut s, format!("li a0, {}", rng.gen_range(0..=vlmax + 4)));
            line(&mut s, format!("vsetvli t0, a0, e{sew}, m{lmul}"));
            continue;
        }
        let vd = any_group(rng, lmul);
        match roll {
            10..=24 => {
                let mode = rng.gen_range(0..3);
                if mode == 2 && sew == 64 && lmul == 8 {
                    line(&mut s, format!("vluxei64.v v{vd}, (a1), v{INDEX_BASE}"));
                } else if mode == 1 {
                    line(&mut s, format!("li t1, {}", sew / 8 * rng.gen_range(1..=2)));
                    line(&mut s, format!("vlse{sew}.v v{vd}, (a1), t1"));
                } else {
                    line(&mut s, format!("vle{sew}.v v{vd}, (a1)"));
                }
                chain.written.push(vd);
            }
            25..=36 => {
                let vs = chain.source(rng, lmul);
                let mode = rng.gen_range(0..3);
                if mode == 2 && sew == 64 && lmul == 8 {
                    line(&mut s, format!("vsuxei64.v v{vs}, (a2), v{INDEX_BASE}"));
                } else if mode == 1 {
                    line(&mut s, format!("li t1, {}", sew / 8 * rng.gen_range(1..=2)));
                    line(&mut s, format!("vsse{sew}.v v{vs}, (a2), t1"));
                } else {
                    line(&mut s, format!("vse{sew}.v v{vs}, (a2)"));
                }
            }
            37..=56 => {
                let op = ["vfadd", "vfsub", "vfmul"].choose(rng).unwrap();
                let a = chain.source(rng, lmul);
                if rng.gen_bool(0.7) {
                    let b = chain.source(rng, lmul);
                    line(&mut s, format!("{op}.vv v{vd}, v{a}, v{b}"));
                } else {
                    line(&mut s, format!("{op}.vf v{vd}, v{a}, f{}", rng.gen_range(1..=2)));
                }
                chain.written.push(vd);
            }
            57..=74 => {
                let acc = chain.source(rng, lmul);
                let a = chain.source(rng, lmul);
                if rng.gen_bool(0.6) {
                    let b = chain.source(rng, lmul);
                    line(&mut s, format!("vfmacc.vv v{acc}, v{a}, v{b}"));
                } else {
                    line(&mut s, format!("vfmacc.vf v{acc}, f{}, v{a}", rng.gen_range(1..=2)));
                }
                chain.written.push(acc);
            }
            75..=86 => {
                let vs = chain.source(rng, lmul);
                let shamt = rng.gen_range(0..=8);
                if rng.gen_bool(0.5) {
                    let vd = disjoint_group(rng, lmul, vs);
                    line(&mut s, format!("vslideup.vi v{vd}, v{vs}, {shamt}"));
                    chain.written.push(vd);
                } else {
                    line(&mut s, format!("vslidedown.vi v{vd}, v{vs}, {shamt}"));
                    chain.written.push(vd);
                }
            }
            87..=91 => {
                let vs2 = chain.source(rng, lmul);
                let vs1 = chain.source(rng, lmul);
                line(&mut s, format!("vfredsum.vs v{vd}, v{vs2}, v{vs1}"));
                chain.written.push(vd);
            }
            92..=95 => {
                let off = 8 * rng.gen_range(0..words);
                line(&mut s, format!("ld t2, {off}(a2)"));
                line(&mut s, format!("sd t2, {}(a2)", 8 * rng.gen_range(0..words)));
            }
            _ => {
                let off = 8 * rng.gen_range(0..words);
                line(&mut s, format!("fld f{}, {off}(a2)", rng.gen_range(1..=2)));
            }
        }
    }
    s
}

/// Deterministic random case for `seed`.
pub fn random_case(seed: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = random_config(&mut rng);
    let words = cfg.vlen_bytes;
    let mut source = String::from(".data\n");
    let values: Vec<String> = (0..2 * words)
        .map(|_| format!("{:?}", rng.gen_range(-2.0..2.0f64)))
        .collect();
    writeln!(source, "src: .dword {}", values.join(", ")).unwrap();
    let mut perm: Vec<usize> = (0..words).collect();
    perm.shuffle(&mut rng);
    let offsets: Vec<String> = perm.iter().map(|w| (8 * w).to_string()).collect();
    writeln!(source, "idx: .dword {}", offsets.join(", ")).unwrap();
    for pe in 0..cfg.pes {
        writeln!(source, "out{pe}: .zero {}", 16 * words).unwrap();
    }
    source.push_str(".text\n");
    for pe in 0..cfg.pes {
        writeln!(source, ".pe {pe}").unwrap();
        let len = rng.gen_range(4..=24);
        source.push_str(&pe_code(&mut rng, &cfg, pe, len));
    }
    RandomCase { cfg, source }
}

/// Runs the timed and untimed models on `case`. Returns a description of the first
/// disagreement or chaining violation.
pub fn check_case(case: &RandomCase) -> Result<(), String> {
    let program = parse_program(&case.source).map_err(|e| format!("parse: {e}\n{}", case.source))?;
    let timed = simulate(&program, &case.cfg, &SimOptions::default());
    let reference = run_reference(&program, &case.cfg, 1_000_000);
    match (timed, reference) {
        (Ok(t), Ok(r)) => {
            if t.report.chaining_violations != 0 {
                return Err(format!("{} chaining violations", t.report.chaining_violations));
            }
            if t.memory != r.memory {
                return Err("final memory differs from the reference".into());
            }
            for (pe, rp) in r.pes.iter().enumerate() {
                if t.x[pe] != rp.x {
                    return Err(format!("integer registers of PE {pe} differ"));
                }
            }
            Ok(())
        }
        (Err(a), Err(b)) if a.to_string() == b.to_string() => Ok(()),
        (a, b) => Err(format!(
            "outcomes differ: timed {:?}, reference {:?}",
            a.err().map(|e| e.to_string()),
            b.err().map(|e| e.to_string())
        )),
    }
}
