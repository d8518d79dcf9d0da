//! Subcommand bodies. Each returns `Ok(false)` for a completed run whose check failed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use anyhow::{bail, Context, Result};
use vcluster::cluster;
use vcluster::energy::{
    balance_check, efficiency_curve, fit_scm_coefficients, optimize_vlen, residual_norm_sq, write_curve_csv,
    ClusterEnergyParams, ScmEnergyModel, ScmSample, VlenSearch,
};
use vcluster::kernels::{check_outputs, gen_kernel, oracle_eval, run_and_validate, KernelKind, KernelSpec};
use vcluster::sim::SimOptions;

use crate::settings::RunConfig;

/// Energy per fetched and dispatched instruction, pJ.
const PE_PJ: f64 = 3.1;

const REPORT_CSV_HEADER: &str = "kernel,n,seed,pes,fpus,vlen,vlsu_ports,cycles,flops,utilization,\
l1_reads,l1_writes,l1_conflicts,energy_pj,gflops_per_watt,max_error,passed";

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn energy_params(rc: &RunConfig, n: usize) -> ClusterEnergyParams {
    ClusterEnergyParams {
        pes: rc.machine.pes as f64,
        fpus: rc.machine.fpus as f64,
        vlen_bytes: rc.machine.vlen_bytes as f64,
        n: n as f64,
        ..ClusterEnergyParams::with_profile(rc.profile)
    }
}

pub fn simulate(rc: &RunConfig, csv: Option<&Path>, trace: Option<&Path>) -> Result<bool> {
    let spec = KernelSpec {
        kind: rc.kernel,
        n: rc.n,
        seed: rc.seed,
    };
    let kernel = gen_kernel(&spec, &rc.machine)?;
    let opts = SimOptions {
        trace: trace.is_some(),
        ..SimOptions::default()
    };
    let outcome = cluster::simulate(&kernel.program, &rc.machine, &opts)?;
    let (max_error, mismatch) = check_outputs(&kernel.program, &outcome.memory, &oracle_eval(&spec));
    let report = &outcome.report;
    let energy = report.energy(rc.profile, PE_PJ, &ScmEnergyModel::reconciled());

    println!("{} n={} on {} PEs x {} FPUs, VLEN {} B", spec.kind, spec.n, report.pes, report.fpus, report.vlen_bytes);
    println!("{report}");
    println!("energy (analytic estimate from access counts)");
    println!("  fpu {:.1} pJ, pe {:.1} pJ, vrf {:.1} pJ, l1 {:.1} pJ", energy.fpu, energy.pe, energy.vrf, energy.l1);
    println!("  total {:.1} pJ, {:.1} GFLOPS/W at 1 GHz", energy.total, energy.gflops_per_watt);
    match &mismatch {
        None => println!("PASS max error {max_error:.3e}"),
        Some(m) => println!("FAIL {m} (max error {max_error:.3e})"),
    }

    if let Some(path) = csv {
        let mut out = create(path)?;
        let t = report.total();
        writeln!(out, "{REPORT_CSV_HEADER}")?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.6},{},{},{},{:.3},{:.3},{:e},{}",
            spec.kind,
            spec.n,
            spec.seed,
            rc.machine.pes,
            rc.machine.fpus,
            rc.machine.vlen_bytes,
            rc.machine.vlsu_ports,
            report.cycles,
            t.flops,
            report.utilization(),
            report.l1_reads,
            report.l1_writes,
            report.l1_conflicts,
            energy.total,
            energy.gflops_per_watt,
            max_error,
            mismatch.is_none()
        )?;
        out.flush()?;
    }
    if let Some(path) = trace {
        let mut out = create(path)?;
        outcome.trace.write_csv(&mut out)?;
        out.flush()?;
    }
    Ok(mismatch.is_none())
}

pub fn energy_sweep(rc: &RunConfig, range: RangeInclusive<usize>, n: usize, csv: Option<&Path>) -> Result<()> {
    let curve = efficiency_curve(&energy_params(rc, n), &ScmEnergyModel::reconciled(), range)?;
    let best = curve
        .iter()
        .reduce(|best, row| if row.efficiency > best.efficiency { row } else { best })
        .expect("a validated range is never empty");
    let summary = format!("peak {:.2} GFLOPS/W at VLEN {} B", best.efficiency, best.vlen_bytes);
    match csv {
        Some(path) => {
            let mut out = create(path)?;
            write_curve_csv(&mut out, &curve)?;
            out.flush()?;
            println!("{summary}");
        }
        None => {
            let mut out = io::stdout().lock();
            write_curve_csv(&mut out, &curve)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

pub fn optimize(rc: &RunConfig, range: RangeInclusive<usize>, n: usize) -> Result<()> {
    let p = energy_params(rc, n);
    let scm = ScmEnergyModel::reconciled();
    let (dense, dense_eff) = optimize_vlen(&p, &scm, range.clone(), VlenSearch::Dense)?;
    let (pow2, pow2_eff) = optimize_vlen(&p, &scm, range, VlenSearch::PowersOfTwo)?;
    println!("best VLEN           {dense} B ({dense_eff:.2} GFLOPS/W)");
    println!("best power of two   {pow2} B ({pow2_eff:.2} GFLOPS/W)");

    let m = &rc.machine;
    let l0_bytes = (32 * m.vlen_bytes) as f64;
    // Every VLSU port moves one word per cycle.
    let beta = (m.vlsu_ports * m.pes) as f64;
    let b = balance_check(m.pes as f64, m.fpus as f64, beta, l0_bytes);
    println!(
        "L1 bandwidth needed {:.2} words/cycle for {} B of registers per PE, {} available ({})",
        b.beta_min,
        l0_bytes,
        beta,
        if b.satisfied { "met" } else { "not met" }
    );
    Ok(())
}

fn parse_field(value: &str, path: &Path, line: u64) -> Result<f64> {
    value
        .trim()
        .parse()
        .with_context(|| format!("{}:{line}: `{value}` is not a number", path.display()))
}

pub fn fit(path: &Path) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;

    // Samples per access kind; the kind column is optional.
    let mut groups: Vec<(String, Vec<ScmSample>)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let fields: Vec<&str> = record.iter().collect();
        let (kind, numbers) = match fields.len() {
            3 => ("all", &fields[..]),
            4 => (fields[0], &fields[1..]),
            k => bail!("{}:{line}: expected 3 or 4 columns, got {k}", path.display()),
        };
        if i == 0 && numbers[0].parse::<f64>().is_err() {
            continue;
        }
        let sample = ScmSample {
            width: parse_field(numbers[0], path, line)?,
            capacity: parse_field(numbers[1], path, line)?,
            energy: parse_field(numbers[2], path, line)?,
        };
        match groups.iter_mut().find(|(k, _)| k == kind) {
            Some((_, v)) => v.push(sample),
            None => groups.push((kind.to_string(), vec![sample])),
        }
    }
    if groups.is_empty() {
        bail!("{}: no samples", path.display());
    }
    println!("kind,a_fj_per_byte,b_fj_per_byte2,c_fj_per_byte,samples,residual_norm_sq");
    for (kind, samples) in &groups {
        let coef = fit_scm_coefficients(samples).with_context(|| format!("fitting `{kind}` samples"))?;
        println!(
            "{kind},{:e},{:e},{:e},{},{:e}",
            coef.a,
            coef.b,
            coef.c,
            samples.len(),
            residual_norm_sq(&coef, samples)
        );
    }
    Ok(())
}

/// Sizes checked when none is given: a small one and the full-scale one.
fn default_sizes(kind: KernelKind) -> [usize; 2] {
    match kind {
        KernelKind::Matmul => [16, 64],
        KernelKind::WidMatmul(_) => [16, 128],
        KernelKind::Conv2d => [16, 64],
        KernelKind::Dotp => [100, 4096],
        KernelKind::Fft => [16, 256],
    }
}

pub fn validate(rc: &RunConfig, kernel: Option<KernelKind>, n: Option<usize>) -> Result<bool> {
    let kinds: Vec<KernelKind> = match kernel {
        Some(k) => vec![k],
        None => KernelKind::ALL.to_vec(),
    };
    let mut all_passed = true;
    for kind in kinds {
        let sizes = match n {
            Some(n) => vec![n],
            None => default_sizes(kind).to_vec(),
        };
        for n in sizes {
            let spec = KernelSpec {
                kind,
                n,
                seed: rc.seed,
            };
            let v = run_and_validate(&spec, &rc.machine, &SimOptions::default())
                .with_context(|| format!("{kind} n={n}"))?;
            let verdict = match &v.mismatch {
                None => "PASS".to_string(),
                Some(m) => format!("FAIL {m}"),
            };
            println!(
                "{verdict:<6} {:<13} n={n:<5} cycles {:<8} utilization {:6.2} %  max error {:.2e}",
                kind.to_string(),
                v.report.cycles,
                100.0 * v.report.utilization(),
                v.max_error
            );
            all_passed &= v.passed();
        }
    }
    Ok(all_passed)
}
