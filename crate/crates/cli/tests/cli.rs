use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcluster"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn curve_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn negative_sizes_are_rejected() {
    let o = run(&["simulate", "--n", "-1"]);
    assert!(!o.status.success());
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_machine_shapes_are_rejected() {
    let o = run(&["simulate", "--pes", "0", "--n", "4"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn sweep_peaks_near_58_bytes_and_components_add_up() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let o = run(&["energy-sweep", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("vlen,e_fpu,e_pe,e_l0,e_l1,total,gflops_per_watt\n"));
    let rows = curve_rows(&text);
    assert_eq!(rows.len(), 256 - 8 + 1);
    for r in &rows {
        let parts: f64 = r[1..5].iter().sum();
        assert!((parts - r[5]).abs() <= 1e-5, "{r:?}");
    }
    let best = rows.iter().max_by(|a, b| a[6].total_cmp(&b[6])).unwrap();
    assert!((best[0] - 58.0).abs() <= 2.0, "argmax {}", best[0]);
    assert!(stdout(&o).contains(&format!("at VLEN {} B", best[0])));
}

#[test]
fn single_point_sweep_has_one_row() {
    let o = run(&["energy-sweep", "--from", "64", "--to", "64"]);
    assert!(o.status.success());
    let rows = curve_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 64.0);
    assert!((rows[0][6] - 108.7).abs() <= 0.4, "{}", rows[0][6]);
    // The summary goes to stderr so stdout stays valid CSV.
    assert!(String::from_utf8_lossy(&o.stderr).contains("peak"));
}

#[test]
fn reversed_sweep_ranges_fail() {
    assert!(!run(&["energy-sweep", "--from", "128", "--to", "64"]).status.success());
}

#[test]
fn optimize_reports_both_searches_and_balance() {
    let o = run(&["optimize"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("best power of two   64 B"), "{out}");
    assert!(out.contains("2.83 words/cycle"), "{out}");
}

fn write_samples(path: &Path, rows: usize, with_kind: bool) {
    let (a, b, c) = (40.0, 0.002, 0.3);
    let mut text = String::from(if with_kind {
        "kind,width,capacity,energy\n"
    } else {
        "width,capacity,energy\n"
    });
    for i in 0..rows {
        let w = 8.0 * (1 + i % 4) as f64;
        let k = 256.0 * (1 + i / 2) as f64;
        let e = a * w + b * w * k + c * k;
        if with_kind {
            text += &format!("read,{w},{k},{e}\nwrite,{w},{k},{}\n", 2.0 * e);
        } else {
            text += &format!("{w},{k},{e}\n");
        }
    }
    fs::write(path, text).unwrap();
}

fn fitted(out: &str, kind: &str) -> Vec<f64> {
    let line = out.lines().find(|l| l.starts_with(&format!("{kind},"))).unwrap();
    line.split(',').skip(1).take(3).map(|f| f.parse().unwrap()).collect()
}

#[test]
fn fit_recovers_exact_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    write_samples(&path, 12, false);
    let o = run(&["fit", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let coef = fitted(&stdout(&o), "all");
    for (got, want) in coef.iter().zip([40.0, 0.002, 0.3]) {
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }

    write_samples(&path, 6, true);
    let o = run(&["fit", path.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!((fitted(&out, "write")[0] - 80.0).abs() <= 1e-7, "{out}");
    assert!((fitted(&out, "read")[2] - 0.3).abs() <= 1e-9, "{out}");
}

#[test]
fn fit_needs_three_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    write_samples(&path, 2, false);
    let o = run(&["fit", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3"));
}

#[test]
fn simulate_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.csv"))).collect();
    let traces: Vec<_> = (0..2).map(|i| dir.path().join(format!("t{i}.csv"))).collect();
    for (csv, trace) in paths.iter().zip(&traces) {
        let o = run(&[
            "simulate",
            "--kernel",
            "matmul",
            "--n",
            "16",
            "--csv",
            csv.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(stdout(&o).contains("PASS"));
    }
    let report = fs::read(&paths[0]).unwrap();
    assert_eq!(report, fs::read(&paths[1]).unwrap());
    assert_eq!(String::from_utf8_lossy(&report).lines().count(), 2);
    assert_eq!(fs::read(&traces[0]).unwrap(), fs::read(&traces[1]).unwrap());
    assert!(fs::metadata(&traces[0]).unwrap().len() > 0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cluster.cfg");
    fs::write(&cfg, "pes = 4\nkernel = dotp\nn = 64\n").unwrap();
    let csv = dir.path().join("r.csv");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--pes",
        "1",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..4], &["dotp", "64", row[2], "1"]);
}

#[test]
fn validate_lists_every_run() {
    let o = run(&["validate", "--kernel", "fft", "--n", "32"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert!(out.starts_with("PASS"), "{out}");
    assert!(!run(&["validate", "--kernel", "fft", "--n", "12"]).status.success());
}
