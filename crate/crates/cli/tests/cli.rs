use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sfif_core::io::read_model;

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/demo.toml")
}

fn sfif(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfif"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Knot slopes of the clamped cubic spline from the tridiagonal slope system.
fn clamped_slopes(y: &[f64], h: f64, d0: f64, dn: f64) -> Vec<f64> {
    let n = y.len() - 1;
    let k = n - 1;
    let mut rhs: Vec<f64> = (1..n).map(|i| 3.0 * (y[i + 1] - y[i - 1]) / h).collect();
    rhs[0] -= d0;
    rhs[k - 1] -= dn;
    let (mut c, mut d) = (vec![0.0; k], vec![0.0; k]);
    c[0] = 0.25;
    d[0] = rhs[0] / 4.0;
    for i in 1..k {
        let w = 4.0 - c[i - 1];
        c[i] = 1.0 / w;
        d[i] = (rhs[i] - d[i - 1]) / w;
    }
    let mut s = vec![0.0; k];
    s[k - 1] = d[k - 1];
    for i in (0..k - 1).rev() {
        s[i] = d[i] - c[i] * s[i + 1];
    }
    let mut out = vec![d0];
    out.extend(s);
    out.push(dn);
    out
}

#[test]
fn version_and_help() {
    let o = Command::new(env!("CARGO_BIN_EXE_sfif"))
        .arg("--version")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains(env!("CARGO_PKG_VERSION")));
    let o = Command::new(env!("CARGO_BIN_EXE_sfif"))
        .arg("--help")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains("converge"));
}

#[test]
fn build_demo_writes_model_and_summary() {
    let t = tempfile::tempdir().unwrap();
    let o = sfif("build", &demo(), t.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    for key in [
        "N = 4",
        "M = 3",
        "gamma_star",
        "beta_k0",
        "A_2",
        "B_2",
        "derivative_regime = true",
    ] {
        assert!(stdout.contains(key), "missing {key}");
    }
    let model = read_model(&t.path().join("model.json"), None).unwrap();
    assert_eq!(model.sifs().gammas(), &[0.01, 0.02, 0.03]);
}

#[test]
fn zero_gamma_build_is_the_classical_spline() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nfunction = \"exp\"\nn = 10\n[model]\ngammas = [0.0]\n",
    );
    let o = sfif("build", &cfg, t.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model = read_model(&t.path().join("model.json"), None).unwrap();
    let e = 1f64.exp();
    let want = clamped_slopes(model.data().ordinates(), 0.1, 1.0, e);
    for (a, b) in model.d_knots()[0].iter().zip(&want) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn schedule_exponent_out_of_range_is_a_config_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nfunction = \"sin_pi\"\nn = 4\n[model.schedule]\ns = 1.5\nmultipliers = [1.0]\n",
    );
    let o = sfif("build", &cfg, t.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(0, 1)"), "{}", stderr(&o));
    assert!(stderr(&o).contains("model.schedule"));
}

#[test]
fn inadmissible_gamma_is_a_regime_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nfunction = \"sin_pi\"\nn = 4\n[model]\ngammas = [0.5]\n",
    );
    let o = sfif("build", &cfg, t.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let cfg = write_config(
        t.path(),
        "[data]\nfunction = \"sin_pi\"\nn = 4\n[model]\ngammas = [0.07]\n[eval]\norders = [1]\n",
    );
    let o = sfif("eval", &cfg, t.path(), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_a_config_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nfunction = \"sin_pi\"\nn = 4\ngamas = [0.1]\n",
    );
    let o = sfif("build", &cfg, t.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamas"));
}

#[test]
fn eval_at_knots_returns_ordinates() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nx = [0.0, 0.25, 0.5, 0.75, 1.0]\ny = [1.0, -0.5, 2.0, 0.25, 0.0]\n\
         [model]\ngammas = [0.02, -0.04]\n[sigma]\ndigits = \"1221\"\n\
         [eval]\npoints = [0.0, 0.25, 0.5, 0.75, 1.0]\n",
    );
    let o = sfif("eval", &cfg, t.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&t.path().join("eval.csv"));
    let want = [1.0, -0.5, 2.0, 0.25, 0.0];
    assert_eq!(rows.len(), 5);
    for (r, w) in rows.iter().zip(want) {
        let v: f64 = r[1].parse().unwrap();
        assert!((v - w).abs() <= 1e-8);
        assert_eq!(r[2], "0");
        assert!(r[4].starts_with("1221"));
    }
}

#[test]
fn eval_is_deterministic_and_seed_overrides() {
    let t = tempfile::tempdir().unwrap();
    let (a, b, c) = (t.path().join("a"), t.path().join("b"), t.path().join("c"));
    assert!(sfif("eval", &demo(), &a, &[]).status.success());
    assert!(sfif("eval", &demo(), &b, &[]).status.success());
    assert!(sfif("eval", &demo(), &c, &["--seed", "9"]).status.success());
    let read = |p: &Path| fs::read(p.join("eval.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(
        fs::read(a.join("forward_j2.csv")).unwrap(),
        fs::read(b.join("forward_j2.csv")).unwrap()
    );
    let svg = fs::read_to_string(a.join("eval.svg")).unwrap();
    assert!(svg.starts_with("<svg xmlns=") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn unreachable_tolerance_is_a_depth_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nfunction = \"sin_pi\"\nn = 4\n[model]\ngammas = [0.03]\n[eval]\ntolerance = 1e-200\n",
    );
    let o = sfif("eval", &cfg, t.path(), &[]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
}

#[test]
fn demo_bounds_hold_in_all_rows() {
    let t = tempfile::tempdir().unwrap();
    let o = sfif("bounds", &demo(), t.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&t.path().join("bounds.csv"));
    assert_eq!(rows.len(), 60);
    for r in &rows {
        let margin: f64 = r[4].parse().unwrap();
        assert!(margin >= 0.0);
    }
}

#[test]
fn single_ifs_bounds_are_trivial() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nfunction = \"sin_pi\"\nn = 4\n[model]\ngammas = [0.02]\n[study]\nsamples = 5\ngrid = 500\n",
    );
    let o = sfif("bounds", &cfg, t.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&t.path().join("bounds.csv"));
    assert_eq!(rows.len(), 15);
    for r in rows {
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[3], r[4]);
    }
}

#[test]
fn corrupted_model_file_reports_location() {
    let t = tempfile::tempdir().unwrap();
    assert!(sfif("build", &demo(), t.path(), &[]).status.success());
    let model = t.path().join("model.json");
    let text = fs::read_to_string(&model).unwrap();
    fs::write(&model, text.replacen("\"gammas\": [", "\"gammas\": [[", 1)).unwrap();
    let cfg = write_config(t.path(), "[model]\nfile = \"model.json\"\n");
    let o = sfif("bounds", &cfg, t.path(), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn eval_reads_a_saved_model() {
    let t = tempfile::tempdir().unwrap();
    assert!(sfif("build", &demo(), t.path(), &[]).status.success());
    let cfg = write_config(
        t.path(),
        "[model]\nfile = \"model.json\"\n[sigma]\ndigits = \"3\"\n[eval]\ngrid = 5\n",
    );
    let o = sfif("eval", &cfg, &t.path().join("e"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&t.path().join("e/eval.csv")).len(), 5);
}

#[test]
fn single_size_study_is_rejected() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nfunction = \"sin_pi\"\n[model.schedule]\ns = 0.8\nmultipliers = [1.0, 0.5]\n[study]\nsizes = [8]\n",
    );
    let o = sfif("converge", &cfg, t.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("study.sizes"));
}

#[test]
fn converge_needs_an_analytic_function() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write_config(
        t.path(),
        "[data]\nx = [0.0, 0.5, 1.0]\ny = [0.0, 1.0, 0.0]\n[model.schedule]\ns = 0.8\nmultipliers = [1.0]\n\
         [study]\nsizes = [4, 8, 16, 32]\n",
    );
    assert_eq!(sfif("converge", &cfg, t.path(), &[]).status.code(), Some(2));
}

fn fitted_orders(out: &Path) -> Vec<f64> {
    let text = fs::read_to_string(out.join("convergence.csv")).unwrap();
    text.lines()
        .filter(|l| l.starts_with("order_j"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn converge_demo_meets_floors() {
    let t = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/converge.toml");
    let o = sfif("converge", &cfg, t.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = fitted_orders(t.path());
    assert!(p[0] >= 2.25 && p[1] >= 1.25 && p[2] >= 0.25, "{p:?}");
    let svg = fs::read_to_string(t.path().join("convergence.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 7);
    assert_eq!(csv_rows(&t.path().join("convergence.csv")).len(), 5 + 6);
}

#[test]
fn converge_control_is_fourth_order() {
    let t = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/control.toml");
    let o = sfif("converge", &cfg, t.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = fitted_orders(t.path());
    assert!((p[0] - 4.0).abs() <= 0.3, "{p:?}");
}
