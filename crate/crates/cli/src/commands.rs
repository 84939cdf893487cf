use std::fs;
use std::path::{Path, PathBuf};

use sfif_core::analysis::{
    bound_check, convergence_study, GammaPolicy, GammaSchedule, OrderEstimate, SigmaPolicy,
    StudyConfig, SUP_GRID,
};
use sfif_core::eval::{contraction_factor, eval_backward, eval_forward, MAX_DEPTH};
use sfif_core::io::{self, EvalColumn};
use sfif_core::spline::build_sifs_spline_with_k0;
use sfif_core::{CodeWord, Depth, EvalRequest, InterpolationData, SfifError, SplineModel};

use crate::config::{config_err, DataSource, RunConfig};
use crate::exit::{self, Failure};

pub struct Invocation {
    pub config: RunConfig,
    pub base: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .map_err(|e| Failure::new(exit::IO, format!("cannot write {}: {e}", path.display())))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::new(exit::IO, format!("cannot create {}: {e}", dir.display())))
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> sfif_core::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn data_for(source: &DataSource) -> Result<InterpolationData, Failure> {
    match source {
        DataSource::Function { f, interval, n } => {
            let n = n.ok_or_else(|| config_err("data.n", "number of intervals is required"))?;
            InterpolationData::from_fn(interval[0], interval[1], n, |x| f.value(x))
                .map_err(|e| config_err("data", e))
        }
        DataSource::Points(d) => Ok(d.clone()),
    }
}

fn gammas_for(cfg: &RunConfig, data: &InterpolationData) -> Result<Vec<f64>, Failure> {
    match (&cfg.model.gammas, &cfg.model.schedule) {
        (Some(_), Some(_)) => Err(config_err(
            "model",
            "'gammas' and 'schedule' are mutually exclusive",
        )),
        (None, None) => Err(config_err(
            "model.gammas",
            "give scaling factors or a schedule",
        )),
        (Some(g), None) => Ok(g.clone()),
        (None, Some(s)) => {
            let schedule = GammaSchedule::new(s.s, s.multipliers.clone())
                .map_err(|e| config_err("model.schedule", e))?;
            Ok(schedule.gammas(data.n(), data.interval_length()))
        }
    }
}

fn build_model(cfg: &RunConfig, base: &Path) -> Result<SplineModel, Failure> {
    let source = cfg.data_source(base)?;
    let data = data_for(&source)?;
    let boundary = cfg.boundary(&source)?;
    let gammas = gammas_for(cfg, &data)?;
    Ok(build_sifs_spline_with_k0(
        &data,
        &gammas,
        boundary,
        cfg.k0()?,
    )?)
}

/// The model named by `model.file`, or one built from the data section.
fn load_model(cfg: &RunConfig, base: &Path) -> Result<SplineModel, Failure> {
    match &cfg.model.file {
        Some(file) => sfif_core::io::read_model(&base.join(file), cfg.k0()?).map_err(|e| match e {
            SfifError::Io { .. } => Failure::new(exit::SOLVER, e.to_string()),
            other => other.into(),
        }),
        None => build_model(cfg, base),
    }
}

fn sigma_for(inv: &Invocation, model: &SplineModel) -> Result<CodeWord, Failure> {
    match inv.config.sigma_digits(model.m(), inv.seed)? {
        Some(w) => Ok(w.cycled(MAX_DEPTH)),
        None => Ok(CodeWord::seeded(
            inv.config.seed(inv.seed),
            MAX_DEPTH,
            model.m(),
        )?),
    }
}

pub fn build(inv: &Invocation) -> Result<(), Failure> {
    let model = build_model(&inv.config, &inv.base)?;
    prepare_out(&inv.out)?;
    let path = inv.out.join("model.json");
    write_file(&path, (io::model_to_json(&model) + "\n").as_bytes())?;
    let k = model.constants();
    let mut s = String::new();
    let mut line = |key: &str, value: String| s.push_str(&format!("{key} = {value}\n"));
    line("model_file", path.display().to_string());
    line("N", model.n().to_string());
    line("M", model.m().to_string());
    line("k0", (k.k0 + 1).to_string());
    line("gamma_star", io::fmt_f64(k.gamma_star));
    line("beta_k0", io::fmt_f64(k.beta_k0));
    for j in 0..3 {
        line(&format!("A_{j}"), io::fmt_f64(k.a[j]));
    }
    for j in 0..3 {
        line(&format!("B_{j}"), io::fmt_f64(k.b[j]));
    }
    for j in 0..3 {
        line(
            &format!("contraction_{j}"),
            io::fmt_f64(contraction_factor(&model, j)),
        );
    }
    line("derivative_regime", model.derivative_regime().to_string());
    print!("{s}");
    Ok(())
}

pub fn eval(inv: &Invocation) -> Result<(), Failure> {
    let cfg = &inv.config;
    let e = &cfg.eval;
    let model = load_model(cfg, &inv.base)?;
    let sigma = sigma_for(inv, &model)?;
    let orders = e.orders.clone().unwrap_or_else(|| vec![0]);
    if orders.is_empty() || orders.iter().any(|&j| j > 2) {
        return Err(config_err(
            "eval.orders",
            "orders must be a non-empty list drawn from 0, 1, 2",
        ));
    }
    let depth = match (e.depth, e.tolerance) {
        (Some(_), Some(_)) => {
            return Err(config_err(
                "eval",
                "'depth' and 'tolerance' are mutually exclusive",
            ))
        }
        (Some(0), None) => return Err(config_err("eval.depth", "depth must be >= 1")),
        (Some(k), None) => Depth::Fixed(k),
        (None, t) => Depth::Tolerance(t.unwrap_or(1e-10)),
    };
    let xs = match (&e.points, e.grid) {
        (Some(_), Some(_)) => {
            return Err(config_err(
                "eval",
                "'points' and 'grid' are mutually exclusive",
            ))
        }
        (Some(p), None) => p.clone(),
        (None, g) => {
            let g = g.unwrap_or(201);
            if g < 2 {
                return Err(config_err("eval.grid", "grid needs at least 2 points"));
            }
            model.data().uniform_grid(g)
        }
    };
    let mut columns = Vec::new();
    for &j in &orders {
        let req = EvalRequest {
            model: &model,
            sigma: &sigma,
            order: j,
            points: &xs,
            depth,
        };
        let (k, values) = eval_backward(&req)?;
        columns.push(EvalColumn {
            order: j,
            depth: k,
            values,
        });
    }
    prepare_out(&inv.out)?;
    write_file(
        &inv.out.join("eval.csv"),
        &to_bytes(|b| io::write_eval_csv(b, &xs, &columns, &sigma))?,
    )?;
    if e.plot.unwrap_or(true) {
        write_file(
            &inv.out.join("eval.svg"),
            io::eval_plot(&xs, &columns, &sigma).to_svg().as_bytes(),
        )?;
    }
    if let Some(levels) = e.forward_levels {
        for &j in &orders {
            let samples = eval_forward(&model, &sigma, levels, j)?;
            write_file(
                &inv.out.join(format!("forward_j{j}.csv")),
                &to_bytes(|b| io::write_forward_csv(b, &samples))?,
            )?;
        }
    }
    Ok(())
}

pub fn bounds(inv: &Invocation) -> Result<(), Failure> {
    let cfg = &inv.config;
    let model = load_model(cfg, &inv.base)?;
    let orders = cfg.eval.orders.clone().unwrap_or_else(|| vec![0, 1, 2]);
    if orders.iter().any(|&j| j > 2) {
        return Err(config_err(
            "eval.orders",
            "orders must be drawn from 0, 1, 2",
        ));
    }
    let count = cfg.study.samples.unwrap_or(20);
    let grid = cfg.study.grid.unwrap_or(SUP_GRID);
    let tol = cfg.study.tolerance.unwrap_or(1e-10);
    let rows = bound_check(&model, &orders, count, cfg.seed(inv.seed), grid, tol)?;
    prepare_out(&inv.out)?;
    let path = inv.out.join("bounds.csv");
    write_file(&path, &to_bytes(|b| io::write_bounds_csv(b, &rows))?)?;
    let violations: Vec<_> = rows.iter().filter(|r| r.margin < 0.0).collect();
    if let Some(v) = violations.first() {
        return Err(Failure::new(
            exit::BOUND,
            format!(
                "{} of {} rows exceed their bound; first: sigma {} j = {} empirical {:e} > bound {:e}",
                violations.len(),
                rows.len(),
                v.sigma,
                v.order,
                v.empirical,
                v.bound
            ),
        ));
    }
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    println!(
        "rows = {}\nmin_margin = {}",
        rows.len(),
        io::fmt_f64(min_margin)
    );
    Ok(())
}

pub fn converge(inv: &Invocation) -> Result<(), Failure> {
    let cfg = &inv.config;
    let DataSource::Function { f, interval, .. } = cfg.data_source(&inv.base)? else {
        return Err(config_err(
            "data.function",
            "converge needs an analytic data function",
        ));
    };
    if interval[0] != 0.0 {
        return Err(config_err("data.interval", "the interval must start at 0"));
    }
    let gammas = match (&cfg.model.gammas, &cfg.model.schedule) {
        (Some(_), Some(_)) => {
            return Err(config_err(
                "model",
                "'gammas' and 'schedule' are mutually exclusive",
            ))
        }
        (None, Some(s)) => GammaPolicy::Schedule(
            GammaSchedule::new(s.s, s.multipliers.clone())
                .map_err(|e| config_err("model.schedule", e))?,
        ),
        (Some(g), None) if g.as_slice() == [0.0] => GammaPolicy::Zero,
        _ => {
            return Err(config_err(
                "model.schedule",
                "converge needs a schedule, or gammas = [0.0] for the classical control",
            ))
        }
    };
    let m = match &gammas {
        GammaPolicy::Schedule(s) => s.multipliers().len(),
        GammaPolicy::Zero => 1,
    };
    let sigma = match cfg.sigma_digits(m, inv.seed)? {
        Some(w) => SigmaPolicy::Fixed(w),
        None => SigmaPolicy::SeededRandom(cfg.seed(inv.seed)),
    };
    let sizes = cfg
        .study
        .sizes
        .clone()
        .ok_or_else(|| config_err("study.sizes", "list of data sizes N is required"))?;
    if sizes.len() < 4 {
        return Err(config_err(
            "study.sizes",
            format!("the order fit needs at least 4 sizes, got {}", sizes.len()),
        ));
    }
    let study = StudyConfig {
        function: f,
        interval_length: interval[1],
        sizes,
        gammas,
        sigma,
        grid_size: cfg.study.grid.unwrap_or(SUP_GRID),
    };
    let report = convergence_study(&study).map_err(|e| match e {
        SfifError::Fit(_) | SfifError::InvalidParameter(_) => config_err("study", e),
        other => other.into(),
    })?;
    prepare_out(&inv.out)?;
    write_file(
        &inv.out.join("convergence.csv"),
        &to_bytes(|b| io::write_convergence_csv(b, &report))?,
    )?;
    write_file(
        &inv.out.join("convergence.svg"),
        io::convergence_plot(&report).to_svg().as_bytes(),
    )?;
    let mut s = String::new();
    for (j, o) in report.orders.iter().enumerate() {
        let v = match o {
            OrderEstimate::Fitted(fit) => io::fmt_f64(fit.slope),
            OrderEstimate::Exact => "exact".into(),
            OrderEstimate::Insufficient(k) => format!("insufficient({k})"),
        };
        s.push_str(&format!(
            "order_j{j} = {v}\nfloor_j{j} = {}\n",
            report.floor(j)
        ));
    }
    if report.rows.iter().any(|r| !r.stable) {
        eprintln!("warning: some errors moved by more than 1% when the grid was doubled");
    }
    print!("{s}");
    Ok(())
}
