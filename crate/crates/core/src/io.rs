//! Model files, CSV tables and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{BoundRow, ConvergenceReport, OrderEstimate};
use crate::error::{Result, SfifError};
use crate::eval::SampleSet;
use crate::model::{CodeWord, CubicPoly, InterpolationData, Sifs};
use crate::spline::{BoundaryCondition, SplineModel};

/// On-disk layout of a [`SplineModel`]. Indices run `[k][n]`, both zero-based;
/// `q_coeffs[k][n]` holds the monomial coefficients `c_0..c_3` of `q_n` in the
/// global abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub knots: Vec<f64>,
    pub ordinates: Vec<f64>,
    pub gammas: Vec<f64>,
    pub q_coeffs: Vec<Vec<[f64; 4]>>,
    pub boundary: BoundaryCondition,
    pub d_knots: Vec<Vec<f64>>,
    pub moments: Vec<[f64; 2]>,
}

impl ModelFile {
    pub fn from_model(model: &SplineModel) -> Self {
        let sifs = model.sifs();
        Self {
            knots: model.data().knots().to_vec(),
            ordinates: model.data().ordinates().to_vec(),
            gammas: sifs.gammas().to_vec(),
            q_coeffs: (0..model.m())
                .map(|k| (0..model.n()).map(|n| sifs.q(n, k).coeffs).collect())
                .collect(),
            boundary: model.boundary(),
            d_knots: model.d_knots().to_vec(),
            moments: model.moments().to_vec(),
        }
    }

    /// Rebuilds the model, re-checking every invariant.
    pub fn into_model(self, k0: Option<usize>) -> Result<SplineModel> {
        let bad = |e: SfifError| SfifError::ModelFile(e.to_string());
        let data = InterpolationData::new(self.knots, self.ordinates).map_err(bad)?;
        let q: Vec<Vec<CubicPoly>> = self
            .q_coeffs
            .iter()
            .map(|row| row.iter().copied().map(CubicPoly::new).collect())
            .collect();
        let sifs = Sifs::new(data, self.gammas, q).map_err(bad)?;
        SplineModel::from_parts(sifs, self.d_knots, self.moments, self.boundary, k0).map_err(bad)
    }
}

pub fn model_to_json(model: &SplineModel) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(model)).expect("model serializes")
}

/// Parses a model file; syntax errors report line and column.
pub fn model_from_json(text: &str, k0: Option<usize>) -> Result<SplineModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| {
        SfifError::ModelFile(format!("{e} (line {}, column {})", e.line(), e.column()))
    })?;
    file.into_model(k0)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SfifError + '_ {
    move |source| SfifError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_model(path: &Path, model: &SplineModel) -> Result<()> {
    fs::write(path, model_to_json(model) + "\n").map_err(io_err(path))
}

pub fn read_model(path: &Path, k0: Option<usize>) -> Result<SplineModel> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    model_from_json(&text, k0).map_err(|e| match e {
        SfifError::ModelFile(msg) => SfifError::ModelFile(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Reads `x,y` data with a mandatory header row.
pub fn read_data_csv<R: Read>(reader: R) -> Result<InterpolationData> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| SfifError::InvalidData(format!("data csv: {e}")))?
        .clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(SfifError::InvalidData(format!(
            "data csv needs the header 'x,y', found '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| SfifError::InvalidData(format!("data csv: {e}")))?;
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                SfifError::InvalidData(format!("data csv row {}: '{s}' is not a number", i + 2))
            })
        };
        xs.push(parse(&rec[0])?);
        ys.push(parse(&rec[1])?);
    }
    InterpolationData::new(xs, ys)
}

pub fn read_data_csv_file(path: &Path) -> Result<InterpolationData> {
    read_data_csv(fs::File::open(path).map_err(io_err(path))?)
}

/// Shortest text that round-trips: 17 significant digits in scientific form.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn finish<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| SfifError::Io {
            path: "csv".into(),
            source: e.into_error(),
        })?
        .flush()
        .map_err(|source| SfifError::Io {
            path: "csv".into(),
            source,
        })
}

fn csv_fail(e: csv::Error) -> SfifError {
    SfifError::Io {
        path: "csv".into(),
        source: std::io::Error::other(e),
    }
}

/// One evaluated column: order `j`, depth used, and values at `xs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalColumn {
    pub order: usize,
    pub depth: usize,
    pub values: Vec<f64>,
}

/// Columns `x, value, j, depth, sigma`.
pub fn write_eval_csv<W: Write>(
    out: W,
    xs: &[f64],
    columns: &[EvalColumn],
    sigma: &CodeWord,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["x", "value", "j", "depth", "sigma"])
        .map_err(csv_fail)?;
    for c in columns {
        let word = sigma.cycled(c.depth).to_string();
        for (x, v) in xs.iter().zip(&c.values) {
            w.write_record([
                fmt_f64(*x),
                fmt_f64(*v),
                c.order.to_string(),
                c.depth.to_string(),
                word.clone(),
            ])
            .map_err(csv_fail)?;
        }
    }
    finish(w)
}

/// Columns `x, y, level`.
pub fn write_forward_csv<W: Write>(out: W, samples: &SampleSet) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["x", "y", "level"]).map_err(csv_fail)?;
    for (x, y) in &samples.points {
        w.write_record([fmt_f64(*x), fmt_f64(*y), samples.level.to_string()])
            .map_err(csv_fail)?;
    }
    finish(w)
}

/// Columns `N, h, err_j0, err_j1, err_j2, sigma_seed`, then footer rows
/// `order_j*` and `residual_j*`.
pub fn write_convergence_csv<W: Write>(out: W, report: &ConvergenceReport) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["N", "h", "err_j0", "err_j1", "err_j2", "sigma_seed"])
        .map_err(csv_fail)?;
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.h),
            fmt_f64(r.err[0]),
            fmt_f64(r.err[1]),
            fmt_f64(r.err[2]),
            r.sigma_seed
                .map_or_else(|| "fixed".to_string(), |s| s.to_string()),
        ])
        .map_err(csv_fail)?;
    }
    for (j, o) in report.orders.iter().enumerate() {
        let (order, residual) = match o {
            OrderEstimate::Fitted(f) => (fmt_f64(f.slope), fmt_f64(f.residual)),
            OrderEstimate::Exact => ("exact".into(), "exact".into()),
            OrderEstimate::Insufficient(k) => (format!("insufficient({k})"), "n/a".into()),
        };
        w.write_record([format!("order_j{j}"), order])
            .map_err(csv_fail)?;
        w.write_record([format!("residual_j{j}"), residual])
            .map_err(csv_fail)?;
    }
    finish(w)
}

/// Columns `sigma, j, empirical, bound, margin`.
pub fn write_bounds_csv<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["sigma", "j", "empirical", "bound", "margin"])
        .map_err(csv_fail)?;
    for r in rows {
        w.write_record([
            r.sigma.to_string(),
            r.order.to_string(),
            fmt_f64(r.empirical),
            fmt_f64(r.bound),
            fmt_f64(r.margin),
        ])
        .map_err(csv_fail)?;
    }
    finish(w)
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// A standalone SVG document with linear axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Plot {
    pub fn to_svg(&self) -> String {
        let pts = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 <= 0.0 {
            (x0, x1) = (x0 - 0.5, x1 + 0.5);
        }
        if y1 - y0 <= 0.0 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(
            s,
            r#"<path d="M{l} {t} L{l} {b} L{r} {b}" fill="none" stroke="black"/>"#
        );
        for (v, anchor_x) in [(x0, l), (x1, r)] {
            let _ = writeln!(
                s,
                r#"<text x="{anchor_x}" y="{}" text-anchor="middle">{v:.3}</text>"#,
                b + 16.0
            );
        }
        for (v, anchor_y) in [(y0, b), (y1, t)] {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{anchor_y}" text-anchor="end">{v:.3}</text>"#,
                l - 6.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = series
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let dash = if series.dashed {
                r#" stroke-dasharray="4 3""#
            } else {
                ""
            };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                path.join(" ")
            );
            let ly = t + 14.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}"{dash}/><text x="{}" y="{}">{}</text>"#,
                r - 110.0,
                r - 90.0,
                r - 86.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// One polyline per derivative order.
pub fn eval_plot(xs: &[f64], columns: &[EvalColumn], sigma: &CodeWord) -> Plot {
    Plot {
        title: format!("g_sigma, sigma = {}", sigma.cycled(sigma.len().min(12))),
        x_label: "x".into(),
        y_label: "value".into(),
        series: columns
            .iter()
            .map(|c| Series {
                label: format!("j = {}", c.order),
                points: xs.iter().copied().zip(c.values.iter().copied()).collect(),
                dashed: false,
            })
            .collect(),
    }
}

/// `log10 err` against `log10 h` per order, with dashed reference slopes
/// 2, 1, 0 and 4 anchored at the coarsest `j = 0` error.
pub fn convergence_plot(report: &ConvergenceReport) -> Plot {
    let mut series: Vec<Series> = (0..3)
        .map(|j| Series {
            label: format!("err j = {j}"),
            points: report
                .rows
                .iter()
                .filter(|r| r.err[j] > 0.0)
                .map(|r| (r.h.log10(), r.err[j].log10()))
                .collect(),
            dashed: false,
        })
        .collect();
    let hs: Vec<f64> = report.rows.iter().map(|r| r.h.log10()).collect();
    if let (Some(&hmax), Some(&hmin), Some(anchor)) = (
        hs.iter().max_by(|a, b| a.total_cmp(b)),
        hs.iter().min_by(|a, b| a.total_cmp(b)),
        report
            .rows
            .iter()
            .max_by(|a, b| a.h.total_cmp(&b.h))
            .map(|r| r.err[0].max(1e-300).log10()),
    ) {
        for slope in [2.0, 1.0, 0.0, 4.0] {
            series.push(Series {
                label: format!("slope {slope}"),
                points: vec![(hmax, anchor), (hmin, anchor - slope * (hmax - hmin))],
                dashed: true,
            });
        }
    }
    Plot {
        title: "sup error against h (log10)".into(),
        x_label: "log10 h".into(),
        y_label: "log10 error".into(),
        series,
    }
}
