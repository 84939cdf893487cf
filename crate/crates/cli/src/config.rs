//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sfif_core::functions::DataFunction;
use sfif_core::{BoundaryCondition, CodeWord, InterpolationData};

use crate::exit::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub sigma: SigmaSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub function: Option<String>,
    pub interval: Option<[f64; 2]>,
    pub n: Option<usize>,
    pub x: Option<Vec<f64>>,
    pub y: Option<Vec<f64>>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub gammas: Option<Vec<f64>>,
    pub schedule: Option<ScheduleSection>,
    pub boundary: Option<String>,
    pub d0: Option<f64>,
    pub dn: Option<f64>,
    pub k0: Option<usize>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub s: f64,
    pub multipliers: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSection {
    pub digits: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub orders: Option<Vec<usize>>,
    pub depth: Option<usize>,
    pub tolerance: Option<f64>,
    pub grid: Option<usize>,
    pub points: Option<Vec<f64>>,
    pub forward_levels: Option<usize>,
    pub plot: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub sizes: Option<Vec<usize>>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

/// Where the interpolation data come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    Function {
        f: DataFunction,
        interval: [f64; 2],
        n: Option<usize>,
    },
    Points(InterpolationData),
}

pub fn config_err(field: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Failure::config(format!("config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn data_source(&self, base: &Path) -> Result<DataSource, Failure> {
        let d = &self.data;
        let inline = d.x.is_some() || d.y.is_some();
        let count = [d.function.is_some(), inline, d.csv.is_some()]
            .iter()
            .filter(|b| **b)
            .count();
        if count != 1 {
            return Err(config_err(
                "data",
                "exactly one of 'function', inline 'x'/'y', or 'csv' must be given",
            ));
        }
        if let Some(name) = &d.function {
            let f = name
                .parse::<DataFunction>()
                .map_err(|e| config_err("data.function", e))?;
            let interval = d.interval.unwrap_or([0.0, 1.0]);
            if !(interval[1] > interval[0]) {
                return Err(config_err(
                    "data.interval",
                    "upper end must exceed lower end",
                ));
            }
            return Ok(DataSource::Function {
                f,
                interval,
                n: d.n,
            });
        }
        if d.n.is_some() || d.interval.is_some() {
            return Err(config_err(
                "data",
                "'n' and 'interval' only apply to 'function'",
            ));
        }
        if inline {
            let (Some(x), Some(y)) = (&d.x, &d.y) else {
                return Err(config_err("data", "inline data need both 'x' and 'y'"));
            };
            let data = InterpolationData::new(x.clone(), y.clone())
                .map_err(|e| config_err("data.x/data.y", e))?;
            return Ok(DataSource::Points(data));
        }
        let path = base.join(d.csv.as_ref().expect("csv present"));
        let data =
            sfif_core::io::read_data_csv_file(&path).map_err(|e| config_err("data.csv", e))?;
        Ok(DataSource::Points(data))
    }

    pub fn boundary(&self, source: &DataSource) -> Result<BoundaryCondition, Failure> {
        let m = &self.model;
        let kind = m.boundary.as_deref().unwrap_or(match source {
            DataSource::Function { .. } => "clamped",
            DataSource::Points(_) => "natural",
        });
        match kind {
            "natural" => {
                if m.d0.is_some() || m.dn.is_some() {
                    return Err(config_err(
                        "model.d0/model.dn",
                        "slopes only apply to a clamped boundary",
                    ));
                }
                Ok(BoundaryCondition::Natural)
            }
            "clamped" => {
                let exact = match source {
                    DataSource::Function { f, interval, .. } => {
                        Some((f.derivative(1, interval[0]), f.derivative(1, interval[1])))
                    }
                    DataSource::Points(_) => None,
                };
                let d0 = m.d0.or(exact.map(|e| e.0));
                let dn = m.dn.or(exact.map(|e| e.1));
                match (d0, dn) {
                    (Some(d0), Some(dn)) => {
                        let b = BoundaryCondition::Clamped { d0, dn };
                        b.validate()
                            .map_err(|e| config_err("model.d0/model.dn", e))?;
                        Ok(b)
                    }
                    _ => Err(config_err(
                        "model.d0/model.dn",
                        "a clamped boundary on tabulated data needs both end slopes",
                    )),
                }
            }
            other => Err(config_err(
                "model.boundary",
                format!("'{other}' is not 'clamped' or 'natural'"),
            )),
        }
    }

    /// Zero-based designated IFS.
    pub fn k0(&self) -> Result<Option<usize>, Failure> {
        match self.model.k0 {
            Some(0) => Err(config_err("model.k0", "IFS indices start at 1")),
            k => Ok(k.map(|k| k - 1)),
        }
    }

    pub fn sigma_digits(
        &self,
        m: usize,
        seed_override: Option<u64>,
    ) -> Result<Option<CodeWord>, Failure> {
        if seed_override.is_some() {
            return Ok(None);
        }
        match (&self.sigma.digits, self.sigma.seed) {
            (Some(_), Some(_)) => Err(config_err(
                "sigma",
                "give either 'digits' or 'seed', not both",
            )),
            (Some(d), None) => CodeWord::parse(d, m)
                .map(Some)
                .map_err(|e| config_err("sigma.digits", e)),
            _ => Ok(None),
        }
    }

    pub fn seed(&self, seed_override: Option<u64>) -> u64 {
        seed_override.or(self.sigma.seed).unwrap_or(0)
    }

    pub fn out_dir(&self, base: &Path, out_override: Option<&Path>) -> PathBuf {
        match out_override {
            Some(p) => p.to_path_buf(),
            None => base.join(
                self.output
                    .dir
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("out")),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[data]\nfunction = \"exp\"\nfuncion = 1\n").is_err());
        assert!(toml::from_str::<RunConfig>("[plots]\n").is_err());
    }

    #[test]
    fn one_data_source_only() {
        let cfg: RunConfig =
            toml::from_str("[data]\nfunction = \"exp\"\ncsv = \"a.csv\"\n").unwrap();
        assert!(cfg.data_source(Path::new(".")).is_err());
        let cfg: RunConfig = toml::from_str("").unwrap();
        assert!(cfg.data_source(Path::new(".")).is_err());
    }

    #[test]
    fn function_defaults_to_exact_clamped_slopes() {
        let cfg: RunConfig = toml::from_str("[data]\nfunction = \"sin_pi\"\nn = 4\n").unwrap();
        let src = cfg.data_source(Path::new(".")).unwrap();
        match cfg.boundary(&src).unwrap() {
            BoundaryCondition::Clamped { d0, dn } => {
                assert_eq!(d0, std::f64::consts::PI);
                assert_eq!(dn, -std::f64::consts::PI);
            }
            b => panic!("{b:?}"),
        }
    }
}
