//! Run configuration: one JSON document, every field optional.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use fbud_core::amplitudes::DEFAULT_LMAX;
use fbud_core::{FieldConfig, QuadratureSpec};
use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AmplitudeSource {
    /// Gaussian random set, reproducible from `seed`.
    Random { seed: u64, lmax: i32 },
    /// Amplitude JSON file.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapGrid {
    /// Polar samples including both poles.
    pub n_theta: usize,
    /// Azimuthal samples `2πj/n_phi`; the grid is closed under `φ_p → -φ_p`.
    pub n_phi: usize,
}

impl Default for MapGrid {
    fn default() -> Self {
        Self { n_theta: 37, n_phi: 72 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Random sets used for the analytic/quadrature comparison.
    pub seeds: Vec<u64>,
    pub lmax: Vec<i32>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seeds: (1..=5).collect(),
            lmax: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub amplitudes: AmplitudeSource,
    pub field: FieldConfig,
    /// `null` picks the default rule, enlarged as `lmax` requires.
    pub quadrature: Option<QuadratureSpec>,
    /// Radians; strings such as `"0.25pi"` are accepted on input.
    #[serde(deserialize_with = "angle_list")]
    pub phi_scan: Vec<f64>,
    pub output_dir: PathBuf,
    /// Worker threads, 0 = all cores.
    pub threads: usize,
    pub map: MapGrid,
    pub trajectory_samples: usize,
    pub verify: VerifyOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            amplitudes: AmplitudeSource::Random {
                seed: 1,
                lmax: DEFAULT_LMAX,
            },
            field: FieldConfig::default(),
            quadrature: None,
            phi_scan: (0..16).map(|i| -0.5 * PI + PI * i as f64 / 16.0).collect(),
            output_dir: PathBuf::from("out"),
            threads: 0,
            map: MapGrid::default(),
            trajectory_samples: 201,
            verify: VerifyOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleInput {
    Radians(f64),
    Text(String),
}

fn angle_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    Vec::<AngleInput>::deserialize(d)?
        .into_iter()
        .map(|a| match a {
            AngleInput::Radians(x) => Ok(x),
            AngleInput::Text(s) => parse_angle(&s).map_err(serde::de::Error::custom),
        })
        .collect()
}

/// Parses `1.2`, `pi`, `-pi`, `0.25pi`, `0.25*pi`, `pi/4`, `3pi/8` (also with `π`).
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim().to_ascii_lowercase().replace('π', "pi");
    let bad = || format!("cannot parse angle {text:?}; use radians or multiples of pi such as 0.25pi");
    let Some(at) = s.find("pi") else {
        return s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    };
    let coefficient = match s[..at].trim().trim_end_matches('*').trim() {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let denominator = match s[at + 2..].trim() {
        "" => 1.0,
        rest => rest
            .strip_prefix('/')
            .and_then(|d| d.trim().parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(bad)?,
    };
    let v = coefficient * PI / denominator;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Comma-separated list of [`parse_angle`] values.
pub fn parse_angle_list(text: &str) -> Result<Vec<f64>, String> {
    let values: Vec<f64> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_angle)
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("empty phase list".into());
    }
    Ok(values)
}
