//! Molecular-frame transition amplitudes.
//!
//! `d[l][m'][k']` is the one-photon (2ω) amplitude for emitting partial wave
//! `(l, m')` after absorbing a photon of molecular-frame helicity `k'`;
//! `t[l][m'][k1'][k2']` is the two-photon (ω+ω) counterpart. Radial
//! integrals, scattering phases and intermediate-state sums are folded
//! into the complex values. The overall scale is arbitrary.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LMAX: i32 = 3;

/// Largest partial wave accepted for amplitude tensors.
pub const MAX_LMAX: i32 = 12;

fn check_lmax(lmax: i32) -> Result<()> {
    if !(0..=MAX_LMAX).contains(&lmax) {
        return Err(Error::invalid(format!("lmax={lmax} outside 0..={MAX_LMAX}")));
    }
    Ok(())
}

#[inline]
fn wave_offset(l: i32) -> usize {
    // Σ_{l'<l} (2l'+1) = l²
    (l * l) as usize
}

fn in_range(lmax: i32, l: i32, m: i32, ks: &[i32]) -> bool {
    (0..=lmax).contains(&l) && m.abs() <= l && ks.iter().all(|k| k.abs() <= 1)
}

/// Dense one-photon tensor `d[l][m'][k']`.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePhotonAmplitudes {
    lmax: i32,
    data: Vec<Complex64>,
}

impl OnePhotonAmplitudes {
    pub fn zeros(lmax: i32) -> Result<Self> {
        check_lmax(lmax)?;
        let n = wave_offset(lmax + 1) * 3;
        Ok(Self {
            lmax,
            data: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn lmax(&self) -> i32 {
        self.lmax
    }

    #[inline]
    fn index(l: i32, m: i32, k: i32) -> usize {
        (wave_offset(l) + (m + l) as usize) * 3 + (k + 1) as usize
    }

    /// Entry `d[l][m][k]`; indices must be in range.
    #[inline]
    pub fn get(&self, l: i32, m: i32, k: i32) -> Complex64 {
        debug_assert!(in_range(self.lmax, l, m, &[k]));
        self.data[Self::index(l, m, k)]
    }

    pub fn set(&mut self, l: i32, m: i32, k: i32, value: Complex64) -> Result<()> {
        if !in_range(self.lmax, l, m, &[k]) {
            return Err(Error::invalid(format!(
                "d index (l={l}, m={m}, k={k}) out of range for lmax={}",
                self.lmax
            )));
        }
        self.data[Self::index(l, m, k)] = value;
        Ok(())
    }

    /// Iterates `(l, m, k, value)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (i32, i32, i32, Complex64)> + '_ {
        (0..=self.lmax).flat_map(move |l| {
            (-l..=l).flat_map(move |m| (-1..=1).map(move |k| (l, m, k, self.get(l, m, k))))
        })
    }

    fn map_indices(&self, f: impl Fn(i32, i32, i32) -> Complex64) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            for m in -l..=l {
                for k in -1..=1 {
                    out.data[Self::index(l, m, k)] = f(l, m, k);
                }
            }
        }
        out
    }
}

/// Dense two-photon tensor `t[l][m'][k1'][k2']`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonAmplitudes {
    lmax: i32,
    data: Vec<Complex64>,
}

impl TwoPhotonAmplitudes {
    pub fn zeros(lmax: i32) -> Result<Self> {
        check_lmax(lmax)?;
        let n = wave_offset(lmax + 1) * 9;
        Ok(Self {
            lmax,
            data: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn lmax(&self) -> i32 {
        self.lmax
    }

    #[inline]
    fn index(l: i32, m: i32, k1: i32, k2: i32) -> usize {
        (wave_offset(l) + (m + l) as usize) * 9 + (k1 + 1) as usize * 3 + (k2 + 1) as usize
    }

    #[inline]
    pub fn get(&self, l: i32, m: i32, k1: i32, k2: i32) -> Complex64 {
        debug_assert!(in_range(self.lmax, l, m, &[k1, k2]));
        self.data[Self::index(l, m, k1, k2)]
    }

    pub fn set(&mut self, l: i32, m: i32, k1: i32, k2: i32, value: Complex64) -> Result<()> {
        if !in_range(self.lmax, l, m, &[k1, k2]) {
            return Err(Error::invalid(format!(
                "t index (l={l}, m={m}, k1={k1}, k2={k2}) out of range for lmax={}",
                self.lmax
            )));
        }
        self.data[Self::index(l, m, k1, k2)] = value;
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (i32, i32, i32, i32, Complex64)> + '_ {
        (0..=self.lmax).flat_map(move |l| {
            (-l..=l).flat_map(move |m| {
                (-1..=1).flat_map(move |k1| (-1..=1).map(move |k2| (l, m, k1, k2, self.get(l, m, k1, k2))))
            })
        })
    }

    fn map_indices(&self, f: impl Fn(i32, i32, i32, i32) -> Complex64) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            for m in -l..=l {
                for k1 in -1..=1 {
                    for k2 in -1..=1 {
                        out.data[Self::index(l, m, k1, k2)] = f(l, m, k1, k2);
                    }
                }
            }
        }
        out
    }
}

/// Paired one- and two-photon tensors describing one molecule.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSet {
    pub one_photon: OnePhotonAmplitudes,
    pub two_photon: TwoPhotonAmplitudes,
    pub label: String,
}

impl AmplitudeSet {
    pub fn new(one_photon: OnePhotonAmplitudes, two_photon: TwoPhotonAmplitudes, label: impl Into<String>) -> Result<Self> {
        if one_photon.lmax != two_photon.lmax {
            return Err(Error::Schema(format!(
                "lmax mismatch: d has {}, t has {}",
                one_photon.lmax, two_photon.lmax
            )));
        }
        Ok(Self {
            one_photon,
            two_photon,
            label: label.into(),
        })
    }

    pub fn zeros(lmax: i32) -> Result<Self> {
        Self::new(OnePhotonAmplitudes::zeros(lmax)?, TwoPhotonAmplitudes::zeros(lmax)?, "zero")
    }

    pub fn lmax(&self) -> i32 {
        self.one_photon.lmax
    }

    /// Largest `|value|` over both tensors.
    pub fn max_abs(&self) -> f64 {
        self.one_photon
            .data
            .iter()
            .chain(&self.two_photon.data)
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Keeps only partial waves for which `keep_d(l)` / `keep_t(l)` hold.
    pub fn filter_partial_waves(&self, keep_d: impl Fn(i32) -> bool, keep_t: impl Fn(i32) -> bool) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            one_photon: self
                .one_photon
                .map_indices(|l, m, k| if keep_d(l) { self.one_photon.get(l, m, k) } else { zero }),
            two_photon: self.two_photon.map_indices(|l, m, k1, k2| {
                if keep_t(l) {
                    self.two_photon.get(l, m, k1, k2)
                } else {
                    zero
                }
            }),
            label: self.label.clone(),
        }
    }

    /// Multiplies every two-photon entry by `e^{i·phase}`.
    pub fn with_two_photon_phase(&self, phase: f64) -> Self {
        let f = Complex64::from_polar(1.0, phase);
        let mut out = self.clone();
        out.two_photon.data.iter_mut().for_each(|z| *z *= f);
        out
    }

    /// Returns `(self.d, 0)` and `(0, self.t)`.
    pub fn split(&self) -> (Self, Self) {
        let zero_d = OnePhotonAmplitudes::zeros(self.lmax()).expect("valid lmax");
        let zero_t = TwoPhotonAmplitudes::zeros(self.lmax()).expect("valid lmax");
        (
            Self {
                one_photon: self.one_photon.clone(),
                two_photon: zero_t,
                label: self.label.clone(),
            },
            Self {
                one_photon: zero_d,
                two_photon: self.two_photon.clone(),
                label: self.label.clone(),
            },
        )
    }

    /// Entry-wise sum; both sets must share `lmax`.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.lmax() != other.lmax() {
            return Err(Error::invalid("cannot add amplitude sets with different lmax"));
        }
        let mut out = self.clone();
        for (a, b) in out.one_photon.data.iter_mut().zip(&other.one_photon.data) {
            *a += b;
        }
        for (a, b) in out.two_photon.data.iter_mut().zip(&other.two_photon.data) {
            *a += b;
        }
        Ok(out)
    }
}

/// Generic chiral model: every entry is a standard complex Gaussian.
///
/// The stream is ChaCha8 seeded with `seed` through `seed_from_u64`; real
/// then imaginary parts are drawn with `StandardNormal`, first for all
/// `d(l, m, k)` and then for all `t(l, m, k1, k2)`, each in row-major order
/// with `m` and `k` ascending.
pub fn random_amplitudes(seed: u64, lmax: i32) -> Result<AmplitudeSet> {
    if lmax < 1 {
        return Err(Error::invalid(format!("random amplitudes need lmax >= 1, got {lmax}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    };
    let mut set = AmplitudeSet::zeros(lmax)?;
    set.one_photon.data.iter_mut().for_each(|z| *z = draw());
    set.two_photon.data.iter_mut().for_each(|z| *z = draw());
    set.label = format!("random(seed={seed}, lmax={lmax})");
    Ok(set)
}

/// Projects onto the reflection-symmetric subspace
/// `d[l][m][k] = d[l][-m][-k]`, `t[l][m][k1][k2] = t[l][-m][-k1][-k2]`.
pub fn achiralize(set: &AmplitudeSet) -> AmplitudeSet {
    let d = &set.one_photon;
    let t = &set.two_photon;
    AmplitudeSet {
        one_photon: d.map_indices(|l, m, k| (d.get(l, m, k) + d.get(l, -m, -k)) * 0.5),
        two_photon: t.map_indices(|l, m, k1, k2| (t.get(l, m, k1, k2) + t.get(l, -m, -k1, -k2)) * 0.5),
        label: format!("achiral({})", set.label),
    }
}

/// Mirror partner under the bare index reflection `(m', k') -> (-m', -k')`.
pub fn enantiomer(set: &AmplitudeSet) -> AmplitudeSet {
    let d = &set.one_photon;
    let t = &set.two_photon;
    AmplitudeSet {
        one_photon: d.map_indices(|l, m, k| d.get(l, -m, -k)),
        two_photon: t.map_indices(|l, m, k1, k2| t.get(l, -m, -k1, -k2)),
        label: format!("enantiomer({})", set.label),
    }
}

// ---------------------------------------------------------------------------
// JSON file format

/// A float that may also be written as a string such as `"NaN"`, so that
/// non-finite entries can be reported by validation instead of the parser.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum FileFloat {
    Number(f64),
    Text(String),
}

impl FileFloat {
    fn value(&self) -> Option<f64> {
        match self {
            FileFloat::Number(x) => Some(*x),
            FileFloat::Text(s) => s.trim().parse::<f64>().ok(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OneEntry {
    l: i32,
    m: i32,
    k: i32,
    re: FileFloat,
    im: FileFloat,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TwoEntry {
    l: i32,
    m: i32,
    k1: i32,
    k2: i32,
    re: FileFloat,
    im: FileFloat,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplitudeFile {
    lmax: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default)]
    d: Vec<OneEntry>,
    #[serde(default)]
    t: Vec<TwoEntry>,
}

fn is_positive_zero(z: Complex64) -> bool {
    z.re.to_bits() == 0 && z.im.to_bits() == 0
}

fn finite_pair(re: &FileFloat, im: &FileFloat, entry: impl Fn() -> String) -> Result<Complex64> {
    match (re.value(), im.value()) {
        (Some(r), Some(i)) if r.is_finite() && i.is_finite() => Ok(Complex64::new(r, i)),
        (Some(_), Some(_)) => Err(Error::NonFinite { entry: entry() }),
        _ => Err(Error::Schema(format!("unparseable number in {}", entry()))),
    }
}

impl AmplitudeSet {
    /// Serializes to the JSON amplitude schema. Entries equal to `+0.0 + 0.0i`
    /// are omitted; everything else is written with round-trip precision.
    pub fn to_json(&self) -> Result<String> {
        for (l, m, k, z) in self.one_photon.entries() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite {
                    entry: format!("d(l={l}, m={m}, k={k})"),
                });
            }
        }
        for (l, m, k1, k2, z) in self.two_photon.entries() {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite {
                    entry: format!("t(l={l}, m={m}, k1={k1}, k2={k2})"),
                });
            }
        }
        let file = AmplitudeFile {
            lmax: self.lmax(),
            label: Some(self.label.clone()),
            d: self
                .one_photon
                .entries()
                .filter(|e| !is_positive_zero(e.3))
                .map(|(l, m, k, z)| OneEntry {
                    l,
                    m,
                    k,
                    re: FileFloat::Number(z.re),
                    im: FileFloat::Number(z.im),
                })
                .collect(),
            t: self
                .two_photon
                .entries()
                .filter(|e| !is_positive_zero(e.4))
                .map(|(l, m, k1, k2, z)| TwoEntry {
                    l,
                    m,
                    k1,
                    k2,
                    re: FileFloat::Number(z.re),
                    im: FileFloat::Number(z.im),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file).expect("amplitude file serializes"))
    }

    /// Parses the JSON amplitude schema. `source` names the input in errors.
    pub fn from_json(text: &str, source: &Path) -> Result<Self> {
        let file: AmplitudeFile = serde_json::from_str(text).map_err(|e| Error::Json {
            path: source.to_path_buf(),
            source: e,
        })?;
        let lmax = file.lmax;
        if !(0..=MAX_LMAX).contains(&lmax) {
            return Err(Error::Schema(format!("lmax={lmax} outside 0..={MAX_LMAX}")));
        }
        let mut set = AmplitudeSet::zeros(lmax)?;
        let mut seen_d = vec![false; set.one_photon.data.len()];
        for e in &file.d {
            let name = || format!("d(l={}, m={}, k={})", e.l, e.m, e.k);
            if !in_range(lmax, e.l, e.m, &[e.k]) {
                return Err(Error::Schema(format!("{} does not fit lmax={lmax}", name())));
            }
            let idx = OnePhotonAmplitudes::index(e.l, e.m, e.k);
            if std::mem::replace(&mut seen_d[idx], true) {
                return Err(Error::Schema(format!("duplicate entry {}", name())));
            }
            set.one_photon.data[idx] = finite_pair(&e.re, &e.im, name)?;
        }
        let mut seen_t = vec![false; set.two_photon.data.len()];
        for e in &file.t {
            let name = || format!("t(l={}, m={}, k1={}, k2={})", e.l, e.m, e.k1, e.k2);
            if !in_range(lmax, e.l, e.m, &[e.k1, e.k2]) {
                return Err(Error::Schema(format!("{} does not fit lmax={lmax}", name())));
            }
            let idx = TwoPhotonAmplitudes::index(e.l, e.m, e.k1, e.k2);
            if std::mem::replace(&mut seen_t[idx], true) {
                return Err(Error::Schema(format!("duplicate entry {}", name())));
            }
            set.two_photon.data[idx] = finite_pair(&e.re, &e.im, name)?;
        }
        set.label = file.label.unwrap_or_else(|| source.display().to_string());
        Ok(set)
    }
}

pub fn load_amplitudes(path: impl AsRef<Path>) -> Result<AmplitudeSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    AmplitudeSet::from_json(&text, path)
}

pub fn save_amplitudes(set: &AmplitudeSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, set.to_json()?).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
