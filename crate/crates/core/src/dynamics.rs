//! Bichromatic field and the fixed-orientation ionization amplitude.
//!
//! The field is `E(t) = x̂ E_x cos(2ωt) + ŷ E_y cos(ωt + φ)`. Only the
//! absorption half of each carrier enters the amplitude: one 2ω photon of
//! polarization x̂ or two ω photons of polarization ŷ. Polarizations are
//! decomposed in the helicity basis `ê_± = ∓(ê_x ± iê_y)/√2`, `ê_0 = ê_z`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitudes::AmplitudeSet;
use crate::angular::{ylm_unchecked, EulerAngles, RotationMatrices};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    /// `E_x`, amplitude of the 2ω component.
    pub ex_amplitude: f64,
    /// `E_y`, amplitude of the ω component.
    pub ey_amplitude: f64,
    /// `φ` in radians, stored unwrapped.
    pub relative_phase: f64,
    /// Carrier `ω`; only used for time axes.
    pub omega: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            ex_amplitude: 1.0,
            ey_amplitude: 1.0,
            relative_phase: 0.0,
            omega: 1.0,
        }
    }
}

impl FieldConfig {
    pub fn new(ex_amplitude: f64, ey_amplitude: f64, relative_phase: f64, omega: f64) -> Result<Self> {
        let f = Self {
            ex_amplitude,
            ey_amplitude,
            relative_phase,
            omega,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ex_amplitude >= 0.0 && self.ex_amplitude.is_finite())
            || !(self.ey_amplitude >= 0.0 && self.ey_amplitude.is_finite())
        {
            return Err(Error::invalid("field amplitudes must be finite and non-negative"));
        }
        if !self.relative_phase.is_finite() {
            return Err(Error::invalid("relative phase must be finite"));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("carrier frequency must be positive"));
        }
        Ok(())
    }

    pub fn with_phase(&self, relative_phase: f64) -> Self {
        Self {
            relative_phase,
            ..*self
        }
    }

    /// `e^{-2iφ}`, the phase carried by the two-photon route.
    pub fn two_photon_phase_factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * self.relative_phase)
    }

    /// Phases agree modulo 2π.
    pub fn same_phase(&self, other: f64) -> bool {
        let d = (self.relative_phase - other).rem_euclid(TAU);
        d < 1e-12 || TAU - d < 1e-12
    }
}

/// Photoelectron direction in the laboratory frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionDirection {
    pub theta_p: f64,
    pub phi_p: f64,
}

impl EmissionDirection {
    pub fn new(theta_p: f64, phi_p: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta_p) || !(0.0..TAU).contains(&phi_p) {
            return Err(Error::invalid(format!(
                "direction (theta={theta_p}, phi={phi_p}) outside [0,pi] x [0,2pi)"
            )));
        }
        Ok(Self { theta_p, phi_p })
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta_p.sin_cos();
        let (sp, cp) = self.phi_p.sin_cos();
        [st * cp, st * sp, ct]
    }
}

/// Cartesian components of the helicity unit vector `ê_q`, `q ∈ {-1, 0, 1}`.
pub fn spherical_unit_vector(q: i32) -> Result<[Complex64; 3]> {
    let s = FRAC_1_SQRT_2;
    match q {
        1 => Ok([Complex64::new(-s, 0.0), Complex64::new(0.0, -s), ZERO]),
        -1 => Ok([Complex64::new(s, 0.0), Complex64::new(0.0, -s), ZERO]),
        0 => Ok([ZERO, ZERO, Complex64::new(1.0, 0.0)]),
        _ => Err(Error::invalid(format!("helicity index {q} not in {{-1,0,1}}"))),
    }
}

/// Coefficients `c_q` with `v = Σ_q c_q ê_q`, ordered `q = -1, 0, +1`.
pub fn spherical_components(v: &[Complex64; 3]) -> [Complex64; 3] {
    [-1, 0, 1].map(|q| {
        let e = spherical_unit_vector(q).expect("valid helicity");
        e.iter().zip(v).map(|(ei, vi)| ei.conj() * vi).sum()
    })
}

/// Lab-frame helicity weights of the absorbed photons, without `e^{-2iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonWeights {
    /// One 2ω photon, indexed by `q + 1`.
    pub one: [Complex64; 3],
    /// Two ω photons, indexed by `[q1 + 1][q2 + 1]`.
    pub two: [[Complex64; 3]; 3],
}

impl PhotonWeights {
    pub fn for_field(field: &FieldConfig) -> Self {
        let one_c = Complex64::new(1.0, 0.0);
        let x = spherical_components(&[one_c, ZERO, ZERO]);
        let y = spherical_components(&[ZERO, one_c, ZERO]);
        let half_ex = 0.5 * field.ex_amplitude;
        let half_ey = 0.5 * field.ey_amplitude;
        let one = x.map(|c| c * half_ex);
        let mut two = [[ZERO; 3]; 3];
        for (i, row) in two.iter_mut().enumerate() {
            for (j, w) in row.iter_mut().enumerate() {
                *w = y[i] * y[j] * half_ey * half_ey;
            }
        }
        Self { one, two }
    }
}

/// `(-i)^l` by exact quarter-turn lookup.
#[inline]
pub(crate) fn minus_i_pow(l: i32) -> Complex64 {
    match l.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

#[inline]
pub(crate) fn lm_index(l: i32, m: i32) -> usize {
    (l * l + l + m) as usize
}

/// Lab-frame partial-wave coefficients at one orientation, split into the
/// one-photon part `c1_{lm}` and two-photon part `c2_{lm}` so that
/// `D_T(p̂) = Σ_{lm} (c1_{lm} + e^{-2iφ} c2_{lm}) Y_{lm}(p̂)`.
#[derive(Debug, Clone)]
pub struct LabPartialWaves {
    lmax: i32,
    one: Vec<Complex64>,
    two: Vec<Complex64>,
}

impl LabPartialWaves {
    pub fn compute(amps: &AmplitudeSet, weights: &PhotonWeights, euler: &EulerAngles) -> Self {
        let lmax = amps.lmax();
        let rot = RotationMatrices::build(lmax.max(1), euler);

        // photon factors Σ_q w_q D^1_{k',q}
        let mut p1 = [ZERO; 3];
        let mut p2 = [[ZERO; 3]; 3];
        for k in -1..=1 {
            p1[(k + 1) as usize] = (-1..=1)
                .map(|q| weights.one[(q + 1) as usize] * rot.get(1, k, q))
                .sum();
        }
        for k1 in -1..=1 {
            for k2 in -1..=1 {
                let mut acc = ZERO;
                for q1 in -1..=1 {
                    for q2 in -1..=1 {
                        acc += weights.two[(q1 + 1) as usize][(q2 + 1) as usize]
                            * rot.get(1, k1, q1)
                            * rot.get(1, k2, q2);
                    }
                }
                p2[(k1 + 1) as usize][(k2 + 1) as usize] = acc;
            }
        }

        let n = lm_index(lmax, lmax) + 1;
        let mut one = vec![ZERO; n];
        let mut two = vec![ZERO; n];
        let d = &amps.one_photon;
        let t = &amps.two_photon;
        for l in 0..=lmax {
            let molecular: Vec<(Complex64, Complex64)> = (-l..=l)
                .map(|mp| {
                    let a: Complex64 = (-1..=1).map(|k| p1[(k + 1) as usize] * d.get(l, mp, k)).sum();
                    let mut b = ZERO;
                    for k1 in -1..=1 {
                        for k2 in -1..=1 {
                            b += p2[(k1 + 1) as usize][(k2 + 1) as usize] * t.get(l, mp, k1, k2);
                        }
                    }
                    (a, b)
                })
                .collect();
            let phase = minus_i_pow(l);
            for m in -l..=l {
                let mut a = ZERO;
                let mut b = ZERO;
                for (i, mp) in (-l..=l).enumerate() {
                    let dc = rot.get(l, mp, m).conj();
                    a += dc * molecular[i].0;
                    b += dc * molecular[i].1;
                }
                one[lm_index(l, m)] = phase * a;
                two[lm_index(l, m)] = phase * b;
            }
        }
        Self { lmax, one, two }
    }

    pub fn lmax(&self) -> i32 {
        self.lmax
    }

    /// `(c1, c2)` contracted with harmonics `ylm[lm_index(l, m)]` of one direction.
    #[inline]
    pub fn contract(&self, ylm: &[Complex64]) -> (Complex64, Complex64) {
        let mut c1 = ZERO;
        let mut c2 = ZERO;
        for ((a, b), y) in self.one.iter().zip(&self.two).zip(ylm) {
            c1 += a * y;
            c2 += b * y;
        }
        (c1, c2)
    }
}

/// `Y_{lm}(p̂)` for all `l <= lmax`, laid out by `lm_index`.
pub fn harmonics_at(lmax: i32, direction: &EmissionDirection) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(lm_index(lmax, lmax) + 1);
    for l in 0..=lmax {
        for m in -l..=l {
            out.push(ylm_unchecked(l, m, direction.theta_p, direction.phi_p));
        }
    }
    out
}

/// Total ionization amplitude `D_T` for one orientation and emission direction.
pub fn total_amplitude(
    amps: &AmplitudeSet,
    field: &FieldConfig,
    orientation: &EulerAngles,
    direction: &EmissionDirection,
) -> Complex64 {
    let waves = LabPartialWaves::compute(amps, &PhotonWeights::for_field(field), orientation);
    let (c1, c2) = waves.contract(&harmonics_at(amps.lmax(), direction));
    c1 + field.two_photon_phase_factor() * c2
}

/// `2π |D_T|²` at fixed orientation.
pub fn fixed_orientation_dcs(
    amps: &AmplitudeSet,
    field: &FieldConfig,
    orientation: &EulerAngles,
    direction: &EmissionDirection,
) -> f64 {
    TAU * total_amplitude(amps, field, orientation, direction).norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub t: f64,
    pub ex: f64,
    pub ey: f64,
}

/// Samples the field over one fundamental period `2π/ω`, both ends included.
pub fn field_trajectory(field: &FieldConfig, n_samples: usize) -> Result<Vec<FieldSample>> {
    if n_samples < 2 {
        return Err(Error::invalid(format!("trajectory needs at least 2 samples, got {n_samples}")));
    }
    field.validate()?;
    let period = TAU / field.omega;
    let last = (n_samples - 1) as f64;
    Ok((0..n_samples)
        .map(|i| {
            let t = if i + 1 == n_samples {
                period
            } else {
                period * i as f64 / last
            };
            FieldSample {
                t,
                ex: field.ex_amplitude * (2.0 * field.omega * t).cos(),
                ey: field.ey_amplitude * (field.omega * t + field.relative_phase).cos(),
            }
        })
        .collect())
}
