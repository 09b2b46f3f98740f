//! Closed-form interference coefficient and the FBUD law.
//!
//! The orientation-averaged `B_{2,+1}` harmonic has the form
//! `B_{2,+1}(φ) = 𝒜 e^{-2iφ} - 𝒜* e^{2iφ} = -2iA sin(2φ - δ)` with a
//! molecule-specific complex coefficient `𝒜 = A e^{iδ}`. After reducing the
//! products of rotation matrices and averaging over orientations, `𝒜`
//! becomes a finite contraction of `d* t` with three 3j symbols:
//!
//! ```text
//! 𝒜_fbud = (5/8) E_x E_y² Σ_{l1 l2} √((2l1+1)(2l2+1)) i^{l1+l2} (-1)^{l2} (l1 l2 2; 0 0 0)
//!          Σ_{m1' m2' k1' k2' k''} (-1)^{m1'} d*_{l2 m2' k''} t_{l1 m1' k1' k2'}
//!          (l1 l2 2; -m1' m2' k1'+k2'-k'') (2 1 2; m2'-m1' -k'' k1'+k2') (1 1 2; k1' k2' -(k1'+k2'))
//! ```
//!
//! `𝒜_fbud` absorbs the factor `√(30/π)` that turns `B_{2,±1} Y*_{2,±1}`
//! into `A cosθ_p sinθ_p sinφ_p sin(2φ-δ)`. [`AsymmetryCoefficient`]
//! stores `𝒜 = 𝒜_fbud / √(30/π)`, the coefficient of `e^{-2iφ}` in `B_{2,+1}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::amplitudes::AmplitudeSet;
use crate::angular::{parity_sign, wigner_3j_unchecked};
use crate::dynamics::EmissionDirection;

/// `√(30/π)`, the factor between `B_{2,+1}` and the FBUD surface amplitude.
pub fn fbud_prefactor() -> f64 {
    (30.0 / PI).sqrt()
}

/// Relative magnitude below which `δ` is reported as undefined.
pub const PHASE_UNDEFINED_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymmetryCoefficient {
    value: Complex64,
    /// `|𝒜|` below this is treated as zero when reporting `δ`.
    zero_level: f64,
}

impl AsymmetryCoefficient {
    /// `reference_scale` is the natural size of `𝒜` for the inputs; the
    /// phase is undefined when `|value| < 1e-14 · reference_scale`.
    pub fn new(value: Complex64, reference_scale: f64) -> Self {
        Self {
            value,
            zero_level: PHASE_UNDEFINED_TOL * reference_scale.abs(),
        }
    }

    pub fn from_polar(magnitude: f64, internal_phase: f64) -> Self {
        Self {
            value: Complex64::from_polar(magnitude, internal_phase),
            zero_level: 0.0,
        }
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    /// `A = |𝒜|`.
    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }

    /// `δ = arg 𝒜 ∈ (-π, π]`, or `None` for a vanishing coefficient.
    pub fn internal_phase(&self) -> Option<f64> {
        let a = self.magnitude();
        if a == 0.0 || a < self.zero_level {
            return None;
        }
        let mut delta = self.value.arg();
        if delta <= -PI {
            delta += TAU;
        }
        Some(delta)
    }

    /// `√(30/π) A`, the amplitude of the FBUD surface.
    pub fn fbud_amplitude(&self) -> f64 {
        fbud_prefactor() * self.magnitude()
    }
}

#[inline]
fn i_pow(n: i32) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Contribution of one partial-wave pair `(l1 ∈ t, l2 ∈ d)` to the closed
/// form, without the `(5/8) E_x E_y²` prefactor. Pairs with odd `l1 + l2`
/// or outside the `(l1 l2 2)` triangle give exactly zero.
pub fn pair_contribution(amps: &AmplitudeSet, l1: i32, l2: i32) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let lmax = amps.lmax();
    if !(0..=lmax).contains(&l1) || !(0..=lmax).contains(&l2) {
        return zero;
    }
    let parity_3j = wigner_3j_unchecked(l1, l2, 2, 0, 0, 0);
    if parity_3j == 0.0 {
        return zero;
    }
    let d = &amps.one_photon;
    let t = &amps.two_photon;
    let mut inner = zero;
    for m1p in -l1..=l1 {
        let sign_m1 = parity_sign(m1p);
        for k1 in -1..=1 {
            for k2 in -1..=1 {
                let mt = k1 + k2;
                let w_photons = wigner_3j_unchecked(1, 1, 2, k1, k2, -mt);
                if w_photons == 0.0 {
                    continue;
                }
                let t_val = t.get(l1, m1p, k1, k2);
                for kpp in -1..=1 {
                    // m2' fixed by m2' - m1' = k'' - k1' - k2'
                    let m2p = m1p + kpp - mt;
                    if m2p.abs() > l2 {
                        continue;
                    }
                    let w = wigner_3j_unchecked(l1, l2, 2, -m1p, m2p, mt - kpp)
                        * wigner_3j_unchecked(2, 1, 2, m2p - m1p, -kpp, mt)
                        * w_photons;
                    if w != 0.0 {
                        inner += d.get(l2, m2p, kpp).conj() * t_val * (w * sign_m1);
                    }
                }
            }
        }
    }
    let pref = (((2 * l1 + 1) * (2 * l2 + 1)) as f64).sqrt() * parity_sign(l2) * parity_3j;
    i_pow(l1 + l2) * inner * pref
}

/// The closed form in FBUD normalization, `𝒜_fbud = √(30/π) 𝒜`.
pub fn closed_form_fbud_coefficient(amps: &AmplitudeSet, ex: f64, ey: f64) -> Complex64 {
    let lmax = amps.lmax();
    let mut sum = Complex64::new(0.0, 0.0);
    for l1 in 0..=lmax {
        for l2 in 0..=lmax {
            if (l1 + l2) % 2 == 1 || (l1 - l2).abs() > 2 || l1 + l2 < 2 {
                continue;
            }
            sum += pair_contribution(amps, l1, l2);
        }
    }
    sum * (0.625 * ex * ey * ey)
}

/// Closed-form `𝒜`, the coefficient of `e^{-2iφ}` in `B_{2,+1}`.
pub fn analytic_a(amps: &AmplitudeSet, ex: f64, ey: f64) -> AsymmetryCoefficient {
    let value = closed_form_fbud_coefficient(amps, ex, ey) / fbud_prefactor();
    let d_max = amps.one_photon.entries().fold(0.0_f64, |a, e| a.max(e.3.norm()));
    let t_max = amps.two_photon.entries().fold(0.0_f64, |a, e| a.max(e.4.norm()));
    AsymmetryCoefficient::new(value, ex * ey * ey * d_max * t_max)
}

/// The three products making up the geometric bracket that collapses the
/// `T = 2, M_T ∈ {0, -2}` orientation integrals:
/// `-(2 1 2;1 -1 0)(1 1 2;1 -1 0)`, `-(2 1 2;1 -1 0)(1 1 2;-1 1 0)`,
/// `(2 1 2;1 1 -2)(1 1 2;-1 -1 2)`.
pub fn bracket_terms() -> [f64; 3] {
    let w = wigner_3j_unchecked;
    [
        -w(2, 1, 2, 1, -1, 0) * w(1, 1, 2, 1, -1, 0),
        -w(2, 1, 2, 1, -1, 0) * w(1, 1, 2, -1, 1, 0),
        w(2, 1, 2, 1, 1, -2) * w(1, 1, 2, -1, -1, 2),
    ]
}

/// Sum of [`bracket_terms`]; equals `2/(5√3)`.
pub fn bracket_constant() -> f64 {
    bracket_terms().iter().sum()
}

/// `B_{2,+1}(φ) = -2iA sin(2φ - δ)`.
pub fn b21_of_phi(coeff: &AsymmetryCoefficient, phi: f64) -> Complex64 {
    let e = Complex64::from_polar(1.0, -2.0 * phi);
    let z = coeff.value() * e;
    Complex64::new(0.0, 2.0 * z.im)
}

/// `B_{2,-1}(φ) = -B*_{2,+1}(φ)`.
pub fn b2m1_of_phi(coeff: &AsymmetryCoefficient, phi: f64) -> Complex64 {
    -b21_of_phi(coeff, phi).conj()
}

/// FBUD surface `√(30/π) A cosθ_p sinθ_p sinφ_p sin(2φ - δ)`, i.e.
/// `B_{2,+1}Y*_{2,+1} + B_{2,-1}Y*_{2,-1}`.
pub fn fbud_value(coeff: &AsymmetryCoefficient, phi: f64, direction: &EmissionDirection) -> f64 {
    let (st, ct) = direction.theta_p.sin_cos();
    // A sin(2φ-δ) = Im(𝒜 e^{-2iφ}) with a sign flip; avoids needing δ
    let a_sin = -(coeff.value() * Complex64::from_polar(1.0, -2.0 * phi)).im;
    fbud_prefactor() * a_sin * ct * st * direction.phi_p.sin()
}

/// True when `d` and `t` are invariant under `(m', k') -> (-m', -k')` to `tol`.
pub fn is_reflection_symmetric(amps: &AmplitudeSet, tol: f64) -> bool {
    amps.one_photon
        .entries()
        .all(|(l, m, k, z)| (z - amps.one_photon.get(l, -m, -k)).norm() <= tol)
        && amps
            .two_photon
            .entries()
            .all(|(l, m, k1, k2, z)| (z - amps.two_photon.get(l, -m, -k1, -k2)).norm() <= tol)
}
