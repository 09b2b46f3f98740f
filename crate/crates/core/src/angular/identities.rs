//! Frame transformations and the rotation-matrix reduction identities used
//! to collapse the orientation-averaged interference term to closed form.
//!
//! Each function evaluates one side of an identity so that both sides can
//! be compared numerically.

use num_complex::Complex64;

use super::{
    big_d_unchecked, check_jm, parity_sign, wigner_3j_unchecked, ylm_unchecked, EulerAngles,
};
use crate::error::{Error, Result};

/// Spherical component `k` of a dipole in the lab frame from its
/// molecular-frame components: `d_k = Σ_{k'} D^1_{k'k} d_{k'}`.
///
/// `molecular` is ordered `k' = -1, 0, +1`.
pub fn dipole_lab_component(k: i32, euler: &EulerAngles, molecular: &[Complex64; 3]) -> Result<Complex64> {
    check_jm(1, k)?;
    Ok((-1..=1)
        .map(|kp| big_d_unchecked(1, kp, k, euler) * molecular[(kp + 1) as usize])
        .sum())
}

/// Molecular-frame harmonic expressed through lab-frame harmonics:
/// `Y_{lm'}(p̂') = Σ_m D^{l*}_{m'm} Y_{lm}(p̂)`, where `p̂' = R(α,β,γ) p̂`.
pub fn molecular_harmonic_from_lab(
    l: i32,
    m_prime: i32,
    euler: &EulerAngles,
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    check_jm(l, m_prime)?;
    Ok((-l..=l)
        .map(|m| big_d_unchecked(l, m_prime, m, euler).conj() * ylm_unchecked(l, m, theta, phi))
        .sum())
}

/// Right-hand side of the Clebsch–Gordan series for
/// `D^{l1*}_{m1',m1} D^{l2}_{m2',m2}`.
#[allow(clippy::too_many_arguments)]
pub fn conj_pair_series(
    l1: i32,
    m1p: i32,
    m1: i32,
    l2: i32,
    m2p: i32,
    m2: i32,
    euler: &EulerAngles,
) -> Result<Complex64> {
    check_jm(l1, m1p)?;
    check_jm(l1, m1)?;
    check_jm(l2, m2p)?;
    check_jm(l2, m2)?;
    let mjp = m2p - m1p;
    let mj = m2 - m1;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in (l1 - l2).abs()..=(l1 + l2) {
        if mjp.abs() > j || mj.abs() > j {
            continue;
        }
        let w = parity_sign(mj - mjp)
            * (2 * j + 1) as f64
            * wigner_3j_unchecked(l1, l2, j, -m1p, m2p, -mjp)
            * wigner_3j_unchecked(l1, l2, j, -m1, m2, -mj);
        sum += big_d_unchecked(j, mjp, mj, euler) * w;
    }
    Ok(sum * parity_sign(m1p - m1))
}

/// Right-hand side of the coupling of two photon rotation matrices
/// `D^1_{k1',q1} D^1_{k2',q2}` into ranks `T = 0, 1, 2`.
pub fn photon_pair_series(k1: i32, k2: i32, q1: i32, q2: i32, euler: &EulerAngles) -> Result<Complex64> {
    for v in [k1, k2, q1, q2] {
        check_jm(1, v)?;
    }
    let mtp = k1 + k2;
    let mt = q1 + q2;
    let mut sum = Complex64::new(0.0, 0.0);
    for t in 0..=2 {
        if mtp.abs() > t || mt.abs() > t {
            continue;
        }
        let w = parity_sign(mt - mtp)
            * (2 * t + 1) as f64
            * wigner_3j_unchecked(1, 1, t, k1, k2, -mtp)
            * wigner_3j_unchecked(1, 1, t, q1, q2, -mt);
        sum += big_d_unchecked(t, mtp, mt, euler) * w;
    }
    Ok(sum)
}

/// `Σ_{m1,m2} (-1)^{m2-m1} (l1 l2 2; m1 -m2 1)(l1 l2 J; -m1 m2 -M_J)` by explicit summation.
pub fn projection_sum_explicit(l1: i32, l2: i32, j: i32, mj: i32) -> Result<f64> {
    check_jm(l1, 0)?;
    check_jm(l2, 0)?;
    check_jm(j, mj)?;
    let mut sum = 0.0;
    for m1 in -l1..=l1 {
        for m2 in -l2..=l2 {
            sum += parity_sign(m2 - m1)
                * wigner_3j_unchecked(l1, l2, 2, m1, -m2, 1)
                * wigner_3j_unchecked(l1, l2, j, -m1, m2, -mj);
        }
    }
    Ok(sum)
}

/// Closed form of [`projection_sum_explicit`]:
/// `(-1)^{M_J} (-1)^{l1+l2+J} δ_{J2} δ_{M_J 1} / (2J+1)`, nonzero only when
/// `(l1, l2, 2)` satisfies the triangle rule.
pub fn projection_sum_closed(l1: i32, l2: i32, j: i32, mj: i32) -> Result<f64> {
    check_jm(l1, 0)?;
    check_jm(l2, 0)?;
    check_jm(j, mj)?;
    if j != 2 || mj != 1 || 2 < (l1 - l2).abs() || 2 > l1 + l2 {
        return Ok(0.0);
    }
    Ok(parity_sign(mj) * parity_sign(l1 + l2 + j) / (2 * j + 1) as f64)
}

/// Orientation average of three rotation matrices,
/// `(1/8π²) ∫ D^{j1}_{a1 b1} D^{j2}_{a2 b2} D^{j3}_{a3 b3} = (j1 j2 j3; a1 a2 a3)(j1 j2 j3; b1 b2 b3)`.
pub fn three_rotation_average(j: [i32; 3], left: [i32; 3], right: [i32; 3]) -> Result<f64> {
    for i in 0..3 {
        check_jm(j[i], left[i])?;
        check_jm(j[i], right[i])?;
    }
    Ok(wigner_3j_unchecked(j[0], j[1], j[2], left[0], left[1], left[2])
        * wigner_3j_unchecked(j[0], j[1], j[2], right[0], right[1], right[2]))
}

/// Explicit `Y*_{2,±1}(θ,φ) = ∓ ½ √(15/2π) cosθ sinθ e^{∓iφ}`.
pub fn y2_pm1_conj_explicit(sign: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if sign != 1 && sign != -1 {
        return Err(Error::invalid(format!("sign must be +1 or -1, got {sign}")));
    }
    let s = sign as f64;
    let magnitude = -s * 0.5 * (15.0 / (2.0 * std::f64::consts::PI)).sqrt() * theta.cos() * theta.sin();
    Ok(Complex64::from_polar(1.0, -s * phi) * magnitude)
}
