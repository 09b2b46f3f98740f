//! Angular-momentum algebra in the z-y-z (Varshalovich) convention.
//!
//! Rotation matrices are `D^j_{m'm}(α,β,γ) = e^{-i m' α} d^j_{m'm}(β) e^{-i m γ}`
//! and spherical harmonics carry the Condon–Shortley phase. Only integer
//! angular momenta are supported.

pub mod identities;

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest angular momentum accepted by the checked entry points.
pub const MAX_J: i32 = 20;

const FACTORIAL_LEN: usize = (3 * MAX_J + 2) as usize;

/// Arguments up to this bound use plain factorial products, which stay far
/// from overflow and are more accurate than exponentiated log sums.
const DIRECT_FACTORIAL_MAX: i32 = 30;

struct Factorials {
    value: [f64; FACTORIAL_LEN],
    ln: [f64; FACTORIAL_LEN],
}

fn factorials() -> &'static Factorials {
    static TABLE: OnceLock<Factorials> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut value = [1.0; FACTORIAL_LEN];
        let mut ln = [0.0; FACTORIAL_LEN];
        for n in 1..FACTORIAL_LEN {
            value[n] = value[n - 1] * n as f64;
            ln[n] = value[n].ln();
        }
        Factorials { value, ln }
    })
}

#[inline]
fn lnf(n: i32) -> f64 {
    factorials().ln[n as usize]
}

#[inline]
fn fact(n: i32) -> f64 {
    factorials().value[n as usize]
}

#[inline]
pub(crate) fn parity_sign(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_jm(j: i32, m: i32) -> Result<()> {
    if j < 0 {
        return Err(Error::invalid(format!("negative angular momentum j={j}")));
    }
    if j > MAX_J {
        return Err(Error::invalid(format!("j={j} exceeds supported maximum {MAX_J}")));
    }
    if m.abs() > j {
        return Err(Error::invalid(format!("projection m={m} out of range for j={j}")));
    }
    Ok(())
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Selection-rule violations (triangle, `m1+m2+m3 != 0`) give `0.0`; malformed
/// indices (negative `j`, `|m| > j`) are an error.
pub fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> Result<f64> {
    check_jm(j1, m1)?;
    check_jm(j2, m2)?;
    check_jm(j3, m3)?;
    Ok(wigner_3j_unchecked(j1, j2, j3, m1, m2, m3))
}

/// Racah single-sum evaluation. Callers guarantee `0 <= j <= MAX_J`; any
/// out-of-range projection simply yields zero.
pub(crate) fn wigner_3j_unchecked(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1 == 0 && m2 == 0 && (j1 + j2 + j3) % 2 == 1 {
        return 0.0;
    }

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let den_args = |k: i32| {
        [
            k,
            j3 - j2 + k + m1,
            j3 - j1 + k - m2,
            j1 + j2 - j3 - k,
            j1 - k - m1,
            j2 - k + m2,
        ]
    };
    let num_args = [j1 + m1, j1 - m1, j2 + m2, j2 - m2, j3 + m3, j3 - m3];
    let tri_args = [j1 + j2 - j3, j1 - j2 + j3, -j1 + j2 + j3];

    let mut sum = 0.0;
    if j1 + j2 + j3 < DIRECT_FACTORIAL_MAX {
        let triangle = tri_args.iter().map(|&n| fact(n)).product::<f64>() / fact(j1 + j2 + j3 + 1);
        let pre = (triangle * num_args.iter().map(|&n| fact(n)).product::<f64>()).sqrt();
        for k in k_min..=k_max {
            let den: f64 = den_args(k).iter().map(|&n| fact(n)).product();
            sum += parity_sign(k) / den;
        }
        sum *= pre;
    } else {
        let ln_pre = 0.5
            * (tri_args.iter().map(|&n| lnf(n)).sum::<f64>() - lnf(j1 + j2 + j3 + 1)
                + num_args.iter().map(|&n| lnf(n)).sum::<f64>());
        for k in k_min..=k_max {
            let ln_den: f64 = den_args(k).iter().map(|&n| lnf(n)).sum();
            sum += parity_sign(k) * (ln_pre - ln_den).exp();
        }
    }
    parity_sign(j1 - j2 - m3) * sum
}

/// Reduced rotation matrix element `d^j_{m'm}(β)`.
pub fn wigner_small_d(j: i32, m_prime: i32, m: i32, beta: f64) -> Result<f64> {
    check_jm(j, m_prime)?;
    check_jm(j, m)?;
    Ok(small_d_unchecked(j, m_prime, m, beta))
}

pub(crate) fn small_d_unchecked(j: i32, mp: i32, m: i32, beta: f64) -> f64 {
    let (s, c) = (0.5 * beta).sin_cos();
    let direct = 2 * j <= DIRECT_FACTORIAL_MAX;
    let norm_args = [j + mp, j - mp, j + m, j - m];
    let norm = if direct {
        norm_args.iter().map(|&n| fact(n)).product::<f64>().sqrt()
    } else {
        0.5 * norm_args.iter().map(|&n| lnf(n)).sum::<f64>()
    };
    let s_min = 0.max(m - mp);
    let s_max = (j + m).min(j - mp);
    let mut sum = 0.0;
    for k in s_min..=s_max {
        let den_args = [j + m - k, k, mp - m + k, j - mp - k];
        let weight = if direct {
            norm / den_args.iter().map(|&n| fact(n)).product::<f64>()
        } else {
            (norm - den_args.iter().map(|&n| lnf(n)).sum::<f64>()).exp()
        };
        sum += parity_sign(mp - m + k)
            * weight
            * c.powi(2 * j + m - mp - 2 * k)
            * s.powi(mp - m + 2 * k);
    }
    sum
}

/// Full rotation matrix element `D^j_{m'm}(α,β,γ)`.
pub fn wigner_big_d(j: i32, m_prime: i32, m: i32, euler: &EulerAngles) -> Result<Complex64> {
    check_jm(j, m_prime)?;
    check_jm(j, m)?;
    Ok(big_d_unchecked(j, m_prime, m, euler))
}

pub(crate) fn big_d_unchecked(j: i32, mp: i32, m: i32, euler: &EulerAngles) -> Complex64 {
    let phase = -(mp as f64) * euler.alpha - (m as f64) * euler.gamma;
    Complex64::from_polar(small_d_unchecked(j, mp, m, euler.beta), phase)
}

/// Spherical harmonic `Y_{lm}(θ,φ)` with the Condon–Shortley phase.
///
/// Evaluated through the normalized associated-Legendre recurrence, which
/// is independent of the rotation-matrix code path.
pub fn spherical_harmonic(l: i32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    check_jm(l, m)?;
    Ok(ylm_unchecked(l, m, theta, phi))
}

pub(crate) fn ylm_unchecked(l: i32, m: i32, theta: f64, phi: f64) -> Complex64 {
    let ma = m.abs();
    let (st, ct) = theta.sin_cos();

    // P̄_{|m|}^{|m|}, normalized so that Y = P̄ e^{imφ}
    let mut pmm = (((2 * ma + 1) as f64) / (4.0 * PI)).sqrt();
    for k in 1..=ma {
        pmm *= -(((2 * k - 1) as f64) / ((2 * k) as f64)).sqrt() * st;
    }
    let plm = if l == ma {
        pmm
    } else {
        let mut prev = pmm;
        let mut cur = ((2 * ma + 3) as f64).sqrt() * ct * pmm;
        for ll in (ma + 2)..=l {
            let a = coeff_a(ll, ma);
            let a_prev = coeff_a(ll - 1, ma);
            let next = a * (ct * cur - prev / a_prev);
            prev = cur;
            cur = next;
        }
        cur
    };

    let y = Complex64::from_polar(plm, ma as f64 * phi);
    if m < 0 {
        y.conj() * parity_sign(ma)
    } else {
        y
    }
}

#[inline]
fn coeff_a(l: i32, m: i32) -> f64 {
    let l2 = (l * l) as f64;
    ((4.0 * l2 - 1.0) / (l2 - (m * m) as f64)).sqrt()
}

/// One term `c · Y*_{LM}` of a product expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YlmTerm {
    pub l: i32,
    pub m: i32,
    pub coefficient: f64,
}

/// Expands `Y_{l1 m1}(p̂) Y*_{l2 m2}(p̂) = Σ c_{LM} Y*_{LM}(p̂)`.
///
/// Zero coefficients are omitted; `M = m2 - m1` for every term.
pub fn ylm_product_expand(l1: i32, m1: i32, l2: i32, m2: i32) -> Result<Vec<YlmTerm>> {
    check_jm(l1, m1)?;
    check_jm(l2, m2)?;
    let big_m = m2 - m1;
    let mut terms = Vec::new();
    for big_l in (l1 - l2).abs()..=(l1 + l2) {
        if big_m.abs() > big_l {
            continue;
        }
        let c = parity_sign(m2)
            * (((2 * l1 + 1) * (2 * l2 + 1) * (2 * big_l + 1)) as f64 / (4.0 * PI)).sqrt()
            * wigner_3j_unchecked(l1, l2, big_l, 0, 0, 0)
            * wigner_3j_unchecked(l1, l2, big_l, m1, -m2, big_m);
        if c != 0.0 {
            terms.push(YlmTerm {
                l: big_l,
                m: big_m,
                coefficient: c,
            });
        }
    }
    Ok(terms)
}

/// z-y-z Euler angles of the molecular frame relative to the laboratory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

pub type Matrix3 = [[f64; 3]; 3];

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(0.0..TAU).contains(&alpha) || !(0.0..TAU).contains(&gamma) {
            return Err(Error::invalid(format!(
                "alpha={alpha}, gamma={gamma} must lie in [0, 2pi)"
            )));
        }
        if !(0.0..=PI).contains(&beta) {
            return Err(Error::invalid(format!("beta={beta} must lie in [0, pi]")));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Wraps `alpha` and `gamma` into `[0, 2π)`; `beta` must already be in `[0, π]`.
    pub fn wrapped(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(wrap_angle(alpha), beta, wrap_angle(gamma))
    }

    pub const fn identity() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    /// Active rotation `R = R_z(α) R_y(β) R_z(γ)`.
    pub fn rotation_matrix(&self) -> Matrix3 {
        let rz = |a: f64| {
            let (s, c) = a.sin_cos();
            [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
        };
        let (s, c) = self.beta.sin_cos();
        let ry = [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]];
        mat_mul(&mat_mul(&rz(self.alpha), &ry), &rz(self.gamma))
    }

    pub fn from_rotation_matrix(r: &Matrix3) -> Self {
        let beta = r[2][2].clamp(-1.0, 1.0).acos();
        let sb = beta.sin();
        let (alpha, gamma) = if sb > 1e-12 {
            (r[1][2].atan2(r[0][2]), r[2][1].atan2(-r[2][0]))
        } else if r[2][2] > 0.0 {
            (r[1][0].atan2(r[0][0]), 0.0)
        } else {
            ((-r[1][0]).atan2(r[1][1]), 0.0)
        };
        Self {
            alpha: wrap_angle(alpha),
            beta,
            gamma: wrap_angle(gamma),
        }
    }

    /// Rotation `self ∘ other`.
    pub fn compose(&self, other: &EulerAngles) -> Self {
        Self::from_rotation_matrix(&mat_mul(&self.rotation_matrix(), &other.rotation_matrix()))
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_vec(a: &Matrix3, v: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2])
}

/// All `D^j` matrices for `0 <= j <= jmax` at one orientation.
#[derive(Debug, Clone)]
pub struct RotationMatrices {
    jmax: i32,
    data: Vec<Complex64>,
}

impl RotationMatrices {
    pub fn new(jmax: i32, euler: &EulerAngles) -> Result<Self> {
        check_jm(jmax, 0)?;
        Ok(Self::build(jmax, euler))
    }

    pub(crate) fn build(jmax: i32, euler: &EulerAngles) -> Self {
        let mut data = Vec::with_capacity(Self::offset(jmax + 1));
        for j in 0..=jmax {
            for mp in -j..=j {
                for m in -j..=j {
                    data.push(big_d_unchecked(j, mp, m, euler));
                }
            }
        }
        Self { jmax, data }
    }

    fn offset(j: i32) -> usize {
        // Σ_{j'<j} (2j'+1)^2
        let j = j as usize;
        (4 * j * j * j - j) / 3
    }

    pub fn jmax(&self) -> i32 {
        self.jmax
    }

    #[inline]
    pub fn get(&self, j: i32, mp: i32, m: i32) -> Complex64 {
        let dim = (2 * j + 1) as usize;
        self.data[Self::offset(j) + (mp + j) as usize * dim + (m + j) as usize]
    }
}
