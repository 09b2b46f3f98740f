//! Test-only oracles that share no code path with the library routines
//! they check.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use fbud_core::amplitudes::AmplitudeSet;
use fbud_core::angular::{spherical_harmonic, wigner_big_d, EulerAngles};
use fbud_core::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn raise(j: i32, m: i32) -> f64 {
    ((j * (j + 1) - m * (m + 1)) as f64).sqrt()
}

fn lower(j: i32, m: i32) -> f64 {
    ((j * (j + 1) - m * (m - 1)) as f64).sqrt()
}

/// Coupled state `|j1 j2; J M⟩` in the product basis, keyed by `m1`, built
/// from the highest-weight state (fixed by `J+ |J J⟩ = 0` and the
/// Condon–Shortley choice `⟨j1 j1, j2 J-j1 | J J⟩ > 0`) and repeated lowering.
fn coupled_state(j1: i32, j2: i32, big_j: i32, big_m: i32) -> BTreeMap<i32, f64> {
    let lo = (-j1).max(big_j - j2);
    let hi = j1.min(big_j + j2);
    let mut state = BTreeMap::new();
    let mut c = 1.0;
    state.insert(lo, c);
    for m1 in lo..hi {
        c = -c * raise(j1, m1) / raise(j2, big_j - m1 - 1);
        state.insert(m1 + 1, c);
    }
    let norm: f64 = state.values().map(|v| v * v).sum::<f64>().sqrt();
    let sign = if state[&j1] > 0.0 { 1.0 } else { -1.0 };
    state.values_mut().for_each(|v| *v *= sign / norm);

    let mut m = big_j;
    while m > big_m {
        let mut next = BTreeMap::new();
        for m1 in (-j1)..=j1 {
            let m2 = m - 1 - m1;
            if m2.abs() > j2 {
                continue;
            }
            let mut v = 0.0;
            if let Some(c) = state.get(&(m1 + 1)) {
                v += lower(j1, m1 + 1) * c;
            }
            if m2 < j2 {
                if let Some(c) = state.get(&m1) {
                    v += lower(j2, m2 + 1) * c;
                }
            }
            next.insert(m1, v / lower(big_j, m));
        }
        state = next;
        m -= 1;
    }
    state
}

/// 3j symbol via Clebsch–Gordan coefficients of explicitly built states.
pub fn oracle_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    let state = coupled_state(j1, j2, j3, -m3);
    let cg = state.get(&m1).copied().unwrap_or(0.0);
    let sign = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * cg / ((2 * j3 + 1) as f64).sqrt()
}

/// Direct transcription of the total amplitude: partial waves carry
/// `(-i)^l D^{l*}_{m'm} Y_{lm}`, the 2ω photon enters as
/// `E_x/(2√2) (-D^1_{k',+1} + D^1_{k',-1})`, the ω pair as
/// `-e^{-2iφ} E_y²/8` times the four-term helicity sum.
#[allow(clippy::too_many_arguments)]
pub fn literal_total_amplitude(
    amps: &AmplitudeSet,
    ex: f64,
    ey: f64,
    phi: f64,
    euler: &EulerAngles,
    theta_p: f64,
    phi_p: f64,
) -> Complex64 {
    let d1 = |k: i32, q: i32| wigner_big_d(1, k, q, euler).unwrap();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut total = Complex64::new(0.0, 0.0);
    for l1 in 0..=amps.lmax() {
        for m1p in -l1..=l1 {
            let mut one = Complex64::new(0.0, 0.0);
            for k in -1..=1 {
                one += (-d1(k, 1) + d1(k, -1)) * amps.one_photon.get(l1, m1p, k);
            }
            one *= ex / (2.0 * 2f64.sqrt());
            let mut two = Complex64::new(0.0, 0.0);
            for k1 in -1..=1 {
                for k2 in -1..=1 {
                    let h = d1(k1, 1) * d1(k2, 1)
                        + d1(k1, 1) * d1(k2, -1)
                        + d1(k1, -1) * d1(k2, 1)
                        + d1(k1, -1) * d1(k2, -1);
                    two += h * amps.two_photon.get(l1, m1p, k1, k2);
                }
            }
            two *= -Complex64::from_polar(1.0, -2.0 * phi) * (ey * ey / 8.0);
            for m1 in -l1..=l1 {
                let wave = minus_i.powi(l1)
                    * wigner_big_d(l1, m1p, m1, euler).unwrap().conj()
                    * spherical_harmonic(l1, m1, theta_p, phi_p).unwrap();
                total += wave * (one + two);
            }
        }
    }
    total
}

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Haar-distributed rotation.
    pub fn euler(&mut self) -> EulerAngles {
        let alpha = self.range(0.0, TAU);
        let beta = self.range(-1.0, 1.0).acos();
        let gamma = self.range(0.0, TAU);
        EulerAngles::new(alpha, beta, gamma).unwrap()
    }

    /// Uniform direction `(θ, φ)`.
    pub fn direction(&mut self) -> (f64, f64) {
        (self.range(-1.0, 1.0).acos(), self.range(0.0, TAU))
    }
}

pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

pub const QUARTER: f64 = PI / 4.0;
