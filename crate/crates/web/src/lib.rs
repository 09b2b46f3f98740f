//! WebAssembly bindings behind the static page in `www/`.
//!
//! A [`Molecule`] runs the orientation quadrature once, splitting `B_LM`
//! into its φ-independent pieces, so maps and phase scans redraw instantly
//! while the phase slider moves.

use std::f64::consts::{PI, TAU};

use fbud_core::amplitudes::{enantiomer, random_amplitudes, AmplitudeSet};
use fbud_core::analytic::{analytic_a, b21_of_phi, fbud_value, AsymmetryCoefficient};
use fbud_core::averaging::{phase_resolved_blm, PhaseResolvedBlm};
use fbud_core::dynamics::field_trajectory as trajectory;
use fbud_core::{EmissionDirection, FieldConfig, QuadratureSpec};
use wasm_bindgen::prelude::*;

fn js(e: fbud_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Flat `[t, Ex, Ey, t, Ex, Ey, ...]` over one period of the fundamental.
pub fn trajectory_points(ex: f64, ey: f64, phi: f64, samples: usize) -> fbud_core::Result<Vec<f64>> {
    let field = FieldConfig::new(ex, ey, phi, 1.0)?;
    Ok(trajectory(&field, samples)?
        .iter()
        .flat_map(|s| [s.t, s.ex, s.ey])
        .collect())
}

#[wasm_bindgen(js_name = fieldTrajectory)]
pub fn field_trajectory(ex: f64, ey: f64, phi: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    trajectory_points(ex, ey, phi, samples).map_err(js)
}

#[wasm_bindgen]
pub struct Molecule {
    amps: AmplitudeSet,
    field: FieldConfig,
    resolved: PhaseResolvedBlm,
    coeff: AsymmetryCoefficient,
}

impl Molecule {
    pub fn build(seed: u32, lmax: i32, ex: f64, ey: f64) -> fbud_core::Result<Self> {
        Self::from_amplitudes(random_amplitudes(seed as u64, lmax)?, FieldConfig::new(ex, ey, 0.0, 1.0)?)
    }

    fn from_amplitudes(amps: AmplitudeSet, field: FieldConfig) -> fbud_core::Result<Self> {
        let quad = QuadratureSpec::minimal(amps.lmax());
        let resolved = phase_resolved_blm(&amps, &field, &quad)?;
        let coeff = analytic_a(&amps, field.ex_amplitude, field.ey_amplitude);
        Ok(Self {
            amps,
            field,
            resolved,
            coeff,
        })
    }
}

#[wasm_bindgen]
impl Molecule {
    /// Random chiral model with `lmax` partial waves in field amplitudes `ex`, `ey`.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, lmax: i32, ex: f64, ey: f64) -> Result<Molecule, JsError> {
        Self::build(seed, lmax, ex, ey).map_err(js)
    }

    /// The mirror-image molecule.
    pub fn mirror(&self) -> Result<Molecule, JsError> {
        Self::from_amplitudes(enantiomer(&self.amps), self.field).map_err(js)
    }

    /// `A = |𝒜|` from the closed form.
    pub fn amplitude(&self) -> f64 {
        self.coeff.magnitude()
    }

    /// `δ = arg 𝒜`, NaN when `𝒜` vanishes.
    #[wasm_bindgen(js_name = internalPhase)]
    pub fn internal_phase(&self) -> f64 {
        self.coeff.internal_phase().unwrap_or(f64::NAN)
    }

    /// Row-major `n_theta × n_phi` grid of `(dσ/dΩ, FBUD)` pairs at phase `phi`,
    /// `θ_p` from 0 to π inclusive and `φ_p = 2πj/n_phi`.
    #[wasm_bindgen(js_name = fbudMap)]
    pub fn fbud_map(&self, phi: f64, n_theta: usize, n_phi: usize) -> Vec<f64> {
        let blm = self.resolved.at_phase(phi);
        let mut out = Vec::with_capacity(2 * n_theta * n_phi);
        for i in 0..n_theta {
            let theta_p = PI * i as f64 / (n_theta.max(2) - 1) as f64;
            for j in 0..n_phi {
                let dir = EmissionDirection {
                    theta_p,
                    phi_p: TAU * j as f64 / n_phi as f64,
                };
                out.push(blm.evaluate(&dir));
                out.push(blm.fbud_part(&dir));
            }
        }
        out
    }

    /// `[φ, Im B21 (quadrature), Im B21 (closed form), ...]` for `n` phases
    /// covering `[-π/2, π/2]`.
    #[wasm_bindgen(js_name = phaseScan)]
    pub fn phase_scan(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        (0..n)
            .flat_map(|i| {
                let phi = -0.5 * PI + PI * i as f64 / (n - 1) as f64;
                let numeric = self.resolved.at_phase(phi).get(2, 1).im;
                [phi, numeric, b21_of_phi(&self.coeff, phi).im]
            })
            .collect()
    }

    /// Closed-form FBUD value at one direction, for cross-checking the map.
    #[wasm_bindgen(js_name = fbudAt)]
    pub fn fbud_at(&self, phi: f64, theta_p: f64, phi_p: f64) -> f64 {
        fbud_value(&self.coeff, phi, &EmissionDirection { theta_p, phi_p })
    }
}
