use std::f64::consts::{PI, TAU};
use std::fs;
use std::path::PathBuf;

use fbud_core::amplitudes::{achiralize, enantiomer, load_amplitudes, random_amplitudes, AmplitudeSet};
use fbud_core::analytic::{analytic_a, b21_of_phi, bracket_constant, fbud_prefactor, fbud_value, pair_contribution};
use fbud_core::angular::identities::{
    conj_pair_series, photon_pair_series, projection_sum_closed, projection_sum_explicit, three_rotation_average,
};
use fbud_core::angular::{wigner_big_d, EulerAngles};
use fbud_core::averaging::{
    coefficient_from_two_phases, fit_phase_law, orientation_averaged_blm, with_worker_threads, So3Grid,
};
use fbud_core::dynamics::field_trajectory;
use fbud_core::table::write_csv;
use fbud_core::{AsymmetryCoefficient, BlmExpansion, EmissionDirection, FieldConfig, PhaseFit, QuadratureSpec};
use serde::Serialize;

use crate::config::{AmplitudeSource, RunConfig};
use crate::CliError;

/// A validated configuration with its amplitudes loaded.
pub struct Session {
    pub config: RunConfig,
    pub amps: AmplitudeSet,
    pub quad: QuadratureSpec,
}

impl Session {
    /// Loads amplitudes and rejects under-resolved quadratures before any
    /// expensive work starts.
    pub fn prepare(config: RunConfig) -> Result<Self, CliError> {
        config.field.validate()?;
        let amps = match &config.amplitudes {
            AmplitudeSource::Random { seed, lmax } => random_amplitudes(*seed, *lmax)?,
            AmplitudeSource::File(path) => load_amplitudes(path)?,
        };
        let quad = config.quadrature.unwrap_or_else(|| QuadratureSpec::for_lmax(amps.lmax()));
        quad.validate(amps.lmax())?;
        Ok(Self { config, amps, quad })
    }

    fn output(&self, name: &str) -> Result<PathBuf, CliError> {
        let dir = &self.config.output_dir;
        fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.clone(),
            source: e,
        })?;
        Ok(dir.join(name))
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
        let path = self.output(name)?;
        let text = serde_json::to_string_pretty(value).expect("report serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        Ok(path)
    }

    fn blm_at(&self, phi: f64) -> Result<BlmExpansion, CliError> {
        Ok(orientation_averaged_blm(&self.amps, &self.config.field.with_phase(phi), &self.quad)?)
    }

    fn analytic(&self) -> AsymmetryCoefficient {
        analytic_a(&self.amps, self.config.field.ex_amplitude, self.config.field.ey_amplitude)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseScanSummary {
    pub fit: PhaseFit,
    pub analytic_amplitude: f64,
    pub analytic_internal_phase: Option<f64>,
    pub samples: usize,
    pub csv: PathBuf,
}

pub const PHASE_SCAN_HEADER: [&str; 8] = [
    "phi",
    "Re(B21)",
    "Im(B21)",
    "A_fit",
    "delta_fit",
    "residual",
    "Im(B21)_analytic",
    "FBUD_amp",
];

/// `B_{2,+1}(φ)` by quadrature at every scan phase, the fitted `(A, δ)` and
/// the closed-form prediction. `FBUD_amp` is `√(30/π) A sin(2φ-δ)` from the
/// numeric `Im B_{2,+1}`.
pub fn cmd_phase_scan(session: &Session) -> Result<PhaseScanSummary, CliError> {
    let phis = &session.config.phi_scan;
    let mut b21 = Vec::with_capacity(phis.len());
    let mut scale = 0.0_f64;
    for &phi in phis {
        let blm = session.blm_at(phi)?;
        scale = scale.max(blm.get(0, 0).norm());
        b21.push(blm.get(2, 1));
    }
    let im: Vec<f64> = b21.iter().map(|b| b.im).collect();
    let fit = fit_phase_law(phis, &im, scale)?;
    let analytic = session.analytic();
    let rows: Vec<Vec<f64>> = phis
        .iter()
        .zip(&b21)
        .map(|(&phi, b)| {
            vec![
                phi,
                b.re,
                b.im,
                fit.amplitude,
                fit.internal_phase.unwrap_or(f64::NAN),
                fit.residual,
                b21_of_phi(&analytic, phi).im,
                -0.5 * b.im * fbud_prefactor(),
            ]
        })
        .collect();
    let csv = session.output("phase_scan.csv")?;
    write_csv(&csv, &PHASE_SCAN_HEADER, &rows)?;
    let summary = PhaseScanSummary {
        fit,
        analytic_amplitude: analytic.magnitude(),
        analytic_internal_phase: analytic.internal_phase(),
        samples: phis.len(),
        csv,
    };
    session.write_json("phase_fit.json", &summary)?;
    Ok(summary)
}

/// `B_LM` table at the configured phase.
pub fn cmd_blm(session: &Session) -> Result<PathBuf, CliError> {
    let blm = session.blm_at(session.config.field.relative_phase)?;
    let path = session.output("blm.csv")?;
    blm.write_csv(&path)?;
    Ok(path)
}

pub const MAP_HEADER: [&str; 5] = ["theta_p", "phi_p", "dcs", "fbud", "fbud_analytic"];

/// Full distribution and FBUD part on a `(θ_p, φ_p)` grid.
pub fn cmd_map(session: &Session) -> Result<PathBuf, CliError> {
    let grid = session.config.map;
    if grid.n_theta < 2 || grid.n_phi < 2 {
        return Err(CliError::Config(format!(
            "map grid needs n_theta >= 2 and n_phi >= 2, got {} x {}",
            grid.n_theta, grid.n_phi
        )));
    }
    let phi = session.config.field.relative_phase;
    let blm = session.blm_at(phi)?;
    let analytic = session.analytic();
    let mut rows = Vec::with_capacity(grid.n_theta * grid.n_phi);
    for i in 0..grid.n_theta {
        let theta_p = PI * i as f64 / (grid.n_theta - 1) as f64;
        for j in 0..grid.n_phi {
            let dir = EmissionDirection::new(theta_p, TAU * j as f64 / grid.n_phi as f64)?;
            rows.push(vec![
                dir.theta_p,
                dir.phi_p,
                blm.evaluate(&dir),
                blm.fbud_part(&dir),
                fbud_value(&analytic, phi, &dir),
            ]);
        }
    }
    let path = session.output("map.csv")?;
    write_csv(&path, &MAP_HEADER, &rows)?;
    Ok(path)
}

/// Field trajectory over one fundamental period.
pub fn cmd_field(session: &Session) -> Result<PathBuf, CliError> {
    let samples = field_trajectory(&session.config.field, session.config.trajectory_samples)?;
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| vec![s.t, s.ex, s.ey]).collect();
    let path = session.output("field.csv")?;
    write_csv(&path, &["t", "Ex", "Ey"], &rows)?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub amplitudes: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, measured: f64, tolerance: f64) {
        self.0.push(Check {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
        });
    }
}

/// Deterministic, well-spread rotations (additive recurrence on three
/// irrational steps).
fn spread_rotations(n: usize) -> Vec<EulerAngles> {
    let frac = |x: f64| x - x.floor();
    (1..=n)
        .map(|i| {
            let i = i as f64;
            EulerAngles {
                alpha: TAU * frac(i * 0.618_033_988_749_894_9),
                beta: (2.0 * frac(i * 0.754_877_666_246_692_7) - 1.0).acos(),
                gamma: TAU * frac(i * 0.569_840_290_998_053_3),
            }
        })
        .collect()
}

fn relative(diff: f64, reference: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / reference
    }
}

fn identity_checks(checks: &mut Checks) {
    let rotations = spread_rotations(20);
    let mut pair: f64 = 0.0;
    let mut photon: f64 = 0.0;
    for r in &rotations {
        for l1 in 0..=2 {
            for l2 in 0..=2 {
                for m1p in -l1..=l1 {
                    for m1 in -l1..=l1 {
                        for m2p in -l2..=l2 {
                            for m2 in -l2..=l2 {
                                let lhs = wigner_big_d(l1, m1p, m1, r).unwrap().conj()
                                    * wigner_big_d(l2, m2p, m2, r).unwrap();
                                let rhs = conj_pair_series(l1, m1p, m1, l2, m2p, m2, r).unwrap();
                                pair = pair.max((lhs - rhs).norm());
                            }
                        }
                    }
                }
            }
        }
        for k1 in -1..=1 {
            for k2 in -1..=1 {
                for q1 in -1..=1 {
                    for q2 in -1..=1 {
                        let lhs = wigner_big_d(1, k1, q1, r).unwrap() * wigner_big_d(1, k2, q2, r).unwrap();
                        photon = photon.max((lhs - photon_pair_series(k1, k2, q1, q2, r).unwrap()).norm());
                    }
                }
            }
        }
    }
    checks.add("identity_conjugate_pair_series", pair, 1e-12);
    checks.add("identity_photon_pair_series", photon, 1e-12);

    let mut projection: f64 = 0.0;
    for l1 in 0..=4 {
        for l2 in 0..=4 {
            for j in 0..=6 {
                for mj in -j..=j {
                    let d = projection_sum_explicit(l1, l2, j, mj).unwrap() - projection_sum_closed(l1, l2, j, mj).unwrap();
                    projection = projection.max(d.abs());
                }
            }
        }
    }
    checks.add("identity_projection_sum", projection, 1e-13);

    let grid = So3Grid::new(8, 6, 8).expect("fixed grid");
    let mut average: f64 = 0.0;
    for t in 0..=2 {
        for mjp in -2..=2 {
            for kpp in -1..=1 {
                for mtp in -t..=t {
                    for mt in -t..=t {
                        for q in [-1, 1] {
                            let left = [mjp, -kpp, mtp];
                            let right = [1, -q, mt];
                            let numeric = grid.average(|r| {
                                wigner_big_d(2, left[0], right[0], r).unwrap()
                                    * wigner_big_d(1, left[1], right[1], r).unwrap()
                                    * wigner_big_d(t, left[2], right[2], r).unwrap()
                            });
                            let closed = three_rotation_average([2, 1, t], left, right).unwrap();
                            average = average.max((numeric - closed).norm());
                        }
                    }
                }
            }
        }
    }
    checks.add("identity_three_rotation_average", average, 1e-10);
}

/// Relative deviation of the closed form from the two-phase quadrature
/// reconstruction at `φ ∈ {0, π/8}`.
fn oracle_deviation(amps: &AmplitudeSet, session_field: &FieldConfig, quad: &QuadratureSpec) -> Result<f64, CliError> {
    let (pa, pb) = (0.0, PI / 8.0);
    let blm_a = orientation_averaged_blm(amps, &session_field.with_phase(pa), quad)?;
    let blm_b = orientation_averaged_blm(amps, &session_field.with_phase(pb), quad)?;
    let numeric = coefficient_from_two_phases(pa, blm_a.get(2, 1), pb, blm_b.get(2, 1))?;
    let closed = analytic_a(amps, session_field.ex_amplitude, session_field.ey_amplitude).value();
    let floor = 1e-10 * blm_a.get(0, 0).norm();
    Ok(relative((numeric - closed).norm(), closed.norm().max(floor)))
}

/// Runs the invariant suite on built-in random sets and on the configured
/// amplitudes.
pub fn cmd_verify(session: &Session) -> Result<VerifyReport, CliError> {
    let mut checks = Checks(Vec::new());
    let field = session.config.field;

    checks.add("bracket_constant", (bracket_constant() - 2.0 / (5.0 * 3f64.sqrt())).abs(), 1e-12);
    identity_checks(&mut checks);

    let unit = FieldConfig::default();
    let mut worst: f64 = 0.0;
    for &seed in &session.config.verify.seeds {
        for &lmax in &session.config.verify.lmax {
            let amps = random_amplitudes(seed, lmax)?;
            worst = worst.max(oracle_deviation(&amps, &unit, &QuadratureSpec::for_lmax(lmax))?);
        }
    }
    checks.add("oracle_equivalence_random_sets", worst, 1e-6);

    let amps = &session.amps;
    let quad = &session.quad;
    checks.add("oracle_equivalence_input", oracle_deviation(amps, &field, quad)?, 1e-6);

    let d_max = amps.one_photon.entries().fold(0.0_f64, |a, e| a.max(e.3.norm()));
    let t_max = amps.two_photon.entries().fold(0.0_f64, |a, e| a.max(e.4.norm()));
    let reference = (field.ex_amplitude * field.ey_amplitude.powi(2) * d_max * t_max).max(f64::MIN_POSITIVE);
    let sym = achiralize(amps);
    checks.add(
        "achiral_analytic",
        relative(analytic_a(&sym, field.ex_amplitude, field.ey_amplitude).magnitude(), reference),
        1e-12,
    );
    let mut achiral_numeric: f64 = 0.0;
    for phi in [0.0, PI / 8.0, PI / 4.0] {
        let b = orientation_averaged_blm(&sym, &field.with_phase(phi), quad)?;
        achiral_numeric = achiral_numeric.max(relative(b.get(2, 1).norm(), b.get(0, 0).norm()));
    }
    checks.add("achiral_quadrature_b21", achiral_numeric, 1e-10);

    let a = session.analytic().value();
    let mirrored = analytic_a(&enantiomer(amps), field.ex_amplitude, field.ey_amplitude).value();
    checks.add("enantiomer_sign_flip", relative((a + mirrored).norm(), a.norm().max(reference)), 1e-12);

    let mut odd: f64 = 0.0;
    for l1 in 0..=amps.lmax() {
        for l2 in 0..=amps.lmax() {
            if (l1 + l2) % 2 == 1 {
                odd = odd.max(pair_contribution(amps, l1, l2).norm());
            }
        }
    }
    checks.add("odd_parity_pairs_zero", odd, 0.0);

    let one_colour = orientation_averaged_blm(amps, &FieldConfig { ey_amplitude: 0.0, ..field }, quad)?;
    let high_l = one_colour
        .iter()
        .filter(|(l, _, _)| *l >= 3)
        .map(|(_, _, b)| b.norm())
        .fold(0.0, f64::max);
    checks.add("single_colour_no_l3_l4", relative(high_l, one_colour.get(0, 0).norm()), 1e-10);

    let runs: Vec<BlmExpansion> = [0.0, 0.4, 1.3].iter().map(|&p| session.blm_at(p)).collect::<Result<_, _>>()?;
    let scale = runs[0].get(0, 0).norm();
    let mut b4: f64 = 0.0;
    let mut herm: f64 = 0.0;
    let mut re21: f64 = 0.0;
    for r in &runs {
        for m in -4..=4 {
            b4 = b4.max((r.get(4, m) - runs[0].get(4, m)).norm());
        }
        herm = herm.max(r.hermiticity_defect());
        re21 = re21.max(r.get(2, 1).re.abs());
    }
    checks.add("b4m_phase_independent", relative(b4, scale), 1e-10);
    checks.add("blm_hermiticity", relative(herm, scale), 1e-10);
    checks.add("re_b21_zero", relative(re21, scale), 1e-10);

    let base = session.blm_at(field.relative_phase)?;
    let fine = orientation_averaged_blm(amps, &field, &quad.doubled())?;
    let change = base
        .iter()
        .zip(fine.iter())
        .map(|((_, _, x), (_, _, y))| (x - y).norm())
        .fold(0.0, f64::max);
    checks.add("quadrature_doubling", relative(change, base.get(0, 0).norm()), 1e-12);

    let bits = |b: &BlmExpansion| -> Vec<(u64, u64)> { b.iter().map(|(_, _, z)| (z.re.to_bits(), z.im.to_bits())).collect() };
    let single = with_worker_threads(1, || orientation_averaged_blm(amps, &field, quad))??;
    let triple = with_worker_threads(3, || orientation_averaged_blm(amps, &field, quad))??;
    let mismatched = bits(&single).iter().zip(bits(&triple).iter()).filter(|(x, y)| x != y).count();
    checks.add("thread_count_independence", mismatched as f64, 0.0);

    let passed = checks.0.iter().all(|c| c.passed);
    let report = VerifyReport {
        amplitudes: amps.label.clone(),
        passed,
        checks: checks.0,
    };
    session.write_json("verify.json", &report)?;
    Ok(report)
}
