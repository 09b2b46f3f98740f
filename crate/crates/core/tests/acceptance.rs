//! Acceptance suite. Runs as a plain binary so each criterion prints one
//! PASS/FAIL line; exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::TestRng;
use fbud_core::amplitudes::{achiralize, enantiomer, random_amplitudes, AmplitudeSet};
use fbud_core::analytic::{analytic_a, bracket_constant, pair_contribution};
use fbud_core::angular::identities::{
    conj_pair_series, photon_pair_series, projection_sum_closed, projection_sum_explicit, three_rotation_average,
};
use fbud_core::angular::{spherical_harmonic, wigner_big_d, ylm_product_expand};
use fbud_core::averaging::{
    coefficient_from_two_phases, fit_phase_law, orientation_averaged_blm, with_worker_threads, So3Grid,
};
use fbud_core::{BlmExpansion, Complex64, FieldConfig, QuadratureSpec};

struct Suite {
    failures: usize,
}

impl Suite {
    fn report(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        println!("{} [{id}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn unit_field(phi: f64) -> FieldConfig {
    FieldConfig::new(1.0, 1.0, phi, 1.0).unwrap()
}

fn blm(amps: &AmplitudeSet, field: &FieldConfig) -> BlmExpansion {
    orientation_averaged_blm(amps, field, &QuadratureSpec::for_lmax(amps.lmax())).unwrap()
}

/// Largest `|a - b|` over all coefficients.
fn blm_distance(a: &BlmExpansion, b: &BlmExpansion) -> f64 {
    a.iter().zip(b.iter()).map(|((_, _, x), (_, _, y))| (x - y).norm()).fold(0.0, f64::max)
}

fn bracket(suite: &mut Suite) {
    let want = 2.0 / (5.0 * 3f64.sqrt());
    let err = (bracket_constant() - want).abs();
    suite.report(
        1,
        "bracket constant 2/(5√3)",
        err <= 1e-12,
        format!("value {:.13}, |error| {err:.1e} (tol 1e-12)", bracket_constant()),
    );
}

fn oracle_equivalence(suite: &mut Suite) {
    let start = Instant::now();
    let (phi_a, phi_b) = (0.0, PI / 8.0);
    let mut worst: f64 = 0.0;
    for seed in 1..=5 {
        for lmax in 1..=3 {
            let amps = random_amplitudes(seed, lmax).unwrap();
            let ba = blm(&amps, &unit_field(phi_a)).get(2, 1);
            let bb = blm(&amps, &unit_field(phi_b)).get(2, 1);
            let numeric = coefficient_from_two_phases(phi_a, ba, phi_b, bb).unwrap();
            let analytic = analytic_a(&amps, 1.0, 1.0).value();
            worst = worst.max((numeric - analytic).norm() / analytic.norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    suite.report(
        2,
        "analytic 𝒜 vs two-phase quadrature reconstruction (seeds 1-5, lmax 1-3)",
        worst <= 1e-6 && secs < 300.0,
        format!("max relative error {worst:.1e} (tol 1e-6), {secs:.1} s (budget 300 s)"),
    );
}

fn phase_law(suite: &mut Suite) {
    let amps = random_amplitudes(3, 3).unwrap();
    let phis: Vec<f64> = (0..16).map(|i| -0.5 * PI + PI * i as f64 / 16.0).collect();
    let samples: Vec<BlmExpansion> = phis.iter().map(|&p| blm(&amps, &unit_field(p))).collect();
    let im: Vec<f64> = samples.iter().map(|b| b.get(2, 1).im).collect();
    let fit = fit_phase_law(&phis, &im, samples[0].get(0, 0).norm()).unwrap();
    let expected = analytic_a(&amps, 1.0, 1.0);
    let rel_residual = fit.residual / fit.amplitude;
    let amp_err = (fit.amplitude - expected.magnitude()).abs() / expected.magnitude();
    let delta_err = (fit.internal_phase.unwrap() - expected.internal_phase().unwrap()).abs();
    suite.report(
        3,
        "Im B_21(φ) over 16 phases fits -2A sin(2φ-δ)",
        rel_residual <= 1e-8 && amp_err <= 1e-6 && delta_err <= 1e-6,
        format!(
            "residual/A {rel_residual:.1e} (tol 1e-8), A {:.6} vs {:.6}, δ {:.6} vs {:.6}",
            fit.amplitude,
            expected.magnitude(),
            fit.internal_phase.unwrap(),
            expected.internal_phase().unwrap()
        ),
    );

    // Rotate the two-photon amplitudes so that δ = 0.
    let aligned = amps.with_two_photon_phase(-expected.internal_phase().unwrap());
    let aligned_a = analytic_a(&aligned, 1.0, 1.0);
    let im: Vec<f64> = phis.iter().map(|&p| blm(&aligned, &unit_field(p)).get(2, 1).im).collect();
    let b00 = blm(&aligned, &unit_field(0.0)).get(0, 0).norm();
    let at = |phi: f64| im[phis.iter().position(|&p| (p - phi).abs() < 1e-12).unwrap()];
    let argmax = phis[(0..16).max_by(|&i, &j| im[i].total_cmp(&im[j])).unwrap()];
    let argmin = phis[(0..16).min_by(|&i, &j| im[i].total_cmp(&im[j])).unwrap()];
    let peak_err = (at(PI / 4.0) + 2.0 * aligned_a.magnitude()).abs().max((at(-PI / 4.0) - 2.0 * aligned_a.magnitude()).abs());
    let zero = at(0.0).abs().max(at(-0.5 * PI).abs());
    let ok = aligned_a.internal_phase().unwrap().abs() < 1e-12
        && (argmin - PI / 4.0).abs() < 1e-12
        && (argmax + PI / 4.0).abs() < 1e-12
        && peak_err <= 1e-10 * b00
        && zero <= 1e-10 * b00;
    suite.report(
        3,
        "δ = 0 landmarks: extrema at φ = ±π/4, zeros at φ = 0, ±π/2",
        ok,
        format!(
            "min at {argmin:.4}, max at {argmax:.4}, |peak - 2A| {peak_err:.1e}, |zeros| {zero:.1e} (tol 1e-10·|B00| = {:.1e})",
            1e-10 * b00
        ),
    );
}

fn chirality(suite: &mut Suite) {
    let mut worst_analytic: f64 = 0.0;
    let mut worst_numeric: f64 = 0.0;
    let mut worst_flip: f64 = 0.0;
    for seed in 1..=5 {
        let amps = random_amplitudes(seed, 3).unwrap();
        let sym = achiralize(&amps);
        worst_analytic = worst_analytic.max(analytic_a(&sym, 1.0, 1.0).magnitude());
        for phi in [0.0, PI / 8.0, PI / 4.0] {
            let b = blm(&sym, &unit_field(phi));
            worst_numeric = worst_numeric.max(b.get(2, 1).norm() / b.get(0, 0).norm());
        }
        let a = analytic_a(&amps, 1.0, 1.0).value();
        let mirrored = analytic_a(&enantiomer(&amps), 1.0, 1.0).value();
        worst_flip = worst_flip.max((a + mirrored).norm() / a.norm());
    }
    suite.report(
        4,
        "achiral sets: analytic |𝒜| and quadrature |B_21|",
        worst_analytic <= 1e-12 && worst_numeric <= 1e-10,
        format!("max |𝒜| {worst_analytic:.1e} (tol 1e-12), max |B21|/|B00| {worst_numeric:.1e} (tol 1e-10)"),
    );
    suite.report(
        4,
        "enantiomer flips the sign of 𝒜",
        worst_flip <= 1e-13,
        format!("max |𝒜 + 𝒜_mirror|/|𝒜| {worst_flip:.1e} (tol 1e-13)"),
    );

    let amps = random_amplitudes(7, 3).unwrap();
    let mut nonzero = 0;
    for l1 in 0..=3 {
        for l2 in 0..=3 {
            if (l1 + l2) % 2 == 1 && pair_contribution(&amps, l1, l2) != Complex64::new(0.0, 0.0) {
                nonzero += 1;
            }
        }
    }
    let odd_only = amps.filter_partial_waves(|l| l % 2 == 1, |l| l % 2 == 0);
    let b = blm(&odd_only, &unit_field(PI / 4.0));
    let numeric = b.get(2, 1).norm() / b.get(0, 0).norm();
    suite.report(
        4,
        "odd l1+l2 pairs contribute exactly zero",
        nonzero == 0 && analytic_a(&odd_only, 1.0, 1.0).magnitude() == 0.0 && numeric <= 1e-10,
        format!("{nonzero} nonzero odd pairs, quadrature |B21|/|B00| {numeric:.1e}"),
    );
}

fn structure(suite: &mut Suite) {
    let mut worst_high_l: f64 = 0.0;
    let mut worst_b4: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    let mut worst_re: f64 = 0.0;
    for seed in 1..=3 {
        let amps = random_amplitudes(seed, 3).unwrap();
        let one = blm(&amps, &FieldConfig::new(1.0, 0.0, 0.3, 1.0).unwrap());
        let scale = one.get(0, 0).norm();
        for (l, _, b) in one.iter() {
            if l >= 3 {
                worst_high_l = worst_high_l.max(b.norm() / scale);
            }
        }
        let runs: Vec<BlmExpansion> = [0.0, 0.4, 1.3, 2.2].iter().map(|&p| blm(&amps, &unit_field(p))).collect();
        let scale = runs[0].get(0, 0).norm();
        for r in &runs {
            for m in -4..=4 {
                worst_b4 = worst_b4.max((r.get(4, m) - runs[0].get(4, m)).norm() / scale);
            }
            worst_herm = worst_herm.max(r.hermiticity_defect() / scale);
            worst_re = worst_re.max(r.get(2, 1).re.abs() / scale);
        }
    }
    suite.report(
        5,
        "E_y = 0 gives B_LM = 0 for L >= 3",
        worst_high_l <= 1e-10,
        format!("max |B_L>=3|/|B00| {worst_high_l:.1e} (tol 1e-10)"),
    );
    suite.report(
        5,
        "B_4M independent of φ",
        worst_b4 <= 1e-10,
        format!("max change/|B00| {worst_b4:.1e} (tol 1e-10)"),
    );
    suite.report(
        5,
        "B_L,-M = (-1)^M conj(B_LM)",
        worst_herm <= 1e-10,
        format!("max defect/|B00| {worst_herm:.1e} (tol 1e-10)"),
    );
    suite.report(
        5,
        "Re B_21 = 0",
        worst_re <= 1e-10,
        format!("max |Re B21|/|B00| {worst_re:.1e} (tol 1e-10)"),
    );
}

fn identities(suite: &mut Suite) {
    let mut rng = TestRng::new(2024);

    let mut a4: f64 = 0.0;
    for _ in 0..20 {
        let (t, p) = rng.direction();
        for l1 in 0..=3 {
            for l2 in 0..=3 {
                let m1 = rng.range(-(l1 as f64), l1 as f64 + 1.0).floor() as i32;
                let m2 = rng.range(-(l2 as f64), l2 as f64 + 1.0).floor() as i32;
                let lhs = spherical_harmonic(l1, m1, t, p).unwrap().conj() * spherical_harmonic(l2, m2, t, p).unwrap();
                let rhs: Complex64 = ylm_product_expand(l1, m1, l2, m2)
                    .unwrap()
                    .iter()
                    .map(|term| spherical_harmonic(term.l, term.m, t, p).unwrap() * term.coefficient)
                    .sum();
                a4 = a4.max((lhs - rhs).norm());
            }
        }
    }

    let mut a6: f64 = 0.0;
    let mut a7: f64 = 0.0;
    for _ in 0..20 {
        let r = rng.euler();
        let l1 = (rng.uniform() * 4.0) as i32;
        let l2 = (rng.uniform() * 4.0) as i32;
        for m1p in -l1..=l1 {
            for m1 in -l1..=l1 {
                for m2p in -l2..=l2 {
                    for m2 in -l2..=l2 {
                        let lhs = wigner_big_d(l1, m1p, m1, &r).unwrap().conj() * wigner_big_d(l2, m2p, m2, &r).unwrap();
                        a6 = a6.max((lhs - conj_pair_series(l1, m1p, m1, l2, m2p, m2, &r).unwrap()).norm());
                    }
                }
            }
        }
        for k1 in -1..=1 {
            for k2 in -1..=1 {
                for q1 in [-1, 1] {
                    for q2 in [-1, 1] {
                        let lhs = wigner_big_d(1, k1, q1, &r).unwrap() * wigner_big_d(1, k2, q2, &r).unwrap();
                        a7 = a7.max((lhs - photon_pair_series(k1, k2, q1, q2, &r).unwrap()).norm());
                    }
                }
            }
        }
    }

    let mut a8: f64 = 0.0;
    for l1 in 0..=4 {
        for l2 in 0..=4 {
            for j in 0..=6 {
                for mj in -j..=j {
                    let d = projection_sum_explicit(l1, l2, j, mj).unwrap() - projection_sum_closed(l1, l2, j, mj).unwrap();
                    a8 = a8.max(d.abs());
                }
            }
        }
    }

    let grid = So3Grid::new(8, 6, 8).unwrap();
    let mut a9: f64 = 0.0;
    for t in 0..=2 {
        for mjp in -2..=2 {
            for kpp in -1..=1 {
                for mtp in -t..=t {
                    for mt in -t..=t {
                        for q in [1, -1] {
                            let left = [mjp, -kpp, mtp];
                            let right = [1, -q, mt];
                            let numeric = grid.average(|r| {
                                wigner_big_d(2, left[0], right[0], r).unwrap()
                                    * wigner_big_d(1, left[1], right[1], r).unwrap()
                                    * wigner_big_d(t, left[2], right[2], r).unwrap()
                            });
                            let closed = three_rotation_average([2, 1, t], left, right).unwrap();
                            a9 = a9.max((numeric - closed).norm());
                        }
                    }
                }
            }
        }
    }

    suite.report(6, "harmonic product expansion", a4 <= 1e-12, format!("max error {a4:.1e} (tol 1e-12)"));
    suite.report(6, "conjugate rotation-matrix pair series", a6 <= 1e-12, format!("max error {a6:.1e} (tol 1e-12)"));
    suite.report(6, "photon rotation-matrix pair coupling", a7 <= 1e-12, format!("max error {a7:.1e} (tol 1e-12)"));
    suite.report(6, "3j projection sum closed form", a8 <= 1e-13, format!("max error {a8:.1e} (tol 1e-13)"));
    suite.report(6, "three-rotation orientation average", a9 <= 1e-10, format!("max error {a9:.1e} (tol 1e-10)"));
}

fn quadrature(suite: &mut Suite) {
    let mut worst: f64 = 0.0;
    for (seed, lmax, phi) in [(1, 3, 0.3), (2, 2, 1.1), (4, 1, -0.7)] {
        let amps = random_amplitudes(seed, lmax).unwrap();
        let field = unit_field(phi);
        let quad = QuadratureSpec::for_lmax(lmax);
        let base = orientation_averaged_blm(&amps, &field, &quad).unwrap();
        let fine = orientation_averaged_blm(&amps, &field, &quad.doubled()).unwrap();
        worst = worst.max(blm_distance(&base, &fine) / base.get(0, 0).norm());
    }
    suite.report(
        7,
        "doubling every node count leaves B_LM unchanged",
        worst < 1e-12,
        format!("max change/|B00| {worst:.1e} (tol 1e-12)"),
    );

    let amps = random_amplitudes(5, 3).unwrap();
    let field = unit_field(0.9);
    let quad = QuadratureSpec::for_lmax(3);
    let runs: Vec<Vec<(u64, u64)>> = [1, 2, 8]
        .iter()
        .map(|&n| {
            with_worker_threads(n, || orientation_averaged_blm(&amps, &field, &quad).unwrap())
                .unwrap()
                .iter()
                .map(|(_, _, b)| (b.re.to_bits(), b.im.to_bits()))
                .collect()
        })
        .collect();
    suite.report(
        7,
        "bit-identical B_LM with 1, 2 and 8 worker threads",
        runs[0] == runs[1] && runs[0] == runs[2],
        format!("{} coefficients compared bitwise", runs[0].len()),
    );
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    bracket(&mut suite);
    oracle_equivalence(&mut suite);
    phase_law(&mut suite);
    chirality(&mut suite);
    structure(&mut suite);
    identities(&mut suite);
    quadrature(&mut suite);
    if suite.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} check(s) failed", suite.failures);
        ExitCode::FAILURE
    }
}
