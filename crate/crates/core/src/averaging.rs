//! Brute-force orientation averaging and harmonic projection.
//!
//! `B_LM = ⟨ ∫ dp̂ Y_LM(p̂) 2π|D_T(Ω, p̂)|² ⟩_Ω` with the normalized SO(3)
//! measure `(1/8π²) dα sinβ dβ dγ`. All integrals use a tensor-product
//! rule: uniform nodes in α, γ and φ_p, Gauss–Legendre nodes in cosβ and
//! cosθ_p. For amplitudes with partial waves up to `lmax` the integrand is a
//! trigonometric polynomial of degree `2·lmax + 4` in each azimuth and a
//! polynomial of degree `2·lmax + 4` in each cosine, so the rule is exact
//! once [`QuadratureSpec::validate`] passes.
//!
//! Orientation nodes are evaluated in parallel (feature `parallel`) and the
//! per-node contributions are combined by a fixed pairwise reduction, so
//! results do not depend on the number of worker threads.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitudes::AmplitudeSet;
use crate::angular::{ylm_unchecked, EulerAngles};
use crate::dynamics::{harmonics_at, lm_index, EmissionDirection, FieldConfig, LabPartialWaves, PhotonWeights};
use crate::error::{Error, Result};
use crate::table;

/// Highest multipole of the averaged distribution.
pub const BLM_LMAX: i32 = 4;
const N_BLM: usize = ((BLM_LMAX + 1) * (BLM_LMAX + 1)) as usize;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(n, x);
            dp = nf * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (p, p_prev) = legendre_pair(n, x);
                dp = nf * (x * p - p_prev) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Node counts of the tensor-product rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub n_gamma: usize,
    pub n_theta: usize,
    pub n_phi_p: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_alpha: 16,
            n_beta: 8,
            n_gamma: 16,
            n_theta: 8,
            n_phi_p: 16,
        }
    }
}

impl QuadratureSpec {
    /// Smallest exact rule for partial waves up to `lmax`.
    pub fn minimal(lmax: i32) -> Self {
        let lmax = lmax.max(0) as usize;
        let azimuthal = 2 * lmax + 5;
        let polar = lmax + 3;
        Self {
            n_alpha: azimuthal,
            n_beta: polar,
            n_gamma: azimuthal,
            n_theta: polar,
            n_phi_p: azimuthal.max(2 * BLM_LMAX as usize + 1),
        }
    }

    /// The default rule, enlarged where `lmax` requires it.
    pub fn for_lmax(lmax: i32) -> Self {
        let min = Self::minimal(lmax);
        let d = Self::default();
        Self {
            n_alpha: d.n_alpha.max(min.n_alpha + 1),
            n_beta: d.n_beta.max(min.n_beta + 1),
            n_gamma: d.n_gamma.max(min.n_gamma + 1),
            n_theta: d.n_theta.max(min.n_theta + 1),
            n_phi_p: d.n_phi_p.max(min.n_phi_p + 1),
        }
    }

    pub fn doubled(&self) -> Self {
        Self {
            n_alpha: 2 * self.n_alpha,
            n_beta: 2 * self.n_beta,
            n_gamma: 2 * self.n_gamma,
            n_theta: 2 * self.n_theta,
            n_phi_p: 2 * self.n_phi_p,
        }
    }

    pub fn validate(&self, lmax: i32) -> Result<()> {
        let min = Self::minimal(lmax);
        let checks = [
            ("n_alpha", self.n_alpha, min.n_alpha),
            ("n_beta", self.n_beta, min.n_beta),
            ("n_gamma", self.n_gamma, min.n_gamma),
            ("n_theta", self.n_theta, min.n_theta),
            ("n_phi_p", self.n_phi_p, min.n_phi_p),
        ];
        for (axis, got, need) in checks {
            if got < need {
                return Err(Error::UnderResolved { axis, got, need });
            }
        }
        Ok(())
    }

    pub fn orientation_count(&self) -> usize {
        self.n_alpha * self.n_beta * self.n_gamma
    }
}

/// Orientation nodes with weights summing to one.
#[derive(Debug, Clone)]
pub struct So3Grid {
    nodes: Vec<(EulerAngles, f64)>,
}

impl So3Grid {
    pub fn new(n_alpha: usize, n_beta: usize, n_gamma: usize) -> Result<Self> {
        if n_alpha == 0 || n_beta == 0 || n_gamma == 0 {
            return Err(Error::invalid("SO(3) grid needs at least one node per axis"));
        }
        let (xb, wb) = gauss_legendre(n_beta);
        let mut nodes = Vec::with_capacity(n_alpha * n_beta * n_gamma);
        let w_az = 1.0 / (n_alpha * n_gamma) as f64;
        for ia in 0..n_alpha {
            let alpha = TAU * ia as f64 / n_alpha as f64;
            for (x, w) in xb.iter().zip(&wb) {
                let beta = x.clamp(-1.0, 1.0).acos();
                for ig in 0..n_gamma {
                    let gamma = TAU * ig as f64 / n_gamma as f64;
                    nodes.push((EulerAngles { alpha, beta, gamma }, 0.5 * w * w_az));
                }
            }
        }
        Ok(Self { nodes })
    }

    pub fn from_spec(spec: &QuadratureSpec) -> Result<Self> {
        Self::new(spec.n_alpha, spec.n_beta, spec.n_gamma)
    }

    pub fn nodes(&self) -> &[(EulerAngles, f64)] {
        &self.nodes
    }

    /// `(1/8π²) ∫ f(Ω) dΩ`, summed sequentially in node order.
    pub fn average(&self, f: impl Fn(&EulerAngles) -> Complex64) -> Complex64 {
        self.nodes.iter().map(|(e, w)| f(e) * *w).sum()
    }
}

/// Direction nodes with weights summing to 4π.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    nodes: Vec<(EmissionDirection, f64)>,
}

impl SphereGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::invalid("sphere grid needs at least one node per axis"));
        }
        let (xt, wt) = gauss_legendre(n_theta);
        let dphi = TAU / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (x, w) in xt.iter().zip(&wt) {
            let theta_p = x.clamp(-1.0, 1.0).acos();
            for ip in 0..n_phi {
                nodes.push((
                    EmissionDirection {
                        theta_p,
                        phi_p: dphi * ip as f64,
                    },
                    w * dphi,
                ));
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[(EmissionDirection, f64)] {
        &self.nodes
    }
}

/// Coefficients of `dσ/dΩ = Σ_{LM} B_LM Y*_LM(p̂)` for `L <= 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlmExpansion {
    coefficients: Vec<Complex64>,
}

impl BlmExpansion {
    pub fn zeros() -> Self {
        Self {
            coefficients: vec![ZERO; N_BLM],
        }
    }

    pub fn lmax(&self) -> i32 {
        BLM_LMAX
    }

    pub fn get(&self, l: i32, m: i32) -> Complex64 {
        assert!((0..=BLM_LMAX).contains(&l) && m.abs() <= l, "B_LM index ({l},{m}) out of range");
        self.coefficients[lm_index(l, m)]
    }

    /// `(L, M, B_LM)` with `L` ascending, then `M` ascending.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, Complex64)> + '_ {
        (0..=BLM_LMAX).flat_map(move |l| (-l..=l).map(move |m| (l, m, self.coefficients[lm_index(l, m)])))
    }

    pub fn max_abs(&self) -> f64 {
        self.coefficients.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `Σ B_LM Y*_LM(p̂)`.
    pub fn evaluate(&self, direction: &EmissionDirection) -> f64 {
        self.iter()
            .map(|(l, m, b)| b * ylm_unchecked(l, m, direction.theta_p, direction.phi_p).conj())
            .sum::<Complex64>()
            .re
    }

    /// The `L = 2, |M| = 1` part, i.e. the FBUD asymmetry surface.
    pub fn fbud_part(&self, direction: &EmissionDirection) -> f64 {
        [-1, 1]
            .iter()
            .map(|&m| self.get(2, m) * ylm_unchecked(2, m, direction.theta_p, direction.phi_p).conj())
            .sum::<Complex64>()
            .re
    }

    /// `max |B_{L,-M} - (-1)^M conj(B_{L,M})|`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.iter()
            .map(|(l, m, b)| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                (self.get(l, -m) - b.conj() * sign).norm()
            })
            .fold(0.0, f64::max)
    }

    fn from_flat(coefficients: Vec<Complex64>) -> Self {
        debug_assert_eq!(coefficients.len(), N_BLM);
        Self { coefficients }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows: Vec<Vec<f64>> = self
            .iter()
            .map(|(l, m, b)| vec![l as f64, m as f64, b.re, b.im])
            .collect();
        table::write_csv(path, &["L", "M", "Re(B)", "Im(B)"], &rows)
    }
}

/// The three φ-independent pieces of `B_LM(φ)`:
/// `B(φ) = direct + e^{-2iφ} forward + e^{2iφ} backward`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseResolvedBlm {
    /// From `|c1|² + |c2|²`.
    pub direct: BlmExpansion,
    /// From `c2 c1*`; its `(2, 1)` entry is the asymmetry coefficient.
    pub forward: BlmExpansion,
    /// From `c1 c2*`.
    pub backward: BlmExpansion,
}

impl PhaseResolvedBlm {
    pub fn at_phase(&self, phi: f64) -> BlmExpansion {
        let e = Complex64::from_polar(1.0, -2.0 * phi);
        let coefficients = (0..N_BLM)
            .map(|i| {
                self.direct.coefficients[i]
                    + e * self.forward.coefficients[i]
                    + e.conj() * self.backward.coefficients[i]
            })
            .collect();
        BlmExpansion::from_flat(coefficients)
    }
}

#[cfg(feature = "parallel")]
fn map_nodes<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_nodes<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Fixed-shape pairwise sum; the association order depends only on `items.len()`.
fn pairwise_sum(items: &[Vec<Complex64>], width: usize) -> Vec<Complex64> {
    match items.len() {
        0 => vec![ZERO; width],
        1 => items[0].clone(),
        n => {
            let (left, right) = items.split_at(n / 2);
            let mut a = pairwise_sum(left, width);
            let b = pairwise_sum(right, width);
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            a
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (`0` = current pool).
pub fn with_worker_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    #[cfg(feature = "parallel")]
    {
        if threads == 0 {
            return Ok(f());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start {threads} worker threads: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(f())
    }
}

struct ProjectionGrid {
    harmonics: Vec<Vec<Complex64>>,
    /// `w_j · 2π · Y_LM(p̂_j)`
    projectors: Vec<[Complex64; N_BLM]>,
}

impl ProjectionGrid {
    fn new(spec: &QuadratureSpec, lmax: i32) -> Result<Self> {
        let sphere = SphereGrid::new(spec.n_theta, spec.n_phi_p)?;
        let mut harmonics = Vec::with_capacity(sphere.nodes().len());
        let mut projectors = Vec::with_capacity(sphere.nodes().len());
        for (dir, w) in sphere.nodes() {
            harmonics.push(harmonics_at(lmax, dir));
            let mut p = [ZERO; N_BLM];
            for l in 0..=BLM_LMAX {
                for m in -l..=l {
                    p[lm_index(l, m)] = ylm_unchecked(l, m, dir.theta_p, dir.phi_p) * (TAU * w);
                }
            }
            projectors.push(p);
        }
        Ok(Self { harmonics, projectors })
    }
}

/// Orientation-averaged `B_LM` at the field's relative phase, from `|D_T|²`.
pub fn orientation_averaged_blm(amps: &AmplitudeSet, field: &FieldConfig, quad: &QuadratureSpec) -> Result<BlmExpansion> {
    quad.validate(amps.lmax())?;
    field.validate()?;
    let so3 = So3Grid::from_spec(quad)?;
    let grid = ProjectionGrid::new(quad, amps.lmax())?;
    let weights = PhotonWeights::for_field(field);
    let phase = field.two_photon_phase_factor();

    let contributions = map_nodes(so3.nodes().len(), |i| {
        let (euler, w_orient) = so3.nodes()[i];
        let waves = LabPartialWaves::compute(amps, &weights, &euler);
        let mut acc = vec![ZERO; N_BLM];
        for (ylm, proj) in grid.harmonics.iter().zip(&grid.projectors) {
            let (c1, c2) = waves.contract(ylm);
            let intensity = (c1 + phase * c2).norm_sqr() * w_orient;
            acc.iter_mut().zip(proj).for_each(|(a, p)| *a += p * intensity);
        }
        acc
    });
    Ok(BlmExpansion::from_flat(pairwise_sum(&contributions, N_BLM)))
}

/// The φ-independent decomposition of `B_LM(φ)`, from the same quadrature.
pub fn phase_resolved_blm(amps: &AmplitudeSet, field: &FieldConfig, quad: &QuadratureSpec) -> Result<PhaseResolvedBlm> {
    quad.validate(amps.lmax())?;
    field.validate()?;
    let so3 = So3Grid::from_spec(quad)?;
    let grid = ProjectionGrid::new(quad, amps.lmax())?;
    let weights = PhotonWeights::for_field(field);

    let contributions = map_nodes(so3.nodes().len(), |i| {
        let (euler, w_orient) = so3.nodes()[i];
        let waves = LabPartialWaves::compute(amps, &weights, &euler);
        let mut acc = vec![ZERO; 3 * N_BLM];
        for (ylm, proj) in grid.harmonics.iter().zip(&grid.projectors) {
            let (c1, c2) = waves.contract(ylm);
            let direct = (c1.norm_sqr() + c2.norm_sqr()) * w_orient;
            let forward = c2 * c1.conj() * w_orient;
            let backward = forward.conj();
            for (k, p) in proj.iter().enumerate() {
                acc[k] += p * direct;
                acc[N_BLM + k] += p * forward;
                acc[2 * N_BLM + k] += p * backward;
            }
        }
        acc
    });
    let total = pairwise_sum(&contributions, 3 * N_BLM);
    Ok(PhaseResolvedBlm {
        direct: BlmExpansion::from_flat(total[..N_BLM].to_vec()),
        forward: BlmExpansion::from_flat(total[N_BLM..2 * N_BLM].to_vec()),
        backward: BlmExpansion::from_flat(total[2 * N_BLM..].to_vec()),
    })
}

/// Least-squares fit of `Im B_{2,+1}(φ) = -2A sin(2φ - δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseFit {
    pub amplitude: f64,
    /// `δ ∈ (-π, π]`, or `None` when the amplitude is indistinguishable from zero.
    pub internal_phase: Option<f64>,
    /// Largest absolute deviation of the samples from the fitted curve.
    pub residual: f64,
    /// `false` when the residual exceeds `FIT_RESIDUAL_TOL` of the amplitude,
    /// or the zero level when the asymmetry vanishes.
    pub consistent: bool,
}

/// Relative residual above which a fit is flagged as violating the `sin(2φ-δ)` law.
pub const FIT_RESIDUAL_TOL: f64 = 1e-8;
/// Amplitudes below this fraction of the reference scale are treated as zero.
pub const ZERO_ASYMMETRY_TOL: f64 = 1e-10;

fn check_phase_set(phis: &[f64]) -> Result<()> {
    let mut reduced: Vec<f64> = phis.iter().map(|p| p.rem_euclid(PI)).collect();
    reduced.sort_by(f64::total_cmp);
    let mut distinct = 0;
    let mut last: Option<f64> = None;
    for &p in &reduced {
        if last.is_none_or(|q| p - q > 1e-9) {
            distinct += 1;
            last = Some(p);
        }
    }
    if distinct > 1 && reduced[0] + PI - reduced[reduced.len() - 1] <= 1e-9 {
        distinct -= 1;
    }
    if distinct < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 phases distinct modulo pi, got {distinct}"
        )));
    }
    Ok(())
}

/// Fits sampled `Im B_{2,+1}` values. `scale` sets the zero threshold
/// (typically `|B_00|`).
pub fn fit_phase_law(phis: &[f64], im_b21: &[f64], scale: f64) -> Result<PhaseFit> {
    if phis.len() != im_b21.len() {
        return Err(Error::invalid("phase and sample arrays differ in length"));
    }
    check_phase_set(phis)?;
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&p, &y) in phis.iter().zip(im_b21) {
        let (s, c) = (2.0 * p).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += y * s;
        yc += y * c;
    }
    let det = ss * cc - sc * sc;
    if det <= 1e-12 * (ss + cc) * (ss + cc) {
        return Err(Error::DegenerateFit("phase samples do not span sin(2phi), cos(2phi)".into()));
    }
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    let amplitude = 0.5 * a.hypot(b);
    let residual = phis
        .iter()
        .zip(im_b21)
        .map(|(&p, &y)| (y - a * (2.0 * p).sin() - b * (2.0 * p).cos()).abs())
        .fold(0.0, f64::max);
    let zero_level = ZERO_ASYMMETRY_TOL * scale;
    let internal_phase = if amplitude > zero_level && amplitude > 0.0 {
        let mut delta = b.atan2(-a);
        if delta <= -PI {
            delta += TAU;
        }
        Some(delta)
    } else {
        None
    };
    Ok(PhaseFit {
        amplitude,
        internal_phase,
        residual,
        consistent: residual <= (FIT_RESIDUAL_TOL * amplitude).max(zero_level),
    })
}

/// Samples `B_{2,+1}(φ)` by full quadrature at every phase and fits the
/// `sin(2φ-δ)` law.
pub fn extract_a_delta_numeric(
    amps: &AmplitudeSet,
    field_base: &FieldConfig,
    phis: &[f64],
    quad: &QuadratureSpec,
) -> Result<PhaseFit> {
    check_phase_set(phis)?;
    quad.validate(amps.lmax())?;
    let mut im = Vec::with_capacity(phis.len());
    let mut scale = 0.0_f64;
    for &phi in phis {
        let blm = orientation_averaged_blm(amps, &field_base.with_phase(phi), quad)?;
        im.push(blm.get(2, 1).im);
        scale = scale.max(blm.get(0, 0).norm());
    }
    fit_phase_law(phis, &im, scale)
}

/// Recovers `𝒜` from `B_{2,+1}` at two phases via
/// `Im B_{2,+1}(φ) = 2 Im(𝒜 e^{-2iφ})`.
pub fn coefficient_from_two_phases(phi_a: f64, b21_a: Complex64, phi_b: f64, b21_b: Complex64) -> Result<Complex64> {
    let (sa, ca) = (2.0 * phi_a).sin_cos();
    let (sb, cb) = (2.0 * phi_b).sin_cos();
    // [-2 sa, 2 ca; -2 sb, 2 cb] [x; y] = [Im Ba; Im Bb]
    let det = -4.0 * sa * cb + 4.0 * ca * sb;
    if det.abs() < 1e-12 {
        return Err(Error::DegenerateFit("phases differ by a multiple of pi/2".into()));
    }
    let x = (2.0 * cb * b21_a.im - 2.0 * ca * b21_b.im) / det;
    let y = (2.0 * sb * b21_a.im - 2.0 * sa * b21_b.im) / det;
    Ok(Complex64::new(x, y))
}
