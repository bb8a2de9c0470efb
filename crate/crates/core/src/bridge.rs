//! Brownian bridges on `[0, 2π]`, the singular-kernel functional `I_φ`,
//! and the empirical-process split `T_N = T_{N,ε} + Z_{N,ε}`.
//!
//! `g(ψ) = log(2(1 - cos ψ)) = 2 log|2 sin(ψ/2)|` is the kernel behind all
//! of these; its derivative is `sin ψ / (1 - cos ψ) = cot(ψ/2)`.

use std::f64::consts::{PI, TAU};

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64 as FftComplex;
use rustfft::FftPlanner;

use crate::circlepoly::log_chord_angle;
use crate::quad::integrate;
use crate::seed::SeedSpec;
use crate::stats::compensated_sum;
use crate::{Error, Result};

/// Default number of grid steps of a bridge path.
pub const DEFAULT_GRID: usize = 1 << 20;

/// Default dyadic depth.
pub const DEFAULT_DEPTH: u32 = 10;

const QUAD_TOL: f64 = 1e-11;

/// `g(ψ) = log(2(1 - cos ψ))`.
pub fn log_kernel(psi: f64) -> f64 {
    2.0 * log_chord_angle(psi, 0.0)
}

/// `g'(ψ) = sin ψ / (1 - cos ψ)`.
pub fn cot_kernel(psi: f64) -> f64 {
    1.0 / (0.5 * psi).tan()
}

/// Bridge values at `ψ_j = 2πj/M`, `j = 0..=M`, pinned at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgePath {
    values: Vec<f64>,
}

impl BridgePath {
    /// Wrap explicit samples; the first and last must be exactly zero.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Domain("a path needs at least two grid steps".into()));
        }
        if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
            return Err(Error::Domain("bridge endpoints must be zero".into()));
        }
        Ok(Self { values })
    }

    pub fn grid(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        TAU / self.grid() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at the grid point nearest to `ψ`.
    pub fn at(&self, psi: f64) -> f64 {
        self.values[self.snap(psi.clamp(0.0, TAU)).min(self.grid())]
    }

    fn snap(&self, phi: f64) -> usize {
        (phi / self.step()).round() as usize
    }

    pub fn negate(&self) -> Self {
        Self { values: self.values.iter().map(|v| if *v == 0.0 { 0.0 } else { -v }).collect() }
    }
}

/// `W(ψ) = B(ψ) - (ψ/2π) B(2π)` with Gaussian steps of variance `2π/M`.
pub fn sample_bridge(m: usize, seed: SeedSpec) -> Result<BridgePath> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::Domain("grid size must be a power of two >= 2".into()));
    }
    let mut rng = seed.rng();
    let sd = (TAU / m as f64).sqrt();
    let mut b = Vec::with_capacity(m + 1);
    b.push(0.0);
    let mut acc = 0.0;
    for _ in 0..m {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += sd * z;
        b.push(acc);
    }
    let end = b[m];
    let mut values: Vec<f64> = b.iter().enumerate().map(|(j, v)| v - (j as f64 / m as f64) * end).collect();
    values[0] = 0.0;
    values[m] = 0.0;
    Ok(BridgePath { values })
}

/// `W_φ(θ) = W(φ + θ) - W(φ)` with wraparound; `φ` is snapped to the grid.
pub fn shift_bridge(path: &BridgePath, phi: f64) -> BridgePath {
    let m = path.grid();
    let s = path.snap(phi.rem_euclid(TAU)) % m;
    let base = path.values[s];
    let mut values: Vec<f64> = (0..=m).map(|j| path.values[(s + j) % m] - base).collect();
    values[0] = 0.0;
    values[m] = 0.0;
    BridgePath { values }
}

/// Which version of the truncated functional to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IForm {
    /// `∫_ε^{2π-ε} W_φ(θ) cot(θ/2) dθ`.
    #[default]
    Raw,
    /// `[W_φ g]_ε^{2π-ε} - ∫_ε^{2π-ε} W_φ cot(θ/2) dθ`. Its boundary term
    /// vanishes as `ε → 0`, so this form tends to minus the raw integral.
    ByParts,
}

/// Grid range `[j0, M - j0]` covering `[ε, 2π - ε]`.
fn truncation(path: &BridgePath, eps: f64) -> Result<usize> {
    let h = path.step();
    if !(eps >= h * (1.0 - 1e-12)) || eps >= PI {
        return Err(Error::Resolution(format!("ε = {eps} must lie in [{h}, π)")));
    }
    let j0 = ((eps / h) - 1e-9).ceil() as usize;
    Ok(j0.max(1))
}

/// Trapezoid weights times `cot(θ_j/2)` on `[j0, M - j0]`.
fn kernel_weights(m: usize, j0: usize) -> Vec<f64> {
    let h = TAU / m as f64;
    let j1 = m - j0;
    let mut k = vec![0.0; m];
    for (j, kj) in k.iter_mut().enumerate().take(j1 + 1).skip(j0) {
        let w = if j == j0 || j == j1 { 0.5 } else { 1.0 };
        *kj = w * h * cot_kernel(j as f64 * h);
    }
    k
}

fn bracket(path: &BridgePath, j0: usize) -> f64 {
    let m = path.grid();
    let g = log_kernel(j0 as f64 * path.step());
    (path.values[m - j0] - path.values[j0]) * g
}

/// `I_φ` truncated to `[ε, 2π - ε]` (trapezoid rule on the path grid).
pub fn i_phi(path: &BridgePath, phi: f64, eps: f64, form: IForm) -> Result<f64> {
    let j0 = truncation(path, eps)?;
    let shifted = shift_bridge(path, phi);
    let k = kernel_weights(path.grid(), j0);
    let raw = compensated_sum(k.iter().zip(&shifted.values).map(|(a, b)| a * b));
    Ok(match form {
        IForm::Raw => raw,
        IForm::ByParts => bracket(&shifted, j0) - raw,
    })
}

/// `I_φ` at every grid shift `φ = 2πs/M`, by one circular correlation.
pub fn i_phi_all(path: &BridgePath, eps: f64, form: IForm) -> Result<Vec<f64>> {
    let m = path.grid();
    let j0 = truncation(path, eps)?;
    let k = kernel_weights(m, j0);
    let ksum = compensated_sum(k.iter().copied());
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut w: Vec<FftComplex> = path.values[..m].iter().map(|&v| FftComplex::new(v, 0.0)).collect();
    let mut kk: Vec<FftComplex> = k.iter().map(|&v| FftComplex::new(v, 0.0)).collect();
    fwd.process(&mut w);
    fwd.process(&mut kk);
    for (a, b) in w.iter_mut().zip(&kk) {
        *a *= b.conj();
    }
    inv.process(&mut w);
    let scale = 1.0 / m as f64;
    Ok((0..m)
        .map(|s| {
            // Σ_j K_j W(s + j) - W(s) Σ_j K_j
            let raw = w[s].re * scale - path.values[s] * ksum;
            match form {
                IForm::Raw => raw,
                IForm::ByParts => {
                    let g = log_kernel(j0 as f64 * path.step());
                    let hi = path.values[(s + m - j0) % m] - path.values[s];
                    let lo = path.values[(s + j0) % m] - path.values[s];
                    (hi - lo) * g - raw
                }
            }
        })
        .collect())
}

/// Dyadic phases `0; π; π/2, 3π/2; …` to depth `R` (`2^R` phases).
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPhases {
    depth: u32,
    phases: Vec<f64>,
    /// Numerators over `2^R`.
    numerators: Vec<u64>,
}

impl DyadicPhases {
    pub fn new(depth: u32) -> Result<Self> {
        if depth > 30 {
            return Err(Error::Domain("dyadic depth must be at most 30".into()));
        }
        let full = 1u64 << depth;
        let mut numerators = vec![0];
        for level in 1..=depth {
            let step = full >> level;
            numerators.extend((1..(1u64 << level)).step_by(2).map(|odd| odd * step));
        }
        let phases = numerators.iter().map(|&k| TAU * k as f64 / full as f64).collect();
        Ok(Self { depth, phases, numerators })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// `max_r I_{φ_r}` over the dyadic phases to depth `R`.
pub fn i_star(path: &BridgePath, depth: u32, eps: f64, form: IForm) -> Result<f64> {
    let d = DyadicPhases::new(depth)?;
    let m = path.grid() as u64;
    if (1u64 << depth) > m {
        return Err(Error::Resolution(format!("2^{depth} dyadic phases exceed the {m}-point grid")));
    }
    let stride = m >> depth;
    if d.len() <= 8 {
        return d.phases().iter().map(|&phi| i_phi(path, phi, eps, form)).try_fold(f64::NEG_INFINITY, |a, v| Ok(a.max(v?)));
    }
    let all = i_phi_all(path, eps, form)?;
    Ok(d.numerators.iter().map(|&k| all[(k * stride) as usize]).fold(f64::NEG_INFINITY, f64::max))
}

/// `W_{N,φ}(ψ) = √N (F_{N,φ}(ψ) - ψ/2π)` for the cycled empirical
/// distribution of `N` angles, as a right-continuous step table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalProcess {
    /// Sorted `(θ_q - φ) mod 2π`.
    shifted: Vec<f64>,
}

impl EmpiricalProcess {
    pub fn new(angles: &[f64], phi: f64) -> Self {
        let mut shifted: Vec<f64> = angles.iter().map(|&a| (a - phi).rem_euclid(TAU)).collect();
        shifted.sort_by(f64::total_cmp);
        Self { shifted }
    }

    pub fn len(&self) -> usize {
        self.shifted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifted.is_empty()
    }

    /// Jump locations in `[0, 2π)`.
    pub fn jumps(&self) -> &[f64] {
        &self.shifted
    }

    /// `F_{N,φ}(ψ)`, counting points at or below `ψ`.
    pub fn cdf(&self, psi: f64) -> f64 {
        self.shifted.partition_point(|&u| u <= psi) as f64 / self.len() as f64
    }

    pub fn eval(&self, psi: f64) -> f64 {
        let n = self.len() as f64;
        n.sqrt() * (self.cdf(psi) - psi / TAU)
    }

    /// `sup_ψ |W_{N,φ}(ψ)|`, attained at a jump or just before one.
    pub fn sup_abs(&self) -> f64 {
        let n = self.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &u) in self.shifted.iter().enumerate() {
            let t = u / TAU;
            d = d.max((i + 1) as f64 / n - t).max(t - i as f64 / n);
        }
        n.sqrt() * d
    }
}

/// `W_{N,φ}(ψ)` by direct counting, without sorting.
pub fn empirical_process_direct(angles: &[f64], phi: f64, psi: f64) -> f64 {
    let n = angles.len() as f64;
    let count = angles.iter().filter(|&&a| (a - phi).rem_euclid(TAU) <= psi).count() as f64;
    n.sqrt() * (count / n - psi / TAU)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < PI / 2.0) {
        return Err(Error::Domain("ε must lie in (0, π/2)".into()));
    }
    Ok(())
}

/// `h(ψ) = g(ψ) - 2 log ψ`, smooth with `h(0) = 0`.
fn smooth_part(psi: f64) -> f64 {
    if psi < 1e-8 {
        return -psi * psi / 12.0;
    }
    2.0 * (2.0 * (0.5 * psi).sin() / psi).ln()
}

/// `μ_ε = (1/π) ∫_0^ε g(ψ) dψ`, the mean of one summand of `Z_{N,ε}`.
pub fn mu_eps(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let log_part = 2.0 * (eps * eps.ln() - eps);
    let smooth = integrate(smooth_part, 0.0, eps, QUAD_TOL)?;
    Ok((log_part + smooth) / PI)
}

/// `σ²_ε = (1/π) ∫_0^ε g(ψ)² dψ - μ_ε²`.
pub fn sigma2_eps(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let l = eps.ln();
    let log2_part = 4.0 * (eps * l * l - 2.0 * eps * l + 2.0 * eps);
    let cross = integrate(|x| if x == 0.0 { 0.0 } else { 4.0 * smooth_part(x) * x.ln() }, 0.0, eps, QUAD_TOL)?;
    let sq = integrate(|x| smooth_part(x).powi(2), 0.0, eps, QUAD_TOL)?;
    let mu = mu_eps(eps)?;
    Ok((log2_part + cross + sq) / PI - mu * mu)
}

fn check_phi_off_roots(angles: &[f64], phi: f64) -> Result<()> {
    if angles.iter().any(|&a| log_chord_angle(phi, a) < (1e-12f64).ln()) {
        return Err(Error::Domain("φ lies on a root phase".into()));
    }
    Ok(())
}

/// `T_{N,ε}(φ)`: the boundary bracket of `W_{N,φ} g` on `[ε, 2π - ε]`
/// minus `∫ W_{N,φ} g'`. The step-function part of the integral is exact;
/// the `ψ/2π` part is integrated numerically.
pub fn t_n_eps(angles: &[f64], phi: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    check_phi_off_roots(angles, phi)?;
    let ep = EmpiricalProcess::new(angles, phi);
    let n = angles.len() as f64;
    let (a, b) = (eps, TAU - eps);
    let ga = log_kernel(a);
    let bracket = ep.eval(b) * ga - ep.eval(a) * ga;
    // ∫_a^b F cot(ψ/2) dψ with F piecewise constant: Σ F_i (g(x_{i+1}) - g(x_i))
    let mut knots = vec![a];
    knots.extend(ep.jumps().iter().copied().filter(|&u| u > a && u < b));
    knots.push(b);
    let mut f_terms = Vec::with_capacity(knots.len());
    for w in knots.windows(2) {
        let f = ep.cdf(w[0]);
        if f != 0.0 {
            f_terms.push(f * (log_kernel(w[1]) - log_kernel(w[0])));
        }
    }
    let f_int = compensated_sum(f_terms);
    let lin_int = integrate(|x| x / TAU * cot_kernel(x), a, b, QUAD_TOL)?;
    Ok(bracket - n.sqrt() * (f_int - lin_int))
}

/// `Z_{N,ε}(φ) = (1/√N) Σ_{|θ_q - φ| ≤ ε} g(φ - θ_q) - √N μ_ε`.
pub fn z_n_eps(angles: &[f64], phi: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    check_phi_off_roots(angles, phi)?;
    let n = angles.len() as f64;
    let near = angles.iter().filter_map(|&a| {
        // same reduction and boundary convention as the step table in t_n_eps
        let u = (a - phi).rem_euclid(TAU);
        (u <= eps || u > TAU - eps).then(|| log_kernel(u))
    });
    Ok(compensated_sum(near) / n.sqrt() - n.sqrt() * mu_eps(eps)?)
}
