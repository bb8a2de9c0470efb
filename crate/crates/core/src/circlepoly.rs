//! Polynomials whose roots lie on the unit circle.
//!
//! Everything is evaluated through `log|e^{iφ} - e^{iφ_q}| = log|2 sin((φ-φ_q)/2)|`
//! so that products over hundreds of roots never leave the representable
//! range.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::ensemble::{sample_phases, Density, PhaseVector};
use crate::inverse::elem_sym_excluding;
use crate::par::Execution;
use crate::seed::SeedSpec;
use crate::stats::{compensated_sum, mean};
use crate::{Error, Result};

/// Differences closer than this to a root are treated as hitting it.
const ROOT_HIT: f64 = 1e-15;

/// Number of local grid maxima refined by golden-section search.
const REFINE_CANDIDATES: usize = 8;

/// `log(cos(π/8)/sin(π/8)) = log(1 + √2)`.
pub fn gamma_constant() -> f64 {
    ((PI / 8.0).cos() / (PI / 8.0).sin()).ln()
}

/// `log|e^{ia} - e^{ib}|`, `-inf` when the angles coincide.
pub fn log_chord_angle(a: f64, b: f64) -> f64 {
    let d = a - b;
    let d = d - TAU * (d / TAU).round();
    if d.abs() < ROOT_HIT {
        return f64::NEG_INFINITY;
    }
    (2.0 * (0.5 * d).sin().abs()).ln()
}

/// `P(z) = ∏_k (z - e^{iφ_k})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePolynomial {
    angles: Vec<f64>,
}

impl CirclePolynomial {
    /// Roots given by their angles (any real values; reduced mod 2π).
    pub fn from_angles(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() || angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("need at least one finite root angle".into()));
        }
        Ok(Self { angles: angles.into_iter().map(|a| a.rem_euclid(TAU)).collect() })
    }

    /// Roots `e^{2πiθ_q}` of a one-dimensional phase vector.
    pub fn from_phases(phases: &PhaseVector) -> Result<Self> {
        Self::from_angles(phases.angles()?)
    }

    /// Roots given as unit complex numbers.
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        if roots.iter().any(|z| (z.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Domain("roots must have unit modulus".into()));
        }
        Self::from_angles(roots.iter().map(|z| z.arg()).collect())
    }

    pub fn degree(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn roots(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&a| Complex64::from_polar(1.0, a)).collect()
    }

    /// `log|P(e^{iφ})|`.
    pub fn log_abs(&self, phi: f64) -> f64 {
        self.log_abs_excluding(phi, None)
    }

    /// `log|∏_{q≠p}(e^{iφ} - z_q)|`.
    pub fn log_abs_excluding(&self, phi: f64, p: Option<usize>) -> f64 {
        let mut terms = Vec::with_capacity(self.angles.len());
        for (q, &a) in self.angles.iter().enumerate() {
            if Some(q) == p {
                continue;
            }
            let l = log_chord_angle(phi, a);
            if l == f64::NEG_INFINITY {
                return l;
            }
            terms.push(l);
        }
        compensated_sum(terms)
    }

    /// `log ∏_{q≠p}|z_p - z_q|`; `-inf` for a repeated root.
    pub fn log_deleted_product(&self, p: usize) -> f64 {
        self.log_abs_excluding(self.angles[p], Some(p))
    }

    /// Monomial coefficients `a_0 … a_N` of `P(z) = Σ a_r z^r`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let mut nodes = self.roots();
        nodes.push(Complex64::new(0.0, 0.0));
        let last = nodes.len() - 1;
        let sym = elem_sym_excluding(&nodes, last).expect("index in range");
        // P(z) = Σ_r (-1)^r σ_r z^{N-r}
        let n = self.degree();
        let mut a = vec![Complex64::new(0.0, 0.0); n + 1];
        for (r, s) in sym.coeffs.iter().enumerate() {
            a[n - r] = if r % 2 == 0 { *s } else { -*s };
        }
        a
    }
}

/// `log|P(e^{iφ})|`.
pub fn log_abs_poly(p: &CirclePolynomial, phi: f64) -> f64 {
    p.log_abs(phi)
}

/// `T_N(φ) = (1/√N) log|P(e^{iφ})|²` for roots at the phases.
pub fn t_n_functional(p: &CirclePolynomial, phi: f64) -> f64 {
    2.0 * p.log_abs(phi) / (p.degree() as f64).sqrt()
}

/// Location and value of a maximum on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleMax {
    pub phi: f64,
    pub value: f64,
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd { (c, fc) } else { (d, fd) }
}

/// Maximize a 2π-periodic function: uniform grid, then golden-section
/// refinement around the best local grid maxima. The returned value is never
/// below the best grid value.
pub fn maximize_periodic<F: Fn(f64) -> f64>(f: F, grid: usize, tol: f64) -> CircleMax {
    let grid = grid.max(3);
    let h = TAU / grid as f64;
    let vals: Vec<f64> = (0..grid).map(|j| f(j as f64 * h)).collect();
    let mut peaks: Vec<usize> = (0..grid)
        .filter(|&j| {
            let prev = vals[(j + grid - 1) % grid];
            let next = vals[(j + 1) % grid];
            vals[j] >= prev && vals[j] >= next
        })
        .collect();
    peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    peaks.truncate(REFINE_CANDIDATES);
    let mut best = peaks
        .first()
        .map(|&j| CircleMax { phi: j as f64 * h, value: vals[j] })
        .unwrap_or(CircleMax { phi: 0.0, value: vals[0] });
    for &j in &peaks {
        let c = j as f64 * h;
        let (x, fx) = golden_max(&f, c - h, c + h, tol);
        if fx > best.value {
            best = CircleMax { phi: x.rem_euclid(TAU), value: fx };
        }
    }
    best
}

/// `max_{|z|=1} log|P(z)|`; the grid is raised to at least `8N` points.
pub fn max_on_circle(p: &CirclePolynomial, grid: usize, tol: f64) -> CircleMax {
    maximize_periodic(|phi| p.log_abs(phi), grid.max(8 * p.degree()), tol)
}

/// Default grid density (points per root) for circle maxima.
pub const MAX_GRID_PER_ROOT: usize = 16;

/// Default golden-section tolerance (radians).
pub const MAX_TOL: f64 = 1e-10;

/// `log max_{|z|=1} |T_p(z)|` with `T_p(z) = ∏_{q≠p}(z - z_q) / ∏_{q≠p}|z_p - z_q|`.
pub fn t_p_max(p: &CirclePolynomial, idx: usize, grid: usize, tol: f64) -> Result<f64> {
    if idx >= p.degree() {
        return Err(Error::IndexOutOfRange { value: idx, bound: p.degree() });
    }
    let denom = p.log_deleted_product(idx);
    if denom == f64::NEG_INFINITY {
        return Err(Error::Singular(format!("root {idx} is repeated")));
    }
    let m = maximize_periodic(|phi| p.log_abs_excluding(phi, Some(idx)), grid.max(8 * p.degree()), tol);
    Ok(m.value - denom)
}

/// Index minimizing `∏_{q≠p}|z_p - z_q|`, with the log of that product.
pub fn hadamard_index(p: &CirclePolynomial) -> (usize, f64) {
    (0..p.degree())
        .map(|i| (i, p.log_deleted_product(i)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Log-domain bounds on `λ_1` of the normalized square matrix with these
/// roots as nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambda1Sandwich {
    /// `log(1 / (N³ max_p max|T_p|²))`.
    pub log_lower: f64,
    /// `log(1 / max_p max|T_p|²)`.
    pub log_upper: f64,
    /// `log(4N² / max|P|²)`.
    pub log_upper_4n2: f64,
}

impl Lambda1Sandwich {
    pub fn log_best_upper(&self) -> f64 {
        self.log_upper.min(self.log_upper_4n2)
    }
}

pub fn lambda1_sandwich(p: &CirclePolynomial, grid: usize, tol: f64) -> Result<Lambda1Sandwich> {
    let n = p.degree() as f64;
    let mut tmax = f64::NEG_INFINITY;
    for idx in 0..p.degree() {
        tmax = tmax.max(t_p_max(p, idx, grid, tol)?);
    }
    let pmax = max_on_circle(p, grid, tol).value;
    Ok(Lambda1Sandwich {
        log_lower: -3.0 * n.ln() - 2.0 * tmax,
        log_upper: -2.0 * tmax,
        log_upper_4n2: 4f64.ln() + 2.0 * n.ln() - 2.0 * pmax,
    })
}

/// Diametric root pairs `(z_i, -z_i)` with a sign vector choosing
/// `P_v(z) = ∏_i (z - v_i z_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedRoots {
    angles: Vec<f64>,
    signs: Vec<i8>,
}

impl PairedRoots {
    /// Pairs from the angles of `z_i`; all signs start at `+1`.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() || angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("need at least one finite pair angle".into()));
        }
        let n = angles.len();
        Ok(Self { angles: angles.into_iter().map(|a| a.rem_euclid(TAU)).collect(), signs: vec![1; n] })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn set_signs(&mut self, signs: &[i8]) -> Result<()> {
        if signs.len() != self.len() || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Shape("sign vector must have one ±1 per pair".into()));
        }
        self.signs = signs.to_vec();
        Ok(())
    }

    /// Replace `z_i` by `-z_i`, which leaves the pair set unchanged.
    pub fn flip_root(&mut self, i: usize) {
        self.angles[i] = (self.angles[i] + PI).rem_euclid(TAU);
    }

    /// The pair as `(z_i, -z_i)`.
    pub fn pair(&self, i: usize) -> (Complex64, Complex64) {
        let z = Complex64::from_polar(1.0, self.angles[i]);
        (z, -z)
    }

    /// `P_v` for the current sign vector.
    pub fn polynomial(&self) -> CirclePolynomial {
        let roots = self
            .angles
            .iter()
            .zip(&self.signs)
            .map(|(&a, &s)| if s > 0 { a } else { a + PI })
            .collect();
        CirclePolynomial::from_angles(roots).expect("finite angles")
    }

    /// `Ψ(φ) = log|P(e^{iφ})| + log|P(-e^{iφ})| = Σ_i log|e^{2iφ} - z_i²|`.
    pub fn psi(&self, phi: f64) -> f64 {
        let mut terms = Vec::with_capacity(self.len());
        for &a in &self.angles {
            let l = log_chord_angle(2.0 * phi, 2.0 * a);
            if l == f64::NEG_INFINITY {
                return l;
            }
            terms.push(l);
        }
        compensated_sum(terms)
    }
}

/// A point `w = e^{iφ}` with `|P(w)P(-w)| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalancedPoint {
    pub phi: f64,
    pub psi: f64,
}

impl BalancedPoint {
    pub fn w(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phi)
    }
}

/// Grid density (points per pair) of the sign-change scan.
pub const BALANCE_GRID_PER_ROOT: usize = 64;

fn scan_sign_change(pairs: &PairedRoots, grid: usize) -> Option<(f64, f64)> {
    // Ψ is π-periodic, so [0, π) suffices.
    let h = PI / grid as f64;
    let mut prev = pairs.psi(0.0);
    for j in 1..=grid {
        let x = j as f64 * h;
        let cur = pairs.psi(x);
        if (prev < 0.0) != (cur < 0.0) || cur == 0.0 {
            return Some((x - h, x));
        }
        prev = cur;
    }
    None
}

/// Sign-change scan of `Ψ` followed by bisection to `|Ψ| ≤ 1e-10`.
pub fn find_balanced_point(pairs: &PairedRoots) -> Result<BalancedPoint> {
    let grid = BALANCE_GRID_PER_ROOT * pairs.len().max(1);
    let (mut a, mut b) = scan_sign_change(pairs, grid)
        .or_else(|| scan_sign_change(pairs, 4 * grid))
        .ok_or(Error::SearchFailure { grid: 4 * grid })?;
    let neg_a = pairs.psi(a) < 0.0;
    let mut best = BalancedPoint { phi: b, psi: pairs.psi(b) };
    for _ in 0..200 {
        if best.psi.abs() <= 1e-10 {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let v = pairs.psi(m);
        if v.abs() < best.psi.abs() {
            best = BalancedPoint { phi: m, psi: v };
        }
        if (v < 0.0) == neg_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(best)
}

/// The two equivalent forms of the sign-flip variable at `w = e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignFlip {
    /// `Σ_i v_i log(α_i/β_i)` with `α_i = |w - z_i|`, `β_i = |w + z_i|`.
    pub sum_form: f64,
    /// `log|P_v(w)|²`.
    pub poly_form: f64,
}

pub fn sign_flip_sample(pairs: &PairedRoots, w_phi: f64, signs: &[i8]) -> Result<SignFlip> {
    if signs.len() != pairs.len() {
        return Err(Error::Shape("sign vector must have one entry per pair".into()));
    }
    let mut terms = Vec::with_capacity(pairs.len());
    for (&a, &v) in pairs.angles.iter().zip(signs) {
        let alpha = log_chord_angle(w_phi, a);
        let beta = log_chord_angle(w_phi, a + PI);
        terms.push(f64::from(v) * (alpha - beta));
    }
    let mut flipped = pairs.clone();
    flipped.set_signs(signs)?;
    Ok(SignFlip { sum_form: compensated_sum(terms), poly_form: 2.0 * flipped.polynomial().log_abs(w_phi) })
}

/// `C(n, k)` exactly; `n ≤ 127` keeps every value inside `u128`.
pub fn binomial_u128(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    binomial_row(n)[k as usize]
}

/// Row `n` of Pascal's triangle, built by additions only.
pub fn binomial_row(n: u32) -> Vec<u128> {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(1);
        next.extend(row.windows(2).map(|w| w[0] + w[1]));
        next.push(1);
        row = next;
    }
    row
}

/// Numerator over `2^n` of the Littlewood-Offord maximum for unit steps:
/// the sum of the `s = ⌊Δ⌋ + 1` largest binomial coefficients `C(n, ·)`.
pub fn lo_exact_numerator(n: u32, delta: f64) -> Result<u128> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Domain("radius must be a nonnegative finite number".into()));
    }
    // a window of width 2Δ holds at most s = ⌊Δ⌋ + 1 of the n + 1 sums
    let s = (delta.floor() as u64 + 1).min(u64::from(n) + 1);
    if n > 127 {
        return Err(Error::Domain("exact evaluation supports n <= 127".into()));
    }
    // The s largest coefficients are the s most central ones.
    let row = binomial_row(n);
    let mut ks: Vec<u32> = (0..=n).collect();
    ks.sort_by_key(|&k| (2 * i64::from(k) - i64::from(n)).abs());
    Ok(ks.iter().take(s as usize).map(|&k| row[k as usize]).sum())
}

/// `p_1(n, Δ) = 2^{-n} Σ_{j=1}^s C(n, m_j)`.
pub fn lo_exact(n: u32, delta: f64) -> Result<f64> {
    Ok(lo_exact_numerator(n, delta)? as f64 * 2f64.powi(-(n as i32)))
}

/// Summary of the random-polynomial maximum experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RandPolyResult {
    /// `2 log max|P|` per trial.
    pub values: Vec<f64>,
    pub mean: f64,
    /// `γ√π ε√N/2`.
    pub threshold_randpoly: f64,
    /// `√(γπ) ε√N/2`.
    pub threshold_main_comb: f64,
    pub freq_randpoly: f64,
    pub freq_main_comb: f64,
}

pub fn randpoly_thresholds(n: usize, eps: f64) -> (f64, f64) {
    let g = gamma_constant();
    let base = eps * (n as f64).sqrt() / 2.0;
    (g * PI.sqrt() * base, (g * PI).sqrt() * base)
}

/// `2 log max|P|` for one trial of uniformly random roots.
pub fn two_log_max_trial(n: usize, seed: SeedSpec) -> Result<f64> {
    let phases = sample_phases(n, 1, &Density::Uniform, seed)?;
    let p = CirclePolynomial::from_phases(&phases)?;
    Ok(2.0 * max_on_circle(&p, MAX_GRID_PER_ROOT * n, MAX_TOL).value)
}

pub fn randpoly_experiment(n: usize, eps: f64, trials: usize, seed: u64, exec: Execution) -> Result<RandPolyResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain("ε must lie in (0, 1)".into()));
    }
    if n == 0 || trials == 0 {
        return Err(Error::Domain("need N >= 1 and at least one trial".into()));
    }
    let values = exec.try_map(trials, |t| two_log_max_trial(n, SeedSpec::for_experiment(seed, "randpoly", t as u64)))?;
    let (t1, t2) = randpoly_thresholds(n, eps);
    let freq = |t: f64| values.iter().filter(|&&v| v >= t).count() as f64 / trials as f64;
    Ok(RandPolyResult {
        mean: mean(&values)?,
        threshold_randpoly: t1,
        threshold_main_comb: t2,
        freq_randpoly: freq(t1),
        freq_main_comb: freq(t2),
        values,
    })
}
