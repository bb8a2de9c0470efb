//! Hermitian spectra, Gram identities and elementary eigenvalue bounds.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::ensemble::{dirichlet_kernel_turns, PhaseVector};
use crate::linalg::{ComplexMatrix, HermitianMatrix, SymmetricMatrix};
use crate::seed::SeedSpec;
use crate::stats::compensated_sum;
use crate::{Error, Result};

/// Default relative off-diagonal tolerance of the Jacobi solvers.
pub const JACOBI_TOL: f64 = 1e-12;

/// Sweep limit of the Jacobi solvers.
pub const MAX_SWEEPS: usize = 30;

/// Ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest eigenvalue; `NaN` when empty.
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    /// Largest eigenvalue; `NaN` when empty.
    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    /// Number of eigenvalues `<= threshold`.
    pub fn count_below(&self, threshold: f64) -> usize {
        self.values.partition_point(|&v| v <= threshold)
    }
}

/// Eigenvalues with their unitary eigenvector matrix (columns).
#[derive(Debug, Clone)]
pub struct Eigen {
    pub spectrum: Spectrum,
    pub vectors: ComplexMatrix,
}

/// `V*V`.
pub fn gram(v: &ComplexMatrix) -> HermitianMatrix {
    let (n, l) = (v.rows(), v.cols());
    let data = v.as_slice();
    HermitianMatrix::from_upper(l, |a, b| {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n {
            s += data[k * l + a].conj() * data[k * l + b];
        }
        s
    })
}

/// `VV*`.
pub fn outer_gram(v: &ComplexMatrix) -> HermitianMatrix {
    HermitianMatrix::from_upper(v.rows(), |a, b| {
        v.row(a).iter().zip(v.row(b)).map(|(x, y)| x * y.conj()).sum()
    })
}

fn off_norm_sq(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += 2.0 * a[i * n + j].norm_sqr();
        }
    }
    s
}

/// Cyclic Jacobi on a complex Hermitian matrix; eigenvalues only.
pub fn eig_hermitian(h: &HermitianMatrix, tol: f64) -> Result<Spectrum> {
    jacobi_hermitian(h, tol, false).map(|(s, _)| s)
}

/// Cyclic Jacobi with accumulated eigenvectors.
pub fn eig_hermitian_vectors(h: &HermitianMatrix, tol: f64) -> Result<Eigen> {
    let (spectrum, vectors) = jacobi_hermitian(h, tol, true)?;
    Ok(Eigen { spectrum, vectors: vectors.expect("vectors requested") })
}

fn jacobi_hermitian(h: &HermitianMatrix, tol: f64, want_vectors: bool) -> Result<(Spectrum, Option<ComplexMatrix>)> {
    let n = h.order();
    let mut a = h.data().to_vec();
    let mut q = want_vectors.then(|| ComplexMatrix::identity(n));
    let target = tol * h.frobenius_norm();
    let mut sweeps = 0;
    loop {
        let off = off_norm_sq(&a, n).sqrt();
        if off <= target || n < 2 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Convergence { sweeps, residual: off });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apq = a[p * n + r];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[p * n + p].re, a[r * n + r].re);
                let phase = apq / mag; // e^{iα}
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau == 0.0 { 1.0 } else { tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s], [-s e^{-iα}, c e^{-iα}]] acting on columns p, r
                let em = phase.conj();
                let (gpp, gpr, grp, grr) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0), -em * s, em * c);
                for k in 0..n {
                    let (x, y) = (a[k * n + p], a[k * n + r]);
                    a[k * n + p] = x * gpp + y * grp;
                    a[k * n + r] = x * gpr + y * grr;
                }
                for k in 0..n {
                    let (x, y) = (a[p * n + k], a[r * n + k]);
                    a[p * n + k] = gpp.conj() * x + grp.conj() * y;
                    a[r * n + k] = gpr.conj() * x + grr.conj() * y;
                }
                a[p * n + r] = Complex64::new(0.0, 0.0);
                a[r * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[r * n + r].im = 0.0;
                if let Some(q) = q.as_mut() {
                    for k in 0..n {
                        let (x, y) = (q[(k, p)], q[(k, r)]);
                        q[(k, p)] = x * gpp + y * grp;
                        q[(k, r)] = x * gpr + y * grr;
                    }
                }
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    match q {
        None => Ok((Spectrum::new(diag), None)),
        Some(q) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
            let vectors = ComplexMatrix::from_fn(n, n, |i, j| q[(i, order[j])]);
            Ok((Spectrum::new(diag), Some(vectors)))
        }
    }
}

/// Cyclic Jacobi on a real symmetric matrix.
pub fn eig_symmetric(m: &SymmetricMatrix, tol: f64) -> Result<Spectrum> {
    let n = m.order();
    let mut a = m.data().to_vec();
    let target = tol * a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        let off = off.sqrt();
        if off <= target || n < 2 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Convergence { sweeps, residual: off });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for r in p + 1..n {
                let apq = a[p * n + r];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[r * n + r] - a[p * n + p]) / (2.0 * apq);
                let t = if tau == 0.0 { 1.0 } else { tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (a[k * n + p], a[k * n + r]);
                    a[k * n + p] = c * x - s * y;
                    a[k * n + r] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (a[p * n + k], a[r * n + k]);
                    a[p * n + k] = c * x - s * y;
                    a[r * n + k] = s * x + c * y;
                }
                a[p * n + r] = 0.0;
                a[r * n + p] = 0.0;
            }
        }
    }
    Ok(Spectrum::new((0..n).map(|i| a[i * n + i]).collect()))
}

/// Singular values `√λ_i(V*V)`, ascending; tiny negative rounding is clamped.
pub fn singular_values(v: &ComplexMatrix) -> Result<Spectrum> {
    let s = eig_hermitian(&gram(v), JACOBI_TOL)?;
    Ok(Spectrum::new(s.values().iter().map(|&x| x.max(0.0).sqrt()).collect()))
}

/// `log det(V*V)` with a flag for coincident nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub value: f64,
    pub degenerate: bool,
}

fn require_square_1d(phases: &PhaseVector, n: usize) -> Result<()> {
    if phases.dim() != 1 || phases.len() != n {
        return Err(Error::Shape(format!(
            "expected N={n} one-dimensional phases, got L={}, d={}",
            phases.len(),
            phases.dim()
        )));
    }
    Ok(())
}

/// `log|e^{2πia} - e^{2πib}| = log|2 sin(π(a-b))|` for phases in turns.
pub fn log_chord(a: f64, b: f64) -> f64 {
    let d = a - b;
    let d = d - d.round();
    (2.0 * (PI * d).sin().abs()).ln()
}

/// `log det(V*V) = Σ_{p<q} 2 log|z_p - z_q| - N log N` for the square
/// classical matrix, summed in the log domain.
pub fn logdet_gram(phases: &PhaseVector, n: usize) -> Result<LogDet> {
    require_square_1d(phases, n)?;
    let th = phases.values();
    let mut terms = Vec::with_capacity(n * n.saturating_sub(1) / 2 + 1);
    for p in 0..n {
        for q in p + 1..n {
            let l = log_chord(th[p], th[q]);
            if l == f64::NEG_INFINITY {
                return Ok(LogDet { value: f64::NEG_INFINITY, degenerate: true });
            }
            terms.push(2.0 * l);
        }
    }
    terms.push(-(n as f64) * (n as f64).ln());
    Ok(LogDet { value: compensated_sum(terms), degenerate: false })
}

/// `tr_N log(V*V) = log det(V*V) / N`.
pub fn trace_log(phases: &PhaseVector, n: usize) -> Result<LogDet> {
    let ld = logdet_gram(phases, n)?;
    Ok(LogDet { value: ld.value / n as f64, ..ld })
}

/// `min_{k≠ℓ} (1 - |D_N(2π(θ_k - θ_ℓ))|)`, an upper bound on `λ_1` from the
/// 2×2 principal minors.
pub fn min_eig_2x2_bound(phases: &PhaseVector, n: usize) -> Result<f64> {
    if phases.dim() != 1 || phases.len() < 2 {
        return Err(Error::Shape("2x2 bound needs at least two one-dimensional phases".into()));
    }
    let th = phases.values();
    let mut best = f64::INFINITY;
    for k in 0..th.len() {
        for l in k + 1..th.len() {
            best = best.min(1.0 - dirichlet_kernel_turns(th[k] - th[l], n).abs());
        }
    }
    Ok(best.max(0.0))
}

/// Smallest circular distance between any two phases (in turns).
pub fn min_circular_spacing(theta: &[f64]) -> f64 {
    let mut s = theta.to_vec();
    s.sort_by(f64::total_cmp);
    if s.len() < 2 {
        return 1.0;
    }
    let mut best = 1.0 - (s[s.len() - 1] - s[0]);
    for w in s.windows(2) {
        best = best.min(w[1] - w[0]);
    }
    best
}

/// Probability that the minimum circular spacing of `N` uniform phases
/// exceeds `δ`: `(1 - Nδ)_+^{N-1}`.
pub fn min_spacing_exact(n: usize, delta: f64) -> f64 {
    let base = (1.0 - n as f64 * delta).max(0.0);
    base.powi(n as i32 - 1)
}

/// Monte Carlo frequency of `{min spacing > δ}` alongside the exact value.
pub fn min_spacing_cdf_check(n: usize, delta: f64, trials: usize, seed: u64) -> Result<(f64, f64)> {
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::Domain("spacing threshold must be nonnegative".into()));
    }
    if n < 1 || trials == 0 {
        return Err(Error::Domain("need N >= 1 and at least one trial".into()));
    }
    let hits = (0..trials)
        .filter(|&t| {
            let mut rng = SeedSpec::new(seed, t as u64).rng();
            let th: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            min_circular_spacing(&th) > delta
        })
        .count();
    Ok((hits as f64 / trials as f64, min_spacing_exact(n, delta)))
}

/// Maximum absolute column sum and spectral norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixNorms {
    pub colsum: f64,
    pub op: f64,
}

pub fn matrix_norms(m: &ComplexMatrix) -> Result<MatrixNorms> {
    if !m.is_square() {
        return Err(Error::Shape("matrix norms are defined here for square matrices".into()));
    }
    let n = m.rows();
    let colsum = (0..n)
        .map(|j| (0..n).map(|k| m[(k, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let op = eig_hermitian(&gram(m), JACOBI_TOL)?.max().max(0.0).sqrt();
    Ok(MatrixNorms { colsum, op })
}
