//! Exact inverse of a square Vandermonde matrix and the functionals built
//! on its rows.
//!
//! Row `m` of the inverse holds the coefficients of the Lagrange polynomial
//! `∏_{j≠m}(z - x_j) / ∏_{j≠m}(x_m - x_j)`. The numerators are expanded
//! directly for every `m`; the denominators are kept as a log-magnitude and
//! a phase so that clustered nodes do not overflow before the entries are
//! formed.

use num_complex::Complex64;

use crate::ensemble::{build_vandermonde, sample_phases, Density, PhaseVector};
use crate::linalg::{distance_to_column_span, inverse, ComplexMatrix};
use crate::par::Execution;
use crate::seed::SeedSpec;
use crate::stats::compensated_sum;
use crate::{Error, Result};

/// Elementary symmetric polynomials of all nodes except one.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricFunctions {
    /// Excluded node (0-based).
    pub excluded: usize,
    /// `σ_0 … σ_{N-1}`.
    pub coeffs: Vec<Complex64>,
}

impl SymmetricFunctions {
    /// `Σ_r (-1)^r σ_r z^{N-1-r}`, which equals `∏_{j≠m}(z - x_j)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, s) in self.coeffs.iter().enumerate() {
            let term = if r % 2 == 0 { *s } else { -*s };
            acc = acc * z + term;
        }
        acc
    }

    pub fn abs_sum(&self) -> f64 {
        compensated_sum(self.coeffs.iter().map(|c| c.norm()))
    }
}

/// `σ^m_r(x)` for `r = 0..N-1`, expanding `∏_{j≠m}(1 + x_j t)`.
pub fn elem_sym_excluding(x: &[Complex64], m: usize) -> Result<SymmetricFunctions> {
    if m >= x.len() {
        return Err(Error::IndexOutOfRange { value: m, bound: x.len() });
    }
    let mut s = vec![Complex64::new(0.0, 0.0); x.len()];
    s[0] = Complex64::new(1.0, 0.0);
    let mut deg = 0;
    for (j, &xj) in x.iter().enumerate() {
        if j == m {
            continue;
        }
        deg += 1;
        for r in (1..=deg).rev() {
            let prev = s[r - 1];
            s[r] += xj * prev;
        }
    }
    Ok(SymmetricFunctions { excluded: m, coeffs: s })
}

/// `∏_{j≠m}(x_m - x_j)` as `(log |·|, arg)`.
fn log_denominator(x: &[Complex64], m: usize) -> Result<(f64, f64)> {
    let mut logs = Vec::with_capacity(x.len());
    let mut arg = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        if j == m {
            continue;
        }
        let d = x[m] - xj;
        if d.norm() == 0.0 {
            return Err(Error::Singular(format!("nodes {m} and {j} coincide")));
        }
        logs.push(d.norm().ln());
        arg += d.arg();
    }
    Ok((compensated_sum(logs), arg))
}

/// Inverse of the un-normalized Vandermonde matrix `V(k,q) = x_q^k`.
#[derive(Debug, Clone)]
pub struct InverseMatrix {
    entries: ComplexMatrix,
    log_denominators: Vec<f64>,
    symmetric: Vec<SymmetricFunctions>,
}

impl InverseMatrix {
    pub fn order(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    /// `log ∏_{j≠m}|x_m - x_j|` per row.
    pub fn log_denominators(&self) -> &[f64] {
        &self.log_denominators
    }

    pub fn symmetric_functions(&self) -> &[SymmetricFunctions] {
        &self.symmetric
    }

    /// Inverse of the normalized matrix `V/√N`, i.e. `√N·M`.
    pub fn normalized(&self) -> ComplexMatrix {
        let n = self.order() as f64;
        self.entries.scale(n.sqrt())
    }
}

/// `M(m,n) = (-1)^{N-n} σ^m_{N-n} / ∏_{j≠m}(x_m - x_j)` (1-based `n`).
pub fn vandermonde_inverse(x: &[Complex64]) -> Result<InverseMatrix> {
    let n = x.len();
    if n == 0 {
        return Err(Error::Domain("empty node set".into()));
    }
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    let mut log_denominators = Vec::with_capacity(n);
    let mut symmetric = Vec::with_capacity(n);
    for m in 0..n {
        let sym = elem_sym_excluding(x, m)?;
        let (logmag, arg) = log_denominator(x, m)?;
        let rot = Complex64::from_polar(1.0, -arg);
        for col in 0..n {
            let r = n - 1 - col;
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let s = sym.coeffs[r];
            data[m * n + col] = if logmag.abs() < 300.0 {
                s * rot * (sign * (-logmag).exp())
            } else if s.norm() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::from_polar(sign * (s.norm().ln() - logmag).exp(), s.arg() - arg)
            };
        }
        log_denominators.push(logmag);
        symmetric.push(sym);
    }
    Ok(InverseMatrix { entries: ComplexMatrix::from_rows(n, n, data)?, log_denominators, symmetric })
}

/// `β_p = Σ_q |M(p,q)|` by direct summation over the entries.
pub fn row_abs_sums(m: &ComplexMatrix) -> Vec<f64> {
    (0..m.rows())
        .map(|p| compensated_sum(m.row(p).iter().map(|z| z.norm())))
        .collect()
}

/// `β_p = √N (Σ_r |σ^p_r|) / ∏_{q≠p}|z_p - z_q|` from the symmetric
/// functions, without forming the inverse.
pub fn beta_closed_form(x: &[Complex64]) -> Result<Vec<f64>> {
    let n = x.len();
    (0..n)
        .map(|p| {
            let sym = elem_sym_excluding(x, p)?;
            let (logmag, _) = log_denominator(x, p)?;
            Ok((0.5 * (n as f64).ln() + sym.abs_sum().ln() - logmag).exp())
        })
        .collect()
}

/// Both sides of `Tr(M*M) = Σ_i dist(X_i, span{X_j : j≠i})^{-2}` for an
/// invertible square `V` with columns `X_i`.
pub fn distance_identity_check(v: &ComplexMatrix) -> Result<(f64, f64)> {
    if !v.is_square() {
        return Err(Error::Shape("distance identity needs a square matrix".into()));
    }
    let n = v.rows();
    let m = inverse(v)?;
    let lhs = compensated_sum(m.as_slice().iter().map(|z| z.norm_sqr()));
    let mut terms = Vec::with_capacity(n);
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let d = distance_to_column_span(v, &others, &v.column(i))?;
        if d == 0.0 {
            return Err(Error::Singular(format!("column {i} lies in the span of the others")));
        }
        terms.push(d.powi(-2));
    }
    Ok((lhs, compensated_sum(terms)))
}

/// Per-trial values of `tr_N((V*V)^{-1})` and their running means.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseMomentProbe {
    pub values: Vec<f64>,
    pub running_mean: Vec<f64>,
}

/// `tr_N((V*V)^{-1}) = ‖V^{-1}‖_F² / N` for the normalized square matrix.
pub fn inverse_trace(phases: &PhaseVector) -> Result<f64> {
    let n = phases.len();
    let inv = vandermonde_inverse(&phases.nodes()?)?.normalized();
    Ok(compensated_sum(inv.as_slice().iter().map(|z| z.norm_sqr())) / n as f64)
}

/// Heavy-tail probe for the inverse moments: no convergence is claimed.
pub fn inverse_moment_probe(n: usize, trials: usize, seed: u64, exec: Execution) -> Result<InverseMomentProbe> {
    if n < 2 {
        return Err(Error::Domain("inverse moment probe needs N >= 2".into()));
    }
    let values = exec.try_map(trials, |t| {
        let phases = sample_phases(n, 1, &Density::Uniform, SeedSpec::for_experiment(seed, "inverse-probe", t as u64))?;
        inverse_trace(&phases)
    })?;
    let mut running_mean = Vec::with_capacity(trials);
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        acc += v;
        running_mean.push(acc / (i + 1) as f64);
    }
    Ok(InverseMomentProbe { values, running_mean })
}

/// Residual `max |(MV - I)_{ij}|` of an inverse against the normalized
/// matrix on the same phases.
pub fn inverse_residual(phases: &PhaseVector) -> Result<f64> {
    let n = phases.len();
    let v = build_vandermonde(phases, n)?;
    let m = vandermonde_inverse(&phases.nodes()?)?.normalized();
    Ok(m.matmul(&v)?.max_abs_diff(&ComplexMatrix::identity(n)))
}
