//! Phase sampling and the three Vandermonde families.
//!
//! Phases are held as 256-bit binary fractions so that `k·θ mod 1` stays
//! accurate for very large exponents (the `k_p = 2^p` sequence needs the
//! bits of θ far below double precision). The `f64` view of each phase is
//! the truncation of that fraction.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{ComplexMatrix, SymmetricMatrix};
use crate::seed::SeedSpec;
use crate::{Error, Result};

/// Number of 64-bit words in a fixed-point phase.
pub const PHASE_WORDS: usize = 4;

/// Largest left shift that still leaves 64 significant bits of a phase.
pub const MAX_PHASE_SHIFT: usize = 64 * (PHASE_WORDS - 1);

/// Binary fraction in `[0, 1)`; word 0 holds the most significant bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FixedPhase(pub [u64; PHASE_WORDS]);

impl FixedPhase {
    /// Exact conversion of a double in `[0, 1)` (bits below 2^-256 dropped).
    pub fn from_f64(x: f64) -> Self {
        debug_assert!((0.0..1.0).contains(&x));
        let mut words = [0u64; PHASE_WORDS];
        if x <= 0.0 {
            return Self(words);
        }
        let bits = x.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let (mant, e) = if exp == 0 {
            (bits & ((1 << 52) - 1), -1074)
        } else {
            ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
        };
        // x = mant * 2^e; bit position of mantissa bit b (0 = lsb) below the
        // binary point is -(e + b).
        for b in 0..53 {
            if mant >> b & 1 == 1 {
                let pos = -(e + b as i64); // 1-based fraction bit
                if (1..=(64 * PHASE_WORDS) as i64).contains(&pos) {
                    let p = (pos - 1) as usize;
                    words[p / 64] |= 1u64 << (63 - p % 64);
                }
            }
        }
        Self(words)
    }

    /// Truncation to double precision; always `< 1`.
    pub fn to_f64(&self) -> f64 {
        let Some(k) = self.0.iter().position(|&w| w != 0) else {
            return 0.0;
        };
        let lo = self.0.get(k + 1).copied().unwrap_or(0);
        let x = (u128::from(self.0[k]) << 64) | u128::from(lo);
        let lz = x.leading_zeros() as i32;
        let m = ((x << lz) >> 75) as u64;
        m as f64 * 2f64.powi(75 - lz - 64 * (k as i32 + 2))
    }

    /// Fraction rounded to the nearest double, in turns; may equal 1.0.
    fn turns(&self) -> f64 {
        self.0[0] as f64 * 2f64.powi(-64) + self.0[1] as f64 * 2f64.powi(-128)
    }

    /// Fractional part of `k·self`.
    pub fn mul_frac(&self, k: u64) -> Self {
        let mut out = [0u64; PHASE_WORDS];
        let mut carry: u128 = 0;
        for i in (0..PHASE_WORDS).rev() {
            let prod = u128::from(self.0[i]) * u128::from(k) + carry;
            out[i] = prod as u64;
            carry = prod >> 64;
        }
        Self(out)
    }

    /// Fractional part of `2^shift · self`; low bits are zero-filled.
    pub fn shl_frac(&self, shift: usize) -> Result<Self> {
        if shift > MAX_PHASE_SHIFT {
            return Err(Error::PrecisionExhausted { exponent: shift });
        }
        let (w, b) = (shift / 64, shift % 64);
        let mut out = [0u64; PHASE_WORDS];
        for (i, o) in out.iter_mut().enumerate() {
            let hi = self.0.get(i + w).copied().unwrap_or(0);
            let lo = self.0.get(i + w + 1).copied().unwrap_or(0);
            *o = if b == 0 { hi } else { (hi << b) | (lo >> (64 - b)) };
        }
        Ok(Self(out))
    }

    /// `(self + other) mod 1`.
    pub fn add_frac(&self, other: &Self) -> Self {
        let mut out = [0u64; PHASE_WORDS];
        let mut carry = false;
        for i in (0..PHASE_WORDS).rev() {
            let (s1, c1) = self.0[i].overflowing_add(other.0[i]);
            let (s2, c2) = s1.overflowing_add(u64::from(carry));
            out[i] = s2;
            carry = c1 || c2;
        }
        Self(out)
    }

    /// `e^{2πi·self}`.
    pub fn unit(&self) -> Complex64 {
        let (s, c) = (2.0 * PI * self.turns()).sin_cos();
        Complex64::new(c, s)
    }
}

/// Monotone inverse-CDF table on `[0, 1]`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCdfTable {
    points: Vec<f64>,
}

impl InverseCdfTable {
    /// `points[i]` is `F^{-1}(i / (n-1))`.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidDensity("need at least two table points".into()));
        }
        if points.iter().any(|p| !p.is_finite() || !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidDensity("table values must lie in [0, 1]".into()));
        }
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidDensity("inverse CDF table is not monotone".into()));
        }
        Ok(Self { points })
    }

    pub fn eval(&self, u: f64) -> f64 {
        let n = self.points.len() - 1;
        let x = u.clamp(0.0, 1.0) * n as f64;
        let i = (x.floor() as usize).min(n - 1);
        let t = x - i as f64;
        self.points[i] + t * (self.points[i + 1] - self.points[i])
    }
}

/// Phase distribution.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Density {
    #[default]
    Uniform,
    InverseCdf(InverseCdfTable),
}

/// `L` phase tuples of dimension `d`, each coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    len: usize,
    dim: usize,
    fixed: Vec<FixedPhase>,
    values: Vec<f64>,
}

impl PhaseVector {
    /// Phases from explicit values, stored column by column (`d` coordinates
    /// per column).
    pub fn from_values(len: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if len == 0 || dim == 0 {
            return Err(Error::Domain("phase vector needs L >= 1 and d >= 1".into()));
        }
        if values.len() != len * dim {
            return Err(Error::Shape(format!("{} values for L={len}, d={dim}", values.len())));
        }
        if values.iter().any(|v| !(0.0..1.0).contains(v)) {
            return Err(Error::Domain("phases must lie in [0, 1)".into()));
        }
        let fixed = values.iter().map(|&v| FixedPhase::from_f64(v)).collect();
        Ok(Self { len, dim, fixed, values })
    }

    /// One-dimensional phases from explicit values.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::from_values(values.len(), 1, values.to_vec())
    }

    fn from_fixed(len: usize, dim: usize, fixed: Vec<FixedPhase>) -> Self {
        let values = fixed.iter().map(FixedPhase::to_f64).collect();
        Self { len, dim, fixed, values }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All coordinates, column-major by phase tuple.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Coordinates of tuple `q`.
    pub fn tuple(&self, q: usize) -> &[f64] {
        &self.values[q * self.dim..(q + 1) * self.dim]
    }

    pub fn fixed_tuple(&self, q: usize) -> &[FixedPhase] {
        &self.fixed[q * self.dim..(q + 1) * self.dim]
    }

    /// Unit-circle nodes `e^{2πiθ_q}` of a one-dimensional phase vector.
    pub fn nodes(&self) -> Result<Vec<Complex64>> {
        self.require_dim(1)?;
        Ok(self.fixed.iter().map(FixedPhase::unit).collect())
    }

    /// Phases as angles `2πθ_q` in `[0, 2π)`.
    pub fn angles(&self) -> Result<Vec<f64>> {
        self.require_dim(1)?;
        Ok(self.values.iter().map(|&t| 2.0 * PI * t).collect())
    }

    fn require_dim(&self, d: usize) -> Result<()> {
        if self.dim != d {
            return Err(Error::Shape(format!("expected {d}-dimensional phases, got d={}", self.dim)));
        }
        Ok(())
    }
}

/// Draw `L·d` i.i.d. phase coordinates.
pub fn sample_phases(len: usize, dim: usize, density: &Density, seed: SeedSpec) -> Result<PhaseVector> {
    if len == 0 || dim == 0 {
        return Err(Error::Domain("phase vector needs L >= 1 and d >= 1".into()));
    }
    let mut rng = seed.rng();
    Ok(sample_phases_with(len, dim, density, &mut rng))
}

/// Same as [`sample_phases`] but drawing from a caller-owned generator.
pub fn sample_phases_with<R: Rng + ?Sized>(len: usize, dim: usize, density: &Density, rng: &mut R) -> PhaseVector {
    let fixed = (0..len * dim)
        .map(|_| match density {
            Density::Uniform => FixedPhase(std::array::from_fn(|_| rng.random())),
            Density::InverseCdf(table) => {
                let u: f64 = rng.random();
                let x = table.eval(u).min(1.0 - f64::EPSILON / 2.0);
                let mut words = FixedPhase::from_f64(x).0;
                // refine below the double's resolution with fresh bits
                for w in words.iter_mut().skip(1) {
                    *w |= rng.random::<u64>();
                }
                FixedPhase(words)
            }
        })
        .collect();
    PhaseVector::from_fixed(len, dim, fixed)
}

/// Integer exponent sequence `k_1 < k_2 < …` of a generalized matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExponentSequence {
    /// `k_p = p - 1`, the classical matrix.
    Linear,
    /// `k_p = 2^p`.
    PowerOfTwo,
    /// `k_p = p^2`.
    Square,
    /// An explicit strictly increasing list.
    Explicit(Vec<u64>),
}

impl ExponentSequence {
    pub fn explicit(values: Vec<u64>) -> Result<Self> {
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("exponent sequence must be strictly increasing".into()));
        }
        Ok(Self::Explicit(values))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::PowerOfTwo => "pow2",
            Self::Square => "square",
            Self::Explicit(_) => "explicit",
        }
    }

    pub fn available(&self) -> Option<usize> {
        match self {
            Self::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    fn check_len(&self, p: usize) -> Result<()> {
        match self.available() {
            Some(n) if p > n => Err(Error::SequenceExhausted { needed: p, available: n }),
            _ => Ok(()),
        }
    }

    /// `k_p` for `p >= 1` as a 64-bit integer. `2^p` is refused for `p > 62`.
    pub fn value(&self, p: usize) -> Result<u64> {
        self.check_len(p)?;
        match self {
            Self::Linear => Ok(p as u64 - 1),
            Self::PowerOfTwo if p <= 62 => Ok(1u64 << p),
            Self::PowerOfTwo => Err(Error::PrecisionExhausted { exponent: p }),
            Self::Square => Ok((p as u64) * (p as u64)),
            Self::Explicit(v) => Ok(v[p - 1]),
        }
    }

    /// `k_p` as a 128-bit integer, `None` for `2^p` with `p > 127`.
    pub fn value_u128(&self, p: usize) -> Result<Option<u128>> {
        self.check_len(p)?;
        Ok(match self {
            Self::PowerOfTwo => (p <= 127).then(|| 1u128 << p),
            _ => Some(u128::from(self.value(p)?)),
        })
    }

    /// `k_p·θ mod 1`, with `2^p` handled by shifting the phase bits.
    pub fn phase_multiple(&self, p: usize, theta: &FixedPhase) -> Result<FixedPhase> {
        self.check_len(p)?;
        match self {
            Self::PowerOfTwo => theta.shl_frac(p),
            _ => Ok(theta.mul_frac(self.value(p)?)),
        }
    }
}

/// `γ(ℓ) = Σ_j N^{j-1} ℓ_j`.
pub fn gamma_index(ell: &[usize], n: usize, d: usize) -> Result<usize> {
    if ell.len() != d {
        return Err(Error::Shape(format!("multi-index of length {} for d={d}", ell.len())));
    }
    let mut g = 0usize;
    let mut w = 1usize;
    for &l in ell {
        if l >= n {
            return Err(Error::IndexOutOfRange { value: l, bound: n });
        }
        g += w * l;
        w *= n;
    }
    Ok(g)
}

/// Inverse of [`gamma_index`].
pub fn gamma_multi_index(mut g: usize, n: usize, d: usize) -> Vec<usize> {
    (0..d)
        .map(|_| {
            let l = g % n;
            g /= n;
            l
        })
        .collect()
}

/// The `N^d × L` d-fold Vandermonde matrix with entries
/// `N^{-d/2} exp(2πi⟨ℓ, x_q⟩)`, row `γ(ℓ)`.
pub fn build_vandermonde(phases: &PhaseVector, n: usize) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Domain("scale N must be positive".into()));
    }
    let d = phases.dim();
    let rows = n
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Domain(format!("N^d overflows for N={n}, d={d}")))?;
    let norm = 1.0 / (rows as f64).sqrt();
    let mut data = Vec::with_capacity(rows * phases.len());
    for g in 0..rows {
        let ell = gamma_multi_index(g, n, d);
        for q in 0..phases.len() {
            let x = phases.fixed_tuple(q);
            let mut acc = FixedPhase::default();
            for (xj, &lj) in x.iter().zip(&ell) {
                acc = acc.add_frac(&xj.mul_frac(lj as u64));
            }
            data.push(acc.unit() * norm);
        }
    }
    Ok(ComplexMatrix::from_rows(rows, phases.len(), data)?.with_normalization(norm))
}

/// The `N × N` generalized matrix `V(p,q) = z_q^{k_p}/√N`.
pub fn build_generalized(phases: &PhaseVector, k: &ExponentSequence, n: usize) -> Result<ComplexMatrix> {
    if phases.dim() != 1 || phases.len() != n {
        return Err(Error::Shape(format!(
            "generalized matrix needs N={n} one-dimensional phases, got L={}, d={}",
            phases.len(),
            phases.dim()
        )));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let mut data = Vec::with_capacity(n * n);
    for p in 1..=n {
        for q in 0..n {
            let t = k.phase_multiple(p, &phases.fixed_tuple(q)[0])?;
            data.push(t.unit() * norm);
        }
    }
    Ok(ComplexMatrix::from_rows(n, n, data)?.with_normalization(norm))
}

/// Dirichlet kernel `sin(Nx/2) / (N sin(x/2))`, continuously extended.
pub fn dirichlet_kernel(x: f64, n: usize) -> f64 {
    let k = (x / (2.0 * PI)).round();
    dirichlet_reduced(x - 2.0 * PI * k, k as i64, n)
}

/// Dirichlet kernel at `x = 2πδ` for a phase difference `δ` in turns.
pub fn dirichlet_kernel_turns(delta: f64, n: usize) -> f64 {
    let k = delta.round();
    dirichlet_reduced(2.0 * PI * (delta - k), k as i64, n)
}

fn dirichlet_reduced(r: f64, k: i64, n: usize) -> f64 {
    // D_N(r + 2πk) = (-1)^{k(N-1)} D_N(r)
    let sign = if (k.rem_euclid(2) == 1) && n % 2 == 0 { -1.0 } else { 1.0 };
    let half = 0.5 * r;
    let s = half.sin();
    if s.abs() < 1e-12 {
        return sign;
    }
    sign * (n as f64 * half).sin() / (n as f64 * s)
}

/// The `L × L` matrix `A(k,m) = Π_j D_N(2π(x_kj - x_mj))`, which has the
/// spectrum of `V*V` for the d-fold matrix on the same phases.
pub fn build_dirichlet_gram(phases: &PhaseVector, n: usize) -> SymmetricMatrix {
    SymmetricMatrix::from_upper(phases.len(), |a, b| {
        if a == b {
            return 1.0;
        }
        phases
            .tuple(a)
            .iter()
            .zip(phases.tuple(b))
            .map(|(x, y)| dirichlet_kernel_turns(x - y, n))
            .product()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn fixed_phase_round_trip() {
        for &x in &[0.0, 0.5, 0.25, 0.1, 0.999_999_999, 1e-30, 0.3] {
            assert_eq!(FixedPhase::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn fixed_phase_mul_and_shift() {
        let t = FixedPhase::from_f64(0.375); // 0.011b
        assert_eq!(t.mul_frac(3).to_f64(), 0.125);
        assert_eq!(t.shl_frac(1).unwrap().to_f64(), 0.75);
        assert_eq!(t.shl_frac(2).unwrap().to_f64(), 0.5);
        assert_eq!(t.shl_frac(3).unwrap().to_f64(), 0.0);
        assert!(t.shl_frac(MAX_PHASE_SHIFT + 1).is_err());
        // shifting equals multiplying for small exponents
        let r = FixedPhase([0x1234_5678_9abc_def0, 0xfedc_ba98_7654_3210, 7, 9]);
        for p in 0..63 {
            assert_eq!(r.shl_frac(p).unwrap(), r.mul_frac(1u64 << p));
        }
        let a = FixedPhase::from_f64(0.75);
        assert_eq!(a.add_frac(&a).to_f64(), 0.5);
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = SeedSpec::new(11, 0);
        let a = sample_phases(3, 1, &Density::Uniform, s).unwrap();
        let b = sample_phases(3, 1, &Density::Uniform, s).unwrap();
        assert_eq!(a, b);
        let c = sample_phases(3, 1, &Density::Uniform, SeedSpec::new(11, 1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_mean_within_four_standard_errors() {
        let p = sample_phases(10_000, 1, &Density::Uniform, SeedSpec::new(5, 0)).unwrap();
        let m = p.values().iter().sum::<f64>() / 1e4;
        let se = (1.0f64 / 12.0 / 1e4).sqrt();
        assert!((m - 0.5).abs() < 4.0 * se);
        assert!(p.values().iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn inverse_cdf_validation() {
        assert!(matches!(InverseCdfTable::new(vec![0.0, 0.6, 0.4, 1.0]), Err(Error::InvalidDensity(_))));
        assert!(InverseCdfTable::new(vec![0.0]).is_err());
        let t = InverseCdfTable::new(vec![0.0, 0.25, 1.0]).unwrap();
        assert_eq!(t.eval(0.25), 0.125);
        let p = sample_phases(1000, 1, &Density::InverseCdf(t), SeedSpec::new(1, 0)).unwrap();
        // half the mass sits in [0, 0.25]
        let frac = p.values().iter().filter(|&&v| v <= 0.25).count() as f64 / 1000.0;
        assert!((frac - 0.5).abs() < 0.06, "{frac}");
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_index(&[0, 0, 0], 5, 3).unwrap(), 0);
        assert_eq!(gamma_index(&[2, 1], 3, 2).unwrap(), 5);
        assert!(matches!(gamma_index(&[3, 0], 3, 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn gamma_is_a_bijection() {
        for n in 1usize..=8 {
            for d in 1..=3 {
                let mut seen = HashSet::new();
                let total = n.pow(d as u32);
                for g in 0..total {
                    let ell = gamma_multi_index(g, n, d);
                    let back = gamma_index(&ell, n, d).unwrap();
                    assert_eq!(back, g);
                    assert!(seen.insert(back));
                }
                assert_eq!(seen.len(), total);
            }
        }
    }

    #[test]
    fn zero_phases_give_constant_entries() {
        let p = PhaseVector::from_slice(&[0.0, 0.0]).unwrap();
        let v = build_vandermonde(&p, 2).unwrap();
        for z in v.as_slice() {
            assert!((z - Complex64::new(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn classical_entries_match_definition() {
        let p = sample_phases(5, 1, &Density::Uniform, SeedSpec::new(3, 0)).unwrap();
        let n = 7;
        let v = build_vandermonde(&p, n).unwrap();
        assert_eq!((v.rows(), v.cols()), (7, 5));
        for &(m, q) in &[(0usize, 0usize), (3, 2), (6, 4)] {
            let th = p.values()[q];
            let want = Complex64::from_polar(1.0 / (n as f64).sqrt(), 2.0 * PI * m as f64 * th);
            assert!((v[(m, q)] - want).norm() < 1e-13);
        }
        for z in v.as_slice() {
            assert!((z.norm() - v.normalization()).abs() < 1e-15);
        }
    }

    #[test]
    fn generalized_linear_is_classical_bitwise() {
        let p = sample_phases(8, 1, &Density::Uniform, SeedSpec::new(9, 0)).unwrap();
        let a = build_generalized(&p, &ExponentSequence::Linear, 8).unwrap();
        let b = build_vandermonde(&p, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generalized_pow2_at_zero_phase() {
        let p = PhaseVector::from_slice(&[0.0; 6]).unwrap();
        let v = build_generalized(&p, &ExponentSequence::PowerOfTwo, 6).unwrap();
        for z in v.as_slice() {
            assert!((z - Complex64::new(1.0 / 6f64.sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn generalized_errors() {
        let p = sample_phases(4, 1, &Density::Uniform, SeedSpec::new(1, 0)).unwrap();
        let short = ExponentSequence::explicit(vec![0, 1, 5]).unwrap();
        assert!(matches!(build_generalized(&p, &short, 4), Err(Error::SequenceExhausted { .. })));
        assert!(build_generalized(&p, &ExponentSequence::Linear, 3).is_err());
        assert!(ExponentSequence::explicit(vec![0, 2, 2]).is_err());
        assert!(ExponentSequence::PowerOfTwo.value(63).is_err());
        assert_eq!(ExponentSequence::PowerOfTwo.value(62).unwrap(), 1 << 62);
    }

    #[test]
    fn pow2_rows_keep_randomness_beyond_double_precision() {
        let p = sample_phases(100, 1, &Density::Uniform, SeedSpec::new(4, 0)).unwrap();
        let v = build_generalized(&p, &ExponentSequence::PowerOfTwo, 100).unwrap();
        // The last row would be identically 1/√N if only 53 bits of θ were used.
        let row = v.row(99);
        let mean: Complex64 = row.iter().sum::<Complex64>() / 100.0;
        assert!(mean.norm() < 0.05);
    }

    #[test]
    fn dirichlet_examples() {
        for n in [1, 2, 5, 16] {
            assert_eq!(dirichlet_kernel(0.0, n), 1.0);
            assert!(dirichlet_kernel(2.0 * PI / n as f64, n).abs() < 1e-12 || n == 1);
        }
        assert!(dirichlet_kernel(PI, 2).abs() < 1e-15);
        // removable singularity at 2π: (-1)^{N-1}
        assert_eq!(dirichlet_kernel(2.0 * PI, 4), -1.0);
        assert_eq!(dirichlet_kernel(2.0 * PI, 5), 1.0);
        let x = 0.37;
        assert!((dirichlet_kernel(x, 6) - (3.0 * x).sin() / (6.0 * (x / 2.0).sin())).abs() < 1e-15);
        for i in 0..200 {
            let x = -10.0 + 0.1 * i as f64;
            assert!(dirichlet_kernel(x, 7).abs() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn dirichlet_gram_structure() {
        let p = PhaseVector::from_slice(&[0.3; 4]).unwrap();
        let a = build_dirichlet_gram(&p, 5);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.get(i, j), 1.0);
            }
        }
        let p = sample_phases(6, 2, &Density::Uniform, SeedSpec::new(2, 0)).unwrap();
        let a = build_dirichlet_gram(&p, 4);
        for i in 0..6 {
            assert_eq!(a.get(i, i), 1.0);
            for j in 0..6 {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
    }
}
