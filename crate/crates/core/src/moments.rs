//! Set partitions, the block-balance solution counts behind the asymptotic
//! moments of generalized Vandermonde matrices, and Marchenko-Pastur
//! reference values.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use rand::Rng;

use crate::ensemble::ExponentSequence;
use crate::linalg::ComplexMatrix;
use crate::par::Execution;
use crate::quad::integrate;
use crate::seed::SeedSpec;
use crate::spectral::outer_gram;
use crate::{Error, Result};

/// Largest ground set handled by [`enumerate_partitions`].
pub const MAX_PARTITION_SIZE: usize = 8;

/// Brute-force budget: `r·log₂N` may not exceed this.
pub const COUNT_BUDGET_BITS: f64 = 40.0;

/// Partition of `{0, …, r-1}` into blocks, canonically ordered by least
/// element. Displayed 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    r: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(r: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; r];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= r || seen[i] {
                    return Err(Error::Domain(format!("element {i} repeated or out of range")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Domain("blocks do not cover the ground set".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { r, blocks })
    }

    /// From 1-based blocks, e.g. `[[1, 3], [2, 4]]`.
    pub fn from_one_based(r: usize, blocks: &[&[usize]]) -> Result<Self> {
        let blocks = blocks
            .iter()
            .map(|b| b.iter().map(|&i| i.checked_sub(1).ok_or_else(|| Error::Domain("element 0 in 1-based block".into()))).collect())
            .collect::<Result<Vec<Vec<usize>>>>()?;
        Self::new(r, blocks)
    }

    /// From a block label per element.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, &l) in labels.iter().enumerate() {
            map.entry(l).or_default().push(i);
        }
        Self::new(labels.len(), map.into_values().collect()).expect("labels always form a partition")
    }

    pub fn singletons(r: usize) -> Self {
        Self { r, blocks: (0..r).map(|i| vec![i]).collect() }
    }

    /// The 4-cycle crossing partition `{{1,3},{2,4}}`.
    pub fn four_cycle() -> Self {
        Self { r: 4, blocks: vec![vec![0, 2], vec![1, 3]] }
    }

    pub fn size(&self) -> usize {
        self.r
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of every element.
    pub fn labels(&self) -> Vec<usize> {
        let mut l = vec![0; self.r];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block {
                l[i] = b;
            }
        }
        l
    }

    /// Relabel by `i ↦ i + shift (mod r)`.
    pub fn rotate(&self, shift: usize) -> Self {
        let blocks = self.blocks.iter().map(|b| b.iter().map(|&i| (i + shift) % self.r).collect()).collect();
        Self::new(self.r, blocks).expect("rotation preserves a partition")
    }

    /// No `a < b < c < d` with `a, c` in one block and `b, d` in another.
    pub fn is_noncrossing(&self) -> bool {
        let l = self.labels();
        let r = self.r;
        for a in 0..r {
            for b in a + 1..r {
                if l[b] == l[a] {
                    continue;
                }
                for c in b + 1..r {
                    if l[c] != l[a] {
                        continue;
                    }
                    for d in c + 1..r {
                        if l[d] == l[b] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, b) in self.blocks.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            let items: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        write!(f, "}}")
    }
}

pub fn is_noncrossing(p: &SetPartition) -> bool {
    p.is_noncrossing()
}

/// All partitions of `{1, …, r}` via restricted growth strings.
pub fn enumerate_partitions(r: usize) -> Result<Vec<SetPartition>> {
    if !(1..=MAX_PARTITION_SIZE).contains(&r) {
        return Err(Error::Domain(format!("partition size must lie in 1..={MAX_PARTITION_SIZE}")));
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; r];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<SetPartition>) {
        if i == labels.len() {
            out.push(SetPartition::from_labels(labels));
            return;
        }
        for l in 0..=max + 1 {
            labels[i] = l;
            rec(i + 1, max.max(l), labels, out);
        }
    }
    rec(1, 0, &mut labels, &mut out);
    Ok(out)
}

/// Exact size of the solution set for one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionCount {
    pub partition: SetPartition,
    pub n: usize,
    pub sequence: &'static str,
    pub count: u128,
    /// `count / N^{r+1-|ρ|}`.
    pub normalized: f64,
}

/// How [`count_solutions`] may obtain its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMethod {
    /// Closed forms and the pair-sum table where they apply, brute force
    /// otherwise.
    #[default]
    Auto,
    /// Always enumerate tuples.
    BruteForce,
}

/// Exponent values `k_1..k_N` in a form that supports exact sum comparison.
enum Exponents {
    Ints(Vec<u128>),
    /// `k_p = 2^p` beyond 128-bit range: compare exponent multisets.
    Pow2,
}

impl Exponents {
    fn new(k: &ExponentSequence, n: usize, terms: usize) -> Result<Self> {
        if matches!(k, ExponentSequence::PowerOfTwo) && (n as f64 + (terms as f64).log2() >= 127.0) {
            return Ok(Exponents::Pow2);
        }
        let vals = (1..=n)
            .map(|p| k.value_u128(p).map(|v| v.expect("checked range")))
            .collect::<Result<Vec<u128>>>()?;
        let max = vals.iter().copied().max().unwrap_or(0);
        if max.checked_mul(terms as u128).is_none() {
            return Err(Error::Domain("exponent sums overflow 128 bits".into()));
        }
        Ok(Exponents::Ints(vals))
    }

    /// `Σ_{i∈lhs} k_{p_i} == Σ_{i∈rhs} k_{p_i}` for 0-based `p`.
    fn balanced(&self, p: &[usize], lhs: &[usize], rhs: &[usize]) -> bool {
        match self {
            Exponents::Ints(v) => {
                let a: u128 = lhs.iter().map(|&i| v[p[i]]).sum();
                let b: u128 = rhs.iter().map(|&i| v[p[i]]).sum();
                a == b
            }
            Exponents::Pow2 => {
                canonical_pow2(lhs.iter().map(|&i| p[i] + 1)) == canonical_pow2(rhs.iter().map(|&i| p[i] + 1))
            }
        }
    }
}

/// Distinct exponents of `Σ 2^{e}` after carrying.
fn canonical_pow2<I: Iterator<Item = usize>>(exps: I) -> Vec<usize> {
    let mut e: Vec<usize> = exps.collect();
    loop {
        e.sort_unstable();
        match e.windows(2).position(|w| w[0] == w[1]) {
            Some(i) => {
                e[i] += 1;
                e.remove(i + 1);
            }
            None => return e,
        }
    }
}

fn budget_ok(r: usize, n: usize) -> bool {
    r as f64 * (n.max(1) as f64).log2() <= COUNT_BUDGET_BITS
}

/// `Σ_s c(s)²` with `c(s) = #{(a, b) : k_a + k_b = s}`, from a table of
/// pair sums. This is the solution count of the 4-cycle partition for any
/// sequence.
pub fn count_four_cycle_mitm(k: &ExponentSequence, n: usize) -> Result<u128> {
    if matches!(k, ExponentSequence::PowerOfTwo) && n > 126 {
        // a + b determines the multiset {a, b} once a ≠ b is distinguished
        return Ok(2 * (n as u128).pow(2) - n as u128);
    }
    let vals = (1..=n)
        .map(|p| k.value_u128(p).map(|v| v.expect("checked range")))
        .collect::<Result<Vec<u128>>>()?;
    let mut table: HashMap<u128, u128> = HashMap::with_capacity(n * n);
    for &a in &vals {
        for &b in &vals {
            *table.entry(a + b).or_default() += 1;
        }
    }
    Ok(table.values().map(|c| c * c).sum())
}

/// `(2N³ + N)/3 = Σ_s r(s)²`, `r(s) = N - |s - (N-1)|`.
pub fn four_cycle_linear_closed_form(n: usize) -> u128 {
    let n = n as u128;
    (2 * n * n * n + n) / 3
}

/// `2N² - N`.
pub fn four_cycle_pow2_closed_form(n: usize) -> u128 {
    let n = n as u128;
    2 * n * n - n
}

/// Exhaustive count over `{1..N}^r` with each block equation checked as
/// soon as all of its positions are assigned.
pub fn count_brute_force(rho: &SetPartition, n: usize, k: &ExponentSequence, exec: Execution) -> Result<u128> {
    let r = rho.size();
    if !budget_ok(r, n) {
        return Err(Error::Budget(format!(
            "{r}·log2({n}) exceeds {COUNT_BUDGET_BITS} bits and no closed form applies"
        )));
    }
    let exps = Exponents::new(k, n, r)?;
    // equation of block B: Σ_{i∈B} k_{p_i} = Σ_{i∈B} k_{p_{i+1}}
    let eqs: Vec<(Vec<usize>, Vec<usize>)> = rho
        .blocks()
        .iter()
        .map(|b| (b.clone(), b.iter().map(|&i| (i + 1) % r).collect()))
        .collect();
    let mut check_at: Vec<Vec<usize>> = vec![Vec::new(); r];
    for (e, (l, rr)) in eqs.iter().enumerate() {
        let last = l.iter().chain(rr).copied().max().unwrap_or(0);
        check_at[last].push(e);
    }
    fn rec(
        pos: usize,
        p: &mut [usize],
        n: usize,
        eqs: &[(Vec<usize>, Vec<usize>)],
        check_at: &[Vec<usize>],
        exps: &Exponents,
    ) -> u64 {
        if pos == p.len() {
            return 1;
        }
        let mut total = 0;
        for v in 0..n {
            p[pos] = v;
            if check_at[pos].iter().all(|&e| exps.balanced(p, &eqs[e].0, &eqs[e].1)) {
                total += rec(pos + 1, p, n, eqs, check_at, exps);
            }
        }
        total
    }
    let total = exec.sum_u64(n, |first| {
        let mut p = vec![0usize; r];
        p[0] = first;
        if !check_at[0].iter().all(|&e| exps.balanced(&p, &eqs[e].0, &eqs[e].1)) {
            return 0;
        }
        rec(1, &mut p, n, &eqs, &check_at, &exps)
    });
    Ok(u128::from(total))
}

/// `|S_{ρ,N}|` and its normalization.
pub fn count_solutions(
    rho: &SetPartition,
    n: usize,
    k: &ExponentSequence,
    method: CountMethod,
    exec: Execution,
) -> Result<SolutionCount> {
    if n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    if let Some(avail) = k.available() {
        if avail < n {
            return Err(Error::SequenceExhausted { needed: n, available: avail });
        }
    }
    let four_cycle = *rho == SetPartition::four_cycle();
    let count = match (method, four_cycle, k) {
        (CountMethod::Auto, true, ExponentSequence::Linear) => four_cycle_linear_closed_form(n),
        (CountMethod::Auto, true, ExponentSequence::PowerOfTwo) => four_cycle_pow2_closed_form(n),
        (CountMethod::Auto, true, _) => count_four_cycle_mitm(k, n)?,
        _ => count_brute_force(rho, n, k, exec)?,
    };
    let dim = (rho.size() + 1 - rho.num_blocks()) as i32;
    Ok(SolutionCount {
        partition: rho.clone(),
        n,
        sequence: k.name(),
        count,
        normalized: count as f64 / (n as f64).powi(dim),
    })
}

/// Normalized counts along a list of `N`; no extrapolation is attempted.
pub fn k_rho_estimate(rho: &SetPartition, k: &ExponentSequence, ns: &[usize], exec: Execution) -> Result<Vec<SolutionCount>> {
    ns.iter().map(|&n| count_solutions(rho, n, k, CountMethod::Auto, exec)).collect()
}

/// `Σ_{ρ∈𝒫(r)} |S_{ρ,N}| / N^{r+1-|ρ|}`, a finite-N proxy for `m_r`.
pub fn asymptotic_moment(r: usize, k: &ExponentSequence, n: usize, exec: Execution) -> Result<f64> {
    let mut total = 0.0;
    for rho in enumerate_partitions(r)? {
        total += count_solutions(&rho, n, k, CountMethod::Auto, exec)?.normalized;
    }
    Ok(total)
}

fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

/// `tr_N((VV*)^r)` for `r = 1..=rmax`.
pub fn trace_powers(v: &ComplexMatrix, rmax: usize) -> Result<Vec<f64>> {
    let n = v.rows() as f64;
    let x = outer_gram(v).to_matrix();
    let half = rmax.div_ceil(2).max(1);
    let mut pows = vec![x.clone()];
    for _ in 1..half {
        let next = pows.last().expect("non-empty").matmul(&x)?;
        pows.push(next);
    }
    let id = ComplexMatrix::identity(v.rows());
    Ok((1..=rmax)
        .map(|r| {
            let (a, b) = (r.div_ceil(2), r / 2);
            let pa = &pows[a - 1];
            let tr = if b == 0 { trace_of_product(pa, &id) } else { trace_of_product(pa, &pows[b - 1]) };
            tr / n
        })
        .collect())
}

/// `tr_N((VV*)^r)`.
pub fn empirical_moment(v: &ComplexMatrix, r: usize) -> Result<f64> {
    if !v.is_square() {
        return Err(Error::Shape("empirical moments need a square matrix".into()));
    }
    if r == 0 {
        return Ok(1.0);
    }
    Ok(trace_powers(v, r)?[r - 1])
}

/// Marchenko-Pastur density `(1/2π)√((4-x)/x)` on `(0, 4]`.
pub fn mp_density(x: f64) -> f64 {
    if x <= 0.0 || x > 4.0 {
        return 0.0;
    }
    ((4.0 - x) / x).sqrt() / (2.0 * PI)
}

/// Distribution function; with `x = 4 sin²t`, `F = (2/π)(t + sin t cos t)`.
pub fn mp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 4.0 {
        return 1.0;
    }
    let t = (x.sqrt() / 2.0).asin();
    (2.0 / PI) * (t + t.sin() * t.cos())
}

/// `∫ x^r dμ`, by quadrature after `x = 4 sin²t`.
pub fn mp_moment(r: u32) -> Result<f64> {
    if r > 10 {
        return Err(Error::Domain("moment order must be at most 10".into()));
    }
    let scale = 4f64.powi(r as i32) * 4.0 / PI;
    let v = integrate(|t| t.sin().powi(2 * r as i32) * t.cos().powi(2), 0.0, PI / 2.0, 1e-13)?;
    Ok(scale * v)
}

/// Monte Carlo volume of `{(x,y,z) ∈ [0,1]³ : inside(x,y,z)}` with its
/// standard error.
pub fn polytope_volume_with<F: Fn(f64, f64, f64) -> bool>(samples: usize, seed: u64, inside: F) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let mut rng = SeedSpec::new(seed, 0).rng();
    let hits = (0..samples)
        .filter(|_| {
            let (x, y, z) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
            inside(x, y, z)
        })
        .count();
    let p = hits as f64 / samples as f64;
    Ok((p, (p * (1.0 - p) / (samples - 1) as f64).sqrt()))
}

/// Volume of `{0 ≤ x + y - z ≤ 1}`, the limit constant of the 4-cycle
/// partition under `k_p = p - 1`.
pub fn polytope_volume(samples: usize, seed: u64) -> Result<(f64, f64)> {
    polytope_volume_with(samples, seed, |x, y, z| {
        let s = x + y - z;
        (0.0..=1.0).contains(&s)
    })
}
