//! Sample statistics used by the experiments.

use crate::{Error, Result};

fn non_empty(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Domain("empty sample".into()));
    }
    Ok(())
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(xs: &[f64]) -> Result<f64> {
    non_empty(xs)?;
    Ok(compensated_sum(xs.iter().copied()) / xs.len() as f64)
}

/// Unbiased sample variance (zero for a single observation).
pub fn variance(xs: &[f64]) -> Result<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Ok(0.0);
    }
    let ss = compensated_sum(xs.iter().map(|x| (x - m) * (x - m)));
    Ok(ss / (xs.len() - 1) as f64)
}

/// Standard error of the mean.
pub fn stderr(xs: &[f64]) -> Result<f64> {
    Ok((variance(xs)? / xs.len() as f64).sqrt())
}

/// Sample covariance of paired observations.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Shape("covariance of unequal-length samples".into()));
    }
    let mx = mean(xs)?;
    let my = mean(ys)?;
    if xs.len() < 2 {
        return Ok(0.0);
    }
    let s = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    Ok(s / (xs.len() - 1) as f64)
}

/// Linear-interpolated quantile of an unsorted sample, `q` in `[0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    non_empty(xs)?;
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(s[lo] + (pos - lo as f64) * (s[hi] - s[lo]))
}

/// Equal-width histogram with bin masses normalized to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// `bins` equal bins over `[lo, hi]`; values outside are clamped into
    /// the edge bins.
    pub fn with_bins(xs: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Self> {
        non_empty(xs)?;
        if bins == 0 || !(hi > lo) {
            return Err(Error::Domain(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        let mut counts = vec![0u64; bins];
        let w = (hi - lo) / bins as f64;
        for &x in xs {
            let b = ((x - lo) / w).floor();
            let b = if b < 0.0 { 0 } else { (b as usize).min(bins - 1) };
            counts[b] += 1;
        }
        Ok(Self { lo, hi, counts, total: xs.len() as u64 })
    }

    /// Freedman–Diaconis bin count over the sample range.
    pub fn freedman_diaconis(xs: &[f64]) -> Result<Self> {
        non_empty(xs)?;
        let (lo, hi) = xs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let iqr = quantile(xs, 0.75)? - quantile(xs, 0.25)?;
        let width = 2.0 * iqr / (xs.len() as f64).cbrt();
        let bins = if width > 0.0 && hi > lo {
            (((hi - lo) / width).ceil() as usize).clamp(1, 10_000)
        } else {
            1
        };
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Self::with_bins(xs, lo, hi, bins)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    pub fn edges(&self, b: usize) -> (f64, f64) {
        let w = self.width();
        (self.lo + b as f64 * w, self.lo + (b + 1) as f64 * w)
    }

    pub fn masses(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }
}

/// Empirical CDF of a sample, stored sorted.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(xs: &[f64]) -> Result<Self> {
        non_empty(xs)?;
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> Result<f64> {
    let e = EmpiricalCdf::new(xs)?;
    let n = e.sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in e.sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// KS distance against a CDF given as a table of `(x, F(x))` pairs with
/// nondecreasing `x`, linearly interpolated and clamped outside.
pub fn ks_statistic_table(xs: &[f64], table: &[(f64, f64)]) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::Domain("empty CDF table".into()));
    }
    let interp = |x: f64| {
        let k = table.partition_point(|&(t, _)| t <= x);
        if k == 0 {
            table[0].1
        } else if k == table.len() {
            table[k - 1].1
        } else {
            let (x0, y0) = table[k - 1];
            let (x1, y1) = table[k];
            if x1 > x0 {
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            } else {
                y1
            }
        }
    };
    // Step-CDF tables are compared on both sides of every jump.
    let e = EmpiricalCdf::new(xs)?;
    let n = e.sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in e.sorted.iter().enumerate() {
        let f = interp(x);
        d = d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).max(0.0));
    }
    for &(t, f) in table {
        d = d.max((e.eval(t) - f).abs());
    }
    Ok(d)
}

/// Two-sample KS distance `sup |F_a - F_b|`, evaluated at every jump.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let ea = EmpiricalCdf::new(a)?;
    let eb = EmpiricalCdf::new(b)?;
    let d = ea
        .sorted
        .iter()
        .chain(eb.sorted.iter())
        .map(|&x| (ea.eval(x) - eb.eval(x)).abs())
        .fold(0.0, f64::max);
    Ok(d)
}
