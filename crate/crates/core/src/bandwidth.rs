//! Per-point bandwidths and the rules that derive them from a sample.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Bandwidths `h_i` attached to each observation of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthSpec {
    /// One global bandwidth.
    Constant(f64),
    /// Explicit bandwidth per observation, in sample order.
    PerPoint(Vec<f64>),
    /// Distance from each point to its k-th nearest other sample point.
    KNearest(usize),
}

impl BandwidthSpec {
    /// Realized bandwidths `h_1, ..., h_n` for sample `x`.
    pub fn realize(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        match self {
            BandwidthSpec::Constant(h) => {
                check_positive(*h, None)?;
                Ok(vec![*h; n])
            }
            BandwidthSpec::PerPoint(hs) => {
                if hs.len() != n {
                    return Err(Error::Dimension(format!(
                        "{} per-point bandwidths for {n} observations",
                        hs.len()
                    )));
                }
                for (i, &h) in hs.iter().enumerate() {
                    check_positive(h, Some(i))?;
                }
                Ok(hs.clone())
            }
            BandwidthSpec::KNearest(k) => knn_bandwidths(x, *k),
        }
    }

    /// The global bandwidth, when there is one.
    pub fn constant(&self) -> Option<f64> {
        match self {
            BandwidthSpec::Constant(h) => Some(*h),
            _ => None,
        }
    }
}

fn check_positive(h: f64, index: Option<usize>) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        return Ok(());
    }
    match index {
        Some(i) => domain(format!("bandwidth at index {i} must be positive, got {h}")),
        None => domain(format!("bandwidth must be positive, got {h}")),
    }
}

fn knn_bandwidths(x: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if k == 0 || k >= n {
        return domain(format!("k-nearest bandwidth needs 1 <= k < n, got k={k}, n={n}"));
    }
    let order = sort_permutation(x);
    let sorted: Vec<f64> = order.iter().map(|&i| x[i]).collect();
    let mut out = vec![0.0; n];
    for (pos, &orig) in order.iter().enumerate() {
        // Merge outward from `pos`; the k-th step yields the k-th nearest neighbour.
        let (mut lo, mut hi) = (pos, pos + 1);
        let mut dist = 0.0;
        for _ in 0..k {
            let left = if lo > 0 { Some(sorted[pos] - sorted[lo - 1]) } else { None };
            let right = if hi < n { Some(sorted[hi] - sorted[pos]) } else { None };
            match (left, right) {
                (Some(l), Some(r)) if l <= r => {
                    dist = l;
                    lo -= 1;
                }
                (Some(l), None) => {
                    dist = l;
                    lo -= 1;
                }
                (_, Some(r)) => {
                    dist = r;
                    hi += 1;
                }
                (None, None) => unreachable!("k < n"),
            }
        }
        if !(dist > 0.0) {
            return Err(Error::ZeroBandwidth { index: orig });
        }
        out[orig] = dist;
    }
    Ok(out)
}

/// Stable permutation that sorts `x` ascending (NaNs last).
pub fn sort_permutation(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    idx
}

/// Sample standard deviation with the `n - 1` divisor.
pub fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// A bandwidth recipe that depends on the sample it is applied to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BandwidthRule {
    Fixed { h: f64 },
    /// `h = multiplier * n^(-delta)`, times the sample standard deviation when
    /// `scale_by_sd` is set. Requires `0 < delta < 1`.
    Rate {
        delta: f64,
        multiplier: f64,
        scale_by_sd: bool,
    },
    /// `h = multiplier * ln(n) / n`.
    LogRate { multiplier: f64 },
    KNearest { k: usize },
}

impl BandwidthRule {
    /// `n^(-1/5)` scaled by the sample standard deviation.
    pub fn default_rate() -> Self {
        BandwidthRule::Rate {
            delta: 0.2,
            multiplier: 1.0,
            scale_by_sd: true,
        }
    }

    /// The global bandwidth at sample size `n` for rules that do not look at
    /// the data.
    pub fn constant_for(&self, n: usize) -> Option<f64> {
        let nf = n as f64;
        match *self {
            BandwidthRule::Fixed { h } => Some(h),
            BandwidthRule::Rate {
                delta,
                multiplier,
                scale_by_sd: false,
            } => Some(multiplier * nf.powf(-delta)),
            BandwidthRule::LogRate { multiplier } => Some(multiplier * nf.ln() / nf),
            _ => None,
        }
    }

    pub fn resolve(&self, x: &[f64]) -> Result<BandwidthSpec> {
        let n = x.len() as f64;
        let spec = match *self {
            BandwidthRule::Fixed { h } => BandwidthSpec::Constant(h),
            BandwidthRule::Rate {
                delta,
                multiplier,
                scale_by_sd,
            } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return domain(format!("rate exponent must lie in (0, 1), got {delta}"));
                }
                let scale = if scale_by_sd { sample_sd(x) } else { 1.0 };
                BandwidthSpec::Constant(multiplier * scale * n.powf(-delta))
            }
            BandwidthRule::LogRate { multiplier } => {
                BandwidthSpec::Constant(multiplier * n.ln() / n)
            }
            BandwidthRule::KNearest { k } => BandwidthSpec::KNearest(k),
        };
        // Surface invalid constants (e.g. zero spread) at resolution time.
        if let Some(h) = spec.constant() {
            check_positive(h, None)?;
        }
        Ok(spec)
    }
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            BandwidthRule::Fixed { h } => write!(f, "h = {h}"),
            BandwidthRule::Rate {
                delta,
                multiplier,
                scale_by_sd,
            } => {
                let sd = if scale_by_sd { " * sd" } else { "" };
                write!(f, "h = {multiplier}{sd} * n^(-{delta})")
            }
            BandwidthRule::LogRate { multiplier } => write!(f, "h = {multiplier} * ln(n) / n"),
            BandwidthRule::KNearest { k } => write!(f, "h_i = distance to {k}-th nearest neighbour"),
        }
    }
}

/// Accepts `<float>`, `rate:<delta>` (sd-scaled) and `knn:<k>`.
impl FromStr for BandwidthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("invalid bandwidth `{s}`: {what}"));
        if let Some(d) = s.strip_prefix("rate:") {
            let delta: f64 = d.parse().map_err(|_| bad("rate exponent is not a number"))?;
            if !(delta > 0.0 && delta < 1.0) {
                return Err(bad("rate exponent must lie in (0, 1)"));
            }
            return Ok(BandwidthRule::Rate {
                delta,
                multiplier: 1.0,
                scale_by_sd: true,
            });
        }
        if let Some(k) = s.strip_prefix("knn:") {
            let k: usize = k.parse().map_err(|_| bad("k is not a positive integer"))?;
            if k == 0 {
                return Err(bad("k must be at least 1"));
            }
            return Ok(BandwidthRule::KNearest { k });
        }
        let h: f64 = s.parse().map_err(|_| bad("expected <float>, rate:<delta> or knn:<k>"))?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(bad("bandwidth must be positive"));
        }
        Ok(BandwidthRule::Fixed { h })
    }
}
