//! Synthetic additive-model data, Monte-Carlo convergence studies and
//! analytic bounds on the largest spacing of uniform samples.
//!
//! Every replicate draws from its own ChaCha20 stream: the generator is
//! seeded with `SimSpec::seed` and the stream number is the replicate index.
//! A replicate is therefore reproducible in isolation and a study's results
//! do not depend on the order replicates are run in. [`generate`] is
//! replicate 0.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bandwidth::BandwidthRule;
use crate::data::Dataset;
use crate::error::{domain, Result};
use crate::kernel::Kernel;
use crate::smoother::build_pair;
use crate::spectral::{certify_with, check_gap_conditions, max_gap, Coordinate, SpectralMethod, Verdict};

/// Named component functions for the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentFn {
    Zero,
    Identity,
    /// `sin(2 pi x)`
    Sine,
    /// `x^2`
    Square,
    /// `x^3`
    Cubic,
}

impl ComponentFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ComponentFn::Zero => 0.0,
            ComponentFn::Identity => x,
            ComponentFn::Sine => (2.0 * PI * x).sin(),
            ComponentFn::Square => x * x,
            ComponentFn::Cubic => x * x * x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateNormal {
    pub mean: (f64, f64),
    pub sd: (f64, f64),
    pub rho: f64,
}

impl BivariateNormal {
    pub fn standard(rho: f64) -> Self {
        Self {
            mean: (0.0, 0.0),
            sd: (1.0, 1.0),
            rho,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho.abs() < 1.0) {
            return domain(format!("correlation must satisfy |rho| < 1, got {}", self.rho));
        }
        if !(self.sd.0 > 0.0 && self.sd.1 > 0.0) {
            return domain("normal standard deviations must be positive");
        }
        Ok(())
    }

    /// `f(u, v) / (f1(u) f2(v))` for this bivariate normal.
    pub fn density_ratio(&self, u: f64, v: f64) -> f64 {
        let zu = (u - self.mean.0) / self.sd.0;
        let zv = (v - self.mean.1) / self.sd.1;
        let r = self.rho;
        let one_minus = 1.0 - r * r;
        let q = zu * zu - 2.0 * r * zu * zv + zv * zv;
        let log_ratio = -q / (2.0 * one_minus) + (zu * zu + zv * zv) / 2.0;
        log_ratio.exp() / one_minus.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Design {
    /// `U ~ U(u.0, u.1)` independent of `V ~ U(v.0, v.1)`.
    IndependentUniform { u: (f64, f64), v: (f64, f64) },
    BivariateNormal(BivariateNormal),
}

impl Design {
    pub fn unit_square() -> Self {
        Design::IndependentUniform {
            u: (0.0, 1.0),
            v: (0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub n: usize,
    pub alpha: f64,
    pub m1: ComponentFn,
    pub m2: ComponentFn,
    pub design: Design,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("sample size must be at least 2, got {}", self.n));
        }
        if !(self.noise_sd >= 0.0) {
            return domain(format!("noise sd must be nonnegative, got {}", self.noise_sd));
        }
        match &self.design {
            Design::IndependentUniform { u, v } => {
                if !(u.0 < u.1 && v.0 < v.1) {
                    return domain("uniform design intervals must have lo < hi");
                }
            }
            Design::BivariateNormal(bn) => bn.validate()?,
        }
        Ok(())
    }
}

fn replicate_rng(seed: u64, replicate: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Draws one dataset from `Y = alpha + m1(U) + m2(V) + eps` with components
/// centered at their in-sample means.
pub fn generate(spec: &SimSpec) -> Result<Dataset> {
    generate_replicate(spec, 0)
}

pub fn generate_replicate(spec: &SimSpec, replicate: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = replicate_rng(spec.seed, replicate);
    let n = spec.n;
    let (mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (a, b) = match spec.design {
            Design::IndependentUniform { u: (ul, uh), v: (vl, vh) } => {
                let a = ul + (uh - ul) * rng.random::<f64>();
                let b = vl + (vh - vl) * rng.random::<f64>();
                (a, b)
            }
            Design::BivariateNormal(bn) => {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let a = bn.mean.0 + bn.sd.0 * z1;
                let b = bn.mean.1 + bn.sd.1 * (bn.rho * z1 + (1.0 - bn.rho * bn.rho).sqrt() * z2);
                (a, b)
            }
        };
        u.push(a);
        v.push(b);
    }
    let centered = |f: ComponentFn, x: &[f64]| -> Vec<f64> {
        let vals: Vec<f64> = x.iter().map(|&t| f.eval(t)).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        vals.into_iter().map(|t| t - mean).collect()
    };
    let c1 = centered(spec.m1, &u);
    let c2 = centered(spec.m2, &v);
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let eps: f64 = rng.sample(StandardNormal);
            spec.alpha + c1[i] + c2[i] + spec.noise_sd * eps
        })
        .collect();
    Dataset::new(y, u, v)
}

/// Upper bounds on `P(max spacing of n uniforms on [0, 1] >= h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapBound {
    /// `n (1 - h)^(n-1)`, or 0 when `h >= 1`.
    pub exact: f64,
    /// `n exp(-(n - 1) h / 2)`.
    pub exponential: f64,
}

/// Union bound over the `n - 1` spacings of the uniform spacing law.
pub fn gap_exceedance_bound(n: usize, h: f64) -> Result<GapBound> {
    if n < 2 {
        return domain(format!("gap bound needs n >= 2, got {n}"));
    }
    if !(h > 0.0) {
        return domain(format!("gap bound needs h > 0, got {h}"));
    }
    let nf = n as f64;
    let exact = if h >= 1.0 {
        0.0
    } else {
        nf * ((nf - 1.0) * (-h).ln_1p()).exp()
    };
    let exponential = nf * (-(nf - 1.0) * h / 2.0).exp();
    Ok(GapBound { exact, exponential })
}

/// Empirical frequency of `max spacing >= h` over uniform samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceEstimate {
    pub n: usize,
    pub h: f64,
    pub replicates: usize,
    pub exceedances: usize,
    pub frequency: f64,
    /// Binomial standard error `sqrt(p (1 - p) / R)` at the observed frequency.
    pub standard_error: f64,
}

pub fn gap_exceedance_frequency(n: usize, h: f64, replicates: usize, seed: u64) -> Result<ExceedanceEstimate> {
    if n < 2 || replicates == 0 {
        return domain("exceedance simulation needs n >= 2 and at least one replicate");
    }
    let mut x = vec![0.0; n];
    let mut exceedances = 0;
    for r in 0..replicates {
        let mut rng = replicate_rng(seed, r as u64);
        for xi in x.iter_mut() {
            *xi = rng.random::<f64>();
        }
        if max_gap(&x) >= h {
            exceedances += 1;
        }
    }
    let p = exceedances as f64 / replicates as f64;
    Ok(ExceedanceEstimate {
        n,
        h,
        replicates,
        exceedances,
        frequency: p,
        standard_error: (p * (1.0 - p) / replicates as f64).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub spec: SimSpec,
    pub kernel: Kernel,
    pub bandwidth_u: BandwidthRule,
    pub bandwidth_v: BandwidthRule,
    pub replicates: usize,
    /// Run the full certificate per replicate. Gap statistics alone are
    /// cheap; certification costs three dense eigenvalue problems.
    pub certify: bool,
    pub method: SpectralMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub max_gap_u: f64,
    pub max_gap_v: f64,
    pub gap_ok: bool,
    pub certified: Option<bool>,
    pub rho_product: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub replicates: usize,
    pub n: usize,
    pub kernel: Kernel,
    pub bandwidth_rule: String,
    /// Share of replicates where `h > max gap` on both coordinates (constant
    /// bandwidths), or where the adjacent-gap conditions hold (varying ones).
    pub fraction_gap_ok: f64,
    /// Share with any certified verdict; absent when certification was skipped.
    pub fraction_certified: Option<f64>,
    /// Share certified through the adjacent-gap conditions.
    pub fraction_certified_by_gaps: Option<f64>,
    /// Union bound on `P(gap condition fails)` for uniform designs with
    /// constant bandwidths: the sum of the per-coordinate exact bounds.
    pub analytic_bound: Option<f64>,
    pub mean_max_gap_u: f64,
    pub mean_max_gap_v: f64,
    pub max_rho_product: Option<f64>,
    pub rows: Vec<ReplicateRow>,
}

impl fmt::Display for MonteCarloReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} replicates, n = {}, {} kernel, {}: gap ok {:.4}",
            self.replicates, self.n, self.kernel, self.bandwidth_rule, self.fraction_gap_ok
        )?;
        if let Some(c) = self.fraction_certified {
            write!(f, ", certified {c:.4}")?;
        }
        if let Some(b) = self.analytic_bound {
            write!(f, ", failure bound {b:.3e}")?;
        }
        Ok(())
    }
}

fn run_replicate(cfg: &MonteCarloConfig, r: usize) -> Result<(ReplicateRow, Option<Verdict>)> {
    let data = generate_replicate(&cfg.spec, r as u64)?;
    let bw_u = cfg.bandwidth_u.resolve(data.u())?;
    let bw_v = cfg.bandwidth_v.resolve(data.v())?;
    let max_gap_u = max_gap(data.u());
    let max_gap_v = max_gap(data.v());
    let gap_ok = match (bw_u.constant(), bw_v.constant()) {
        (Some(hu), Some(hv)) => hu > max_gap_u && hv > max_gap_v,
        _ => {
            check_gap_conditions(Coordinate::U, data.u(), cfg.kernel, &bw_u)?.condition_holds
                && check_gap_conditions(Coordinate::V, data.v(), cfg.kernel, &bw_v)?.condition_holds
        }
    };
    let (verdict, rho_product) = if cfg.certify {
        let pair = build_pair(&data, cfg.kernel, &bw_u, &bw_v)?;
        let cert = certify_with(&data, &pair, cfg.kernel, &bw_u, &bw_v, cfg.method)?;
        (Some(cert.verdict), Some(cert.spectral.rho_product))
    } else {
        (None, None)
    };
    let row = ReplicateRow {
        replicate: r,
        max_gap_u,
        max_gap_v,
        gap_ok,
        certified: verdict.map(Verdict::is_certified),
        rho_product,
    };
    Ok((row, verdict))
}

fn uniform_design_bound(cfg: &MonteCarloConfig) -> Result<Option<f64>> {
    let Design::IndependentUniform { u, v } = cfg.spec.design else {
        return Ok(None);
    };
    let n = cfg.spec.n;
    let (Some(hu), Some(hv)) = (cfg.bandwidth_u.constant_for(n), cfg.bandwidth_v.constant_for(n)) else {
        return Ok(None);
    };
    let bu = gap_exceedance_bound(n, hu / (u.1 - u.0))?.exact;
    let bv = gap_exceedance_bound(n, hv / (v.1 - v.0))?.exact;
    Ok(Some(bu + bv))
}

/// Runs `cfg.replicates` independent replicates and aggregates gap and
/// certification outcomes.
pub fn run_monte_carlo(cfg: &MonteCarloConfig) -> Result<MonteCarloReport> {
    cfg.spec.validate()?;
    if cfg.replicates == 0 {
        return domain("at least one replicate is required");
    }
    let mut rows = Vec::with_capacity(cfg.replicates);
    let mut verdicts = Vec::with_capacity(cfg.replicates);
    for r in 0..cfg.replicates {
        let (row, verdict) = run_replicate(cfg, r)?;
        rows.push(row);
        verdicts.push(verdict);
    }
    let reps = cfg.replicates as f64;
    let frac = |count: usize| count as f64 / reps;
    let fraction_gap_ok = frac(rows.iter().filter(|r| r.gap_ok).count());
    let (fraction_certified, fraction_certified_by_gaps, max_rho_product) = if cfg.certify {
        let certified = verdicts.iter().filter(|v| v.is_some_and(Verdict::is_certified)).count();
        let by_gaps = verdicts
            .iter()
            .filter(|v| **v == Some(Verdict::CertifiedByTheorem1))
            .count();
        let max_rho = rows
            .iter()
            .filter_map(|r| r.rho_product)
            .fold(0.0, f64::max);
        (Some(frac(certified)), Some(frac(by_gaps)), Some(max_rho))
    } else {
        (None, None, None)
    };
    let rule = if cfg.bandwidth_u == cfg.bandwidth_v {
        cfg.bandwidth_u.to_string()
    } else {
        format!("U: {}; V: {}", cfg.bandwidth_u, cfg.bandwidth_v)
    };
    Ok(MonteCarloReport {
        replicates: cfg.replicates,
        n: cfg.spec.n,
        kernel: cfg.kernel,
        bandwidth_rule: rule,
        fraction_gap_ok,
        fraction_certified,
        fraction_certified_by_gaps,
        analytic_bound: uniform_design_bound(cfg)?,
        mean_max_gap_u: rows.iter().map(|r| r.max_gap_u).sum::<f64>() / reps,
        mean_max_gap_v: rows.iter().map(|r| r.max_gap_v).sum::<f64>() / reps,
        max_rho_product,
        rows,
    })
}

/// Supremum over a rectangular grid of `|f(u, v) / (f1(u) f2(v)) - 1|`.
pub fn or_density_ratio(design: &BivariateNormal, u_range: (f64, f64), v_range: (f64, f64), step: f64) -> Result<f64> {
    design.validate()?;
    if !(step > 0.0) || !(u_range.0 <= u_range.1) || !(v_range.0 <= v_range.1) {
        return domain("grid needs a positive step and lo <= hi");
    }
    let points = |(lo, hi): (f64, f64)| -> Vec<f64> {
        let k = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=k).map(|i| lo + i as f64 * step).collect()
    };
    let us = points(u_range);
    let vs = points(v_range);
    let mut sup = 0.0f64;
    for &u in &us {
        for &v in &vs {
            sup = sup.max((design.density_ratio(u, v) - 1.0).abs());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> SimSpec {
        SimSpec {
            n,
            alpha: 2.0,
            m1: ComponentFn::Sine,
            m2: ComponentFn::Cubic,
            design: Design::unit_square(),
            noise_sd: 0.3,
            seed: 42,
        }
    }

    #[test]
    fn noiseless_zero_components() {
        let mut s = spec(20);
        s.m1 = ComponentFn::Zero;
        s.m2 = ComponentFn::Zero;
        s.noise_sd = 0.0;
        let d = generate(&s).unwrap();
        assert!(d.y().iter().all(|&y| y == 2.0));
    }

    #[test]
    fn deterministic_and_stream_split() {
        let s = spec(50);
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        assert_eq!(generate(&s).unwrap(), generate_replicate(&s, 0).unwrap());
        assert_ne!(generate_replicate(&s, 1).unwrap(), generate_replicate(&s, 2).unwrap());
        let mut other = s.clone();
        other.seed = 43;
        assert_ne!(generate(&s).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn components_centered_and_mean_near_alpha() {
        let s = spec(10_000);
        let d = generate(&s).unwrap();
        let n = d.len() as f64;
        let m1: Vec<f64> = d.u().iter().map(|&u| ComponentFn::Sine.eval(u)).collect();
        let m1_mean = m1.iter().sum::<f64>() / n;
        let centered_mean = m1.iter().map(|v| v - m1_mean).sum::<f64>() / n;
        assert!(centered_mean.abs() < 1e-12);
        assert!((d.mean_y() - s.alpha).abs() < 3.0 * s.noise_sd / n.sqrt());
        assert!(d.u().iter().all(|&u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn normal_design_correlation() {
        let mut s = spec(20_000);
        s.design = Design::BivariateNormal(BivariateNormal {
            mean: (1.0, -1.0),
            sd: (2.0, 0.5),
            rho: 0.6,
        });
        let d = generate(&s).unwrap();
        let n = d.len() as f64;
        let mu = d.u().iter().sum::<f64>() / n;
        let mv = d.v().iter().sum::<f64>() / n;
        let cov = d.u().iter().zip(d.v()).map(|(a, b)| (a - mu) * (b - mv)).sum::<f64>() / n;
        let corr = cov / (crate::bandwidth::sample_sd(d.u()) * crate::bandwidth::sample_sd(d.v()));
        assert!((corr - 0.6).abs() < 0.03, "{corr}");
        assert!((mu - 1.0).abs() < 0.05 && (mv + 1.0).abs() < 0.02);
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(1);
        assert!(generate(&s).is_err());
        s.n = 10;
        s.noise_sd = -1.0;
        assert!(generate(&s).is_err());
        s.noise_sd = 0.0;
        s.design = Design::BivariateNormal(BivariateNormal::standard(1.0));
        assert!(generate(&s).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_eq!(gap_exceedance_bound(50, 1.0).unwrap().exact, 0.0);
        assert_eq!(gap_exceedance_bound(50, 1.5).unwrap().exact, 0.0);
        let tiny = gap_exceedance_bound(100, 1e-12).unwrap();
        assert!((tiny.exact - 100.0).abs() < 1e-6);
        let b = gap_exceedance_bound(100, 0.1).unwrap();
        let oracle = 100.0 * 0.9f64.powi(99);
        assert!((b.exact - oracle).abs() < 1e-15);
        assert!((b.exact - 2.95e-3).abs() < 0.01e-3);
        assert!(b.exponential >= b.exact);
        assert!(gap_exceedance_bound(1, 0.1).is_err());
        assert!(gap_exceedance_bound(10, 0.0).is_err());
    }

    #[test]
    fn bound_monotone() {
        let mut prev = f64::INFINITY;
        for k in 1..100 {
            let b = gap_exceedance_bound(200, k as f64 / 100.0).unwrap();
            assert!(b.exact <= prev);
            assert!(b.exponential >= b.exact);
            prev = b.exact;
        }
        let mut prev = f64::INFINITY;
        for n in (100..2000).step_by(50) {
            let b = gap_exceedance_bound(n, 0.05).unwrap().exact;
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn or_ratio_examples() {
        let indep = or_density_ratio(&BivariateNormal::standard(0.0), (-4.0, 4.0), (-4.0, 4.0), 0.1).unwrap();
        assert_eq!(indep, 0.0);
        let corr = or_density_ratio(&BivariateNormal::standard(0.5), (-4.0, 4.0), (-4.0, 4.0), 0.01).unwrap();
        // Closed form on the diagonal corner: exp(rho z^2 / (1 + rho)) / sqrt(1 - rho^2) at z = 4.
        let corner = (0.5 * 16.0 / 1.5f64).exp() / 0.75f64.sqrt() - 1.0;
        assert!(corr > 1.0);
        assert!((corr - corner).abs() < 1e-9 * corner, "{corr} vs {corner}");
    }

    #[test]
    fn monte_carlo_wide_uniform() {
        let cfg = MonteCarloConfig {
            spec: spec(30),
            kernel: Kernel::Uniform,
            bandwidth_u: BandwidthRule::Fixed { h: 2.0 },
            bandwidth_v: BandwidthRule::Fixed { h: 2.0 },
            replicates: 10,
            certify: true,
            method: SpectralMethod::Dense,
        };
        let rep = run_monte_carlo(&cfg).unwrap();
        assert_eq!(rep.fraction_gap_ok, 1.0);
        assert_eq!(rep.fraction_certified, Some(1.0));
        assert_eq!(rep.analytic_bound, Some(0.0));
        assert_eq!(rep.rows.len(), 10);
        assert_eq!(rep, run_monte_carlo(&cfg).unwrap());
    }

    #[test]
    fn monte_carlo_small_bandwidth_mixes() {
        let n = 50;
        let rule = BandwidthRule::LogRate { multiplier: 1.5 };
        let cfg = MonteCarloConfig {
            spec: spec(n),
            kernel: Kernel::Epanechnikov,
            bandwidth_u: rule.clone(),
            bandwidth_v: rule,
            replicates: 200,
            certify: true,
            method: SpectralMethod::Dense,
        };
        let rep = run_monte_carlo(&cfg).unwrap();
        assert!(rep.fraction_gap_ok > 0.0 && rep.fraction_gap_ok < 1.0, "{}", rep.fraction_gap_ok);
        assert!(rep.fraction_certified.unwrap() >= rep.fraction_gap_ok);
        for row in &rep.rows {
            if row.gap_ok {
                assert_eq!(row.certified, Some(true));
            }
        }
        let h = 1.5 * (n as f64).ln() / n as f64;
        let b = gap_exceedance_bound(n, h).unwrap().exact;
        assert!((rep.analytic_bound.unwrap() - 2.0 * b).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_half_log_rate_rarely_passes() {
        // With h = 0.5 ln(n) / n at n = 50 each of the 49 spacings exceeds h
        // with probability ~0.14, so both coordinates passing is very rare.
        let rule = BandwidthRule::LogRate { multiplier: 0.5 };
        let cfg = MonteCarloConfig {
            spec: spec(50),
            kernel: Kernel::Uniform,
            bandwidth_u: rule.clone(),
            bandwidth_v: rule,
            replicates: 200,
            certify: false,
            method: SpectralMethod::Dense,
        };
        let rep = run_monte_carlo(&cfg).unwrap();
        assert!(rep.fraction_gap_ok < 0.05);
        assert!(rep.fraction_certified.is_none());
        assert!(rep.rows.iter().all(|r| r.certified.is_none()));
    }

    #[test]
    fn exceedance_frequency_below_bound() {
        let est = gap_exceedance_frequency(100, 0.1, 20_000, 7).unwrap();
        let bound = gap_exceedance_bound(100, 0.1).unwrap().exact;
        assert!(est.frequency <= bound + 3.0 * est.standard_error);
        assert_eq!(est, gap_exceedance_frequency(100, 0.1, 20_000, 7).unwrap());
    }
}
