//! Self-integral and quasi-self-integral estimation over Riemann-system ensembles.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::kernels::{local_bound_probe, KernelHandle, SecondOrderKernel};
use crate::numeric::pairwise_sum;
use crate::riemann::{double_riemann_sum, kernel_riemann_sum, PartitionScheme, RiemannSystem, TagRule};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_DOUBLE_TOL: f64 = 0.03;
pub const DEFAULT_LEVELS: usize = 10;
/// Traces must grow over this many trailing levels to be called unbounded.
pub const GROWTH_WINDOW: usize = 5;
pub const DEFAULT_BOUND_FACTOR: f64 = 1.0;
const FIT_WINDOW: usize = 4;
const PROBE_GRID: usize = 101;
const PROBE_DEPTH: u32 = 8;

const LIMITATION: &str =
    "finite ensemble surrogate: agreement of the listed systems up to n_max, not of all Riemann systems";

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Converged { value: f64 },
    TagDependent { values: BTreeMap<String, f64> },
    Unbounded { system: String, growth: Vec<f64> },
}

impl Verdict {
    pub fn value(&self) -> Option<f64> {
        match self {
            Verdict::Converged { value } => Some(*value),
            _ => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Verdict::Converged { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemTrace {
    pub system: String,
    /// `[n, sum]` per level.
    pub points: Vec<(usize, f64)>,
    pub extrapolated: f64,
    pub previous_extrapolated: f64,
    pub extrapolation_applied: bool,
    #[serde(skip)]
    deterministic: bool,
}

impl SystemTrace {
    fn new(system: String, points: Vec<(usize, f64)>, deterministic: bool) -> Self {
        let last = points.last().map_or(f64::NAN, |p| p.1);
        let previous = if points.len() >= 2 { points[points.len() - 2].1 } else { last };
        Self {
            system,
            points,
            extrapolated: last,
            previous_extrapolated: previous,
            extrapolation_applied: false,
            deterministic,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn last(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfIntegralReport {
    pub kernel: String,
    pub domain: Vec<[f64; 2]>,
    pub verdict: Verdict,
    pub value: Option<f64>,
    pub tol: f64,
    pub n_max: usize,
    pub bound: Option<f64>,
    /// Pooled convergence exponent `p` in `sum(n) - limit ~ n^-p`, when measurable.
    pub rate_exponent: Option<f64>,
    pub traces: Vec<SystemTrace>,
    pub limitation: &'static str,
}

impl SelfIntegralReport {
    pub fn trace(&self, system: &str) -> Option<&SystemTrace> {
        self.traces.iter().find(|t| t.system == system)
    }
}

/// Tunables shared by single and double estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateOptions {
    pub levels: usize,
    pub bound_factor: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { levels: DEFAULT_LEVELS, bound_factor: DEFAULT_BOUND_FACTOR }
    }
}

/// `{uniform, dyadic, random} x {left, right, midpoint, random}`.
pub fn default_ensemble(domain: Interval, seed: u64) -> Vec<RiemannSystem> {
    let schemes = [PartitionScheme::Uniform, PartitionScheme::Dyadic, PartitionScheme::Random { seed }];
    let tags = [TagRule::Left, TagRule::Right, TagRule::Midpoint, TagRule::Random { seed: seed.wrapping_add(1) }];
    schemes.iter().flat_map(|&s| tags.iter().map(move |&t| RiemannSystem::new(domain, s, t))).collect()
}

/// Four systems used on each axis of double sums.
pub fn default_quasi_ensemble(domain: Interval, seed: u64) -> Vec<RiemannSystem> {
    vec![
        RiemannSystem::new(domain, PartitionScheme::Uniform, TagRule::Left),
        RiemannSystem::new(domain, PartitionScheme::Uniform, TagRule::Midpoint),
        RiemannSystem::new(domain, PartitionScheme::Dyadic, TagRule::Right),
        RiemannSystem::new(domain, PartitionScheme::Random { seed }, TagRule::Random { seed: seed.wrapping_add(1) }),
    ]
}

/// `n_max / 2^k` for the trailing `levels` doublings, smallest first.
pub fn level_sequence(n_max: usize, levels: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..levels.max(1)).rev().map(|k| n_max >> k).filter(|&n| n >= 1).collect();
    out.dedup();
    out
}

fn check_ensemble(ensemble: &[RiemannSystem], domain: &Interval) -> Result<()> {
    if ensemble.is_empty() {
        return Err(Error::InvalidParameter("ensemble must not be empty".into()));
    }
    if let Some(bad) = ensemble.iter().find(|s| s.domain() != *domain) {
        return Err(Error::InvalidParameter(format!("system {} is not over {}", bad.id(), domain)));
    }
    Ok(())
}

pub fn estimate_self_integral(
    k: &KernelHandle,
    domain: &Interval,
    ensemble: &[RiemannSystem],
    n_max: usize,
    tol: f64,
) -> Result<SelfIntegralReport> {
    estimate_self_integral_with(k, domain, ensemble, n_max, tol, EstimateOptions::default())
}

pub fn estimate_self_integral_with(
    k: &KernelHandle,
    domain: &Interval,
    ensemble: &[RiemannSystem],
    n_max: usize,
    tol: f64,
    opts: EstimateOptions,
) -> Result<SelfIntegralReport> {
    k.check_set(domain)?;
    check_ensemble(ensemble, domain)?;
    let levels = level_sequence(n_max, opts.levels);
    let traces = ensemble
        .par_iter()
        .map(|sys| -> Result<SystemTrace> {
            let points = levels
                .iter()
                .map(|&n| Ok((n, kernel_riemann_sum(k, &sys.build_level(n)?))))
                .collect::<Result<Vec<_>>>()?;
            Ok(SystemTrace::new(sys.id(), points, sys.is_deterministic()))
        })
        .collect::<Result<Vec<_>>>()?;
    let bound = opts.bound_factor * local_bound_probe(k, domain, domain, PROBE_GRID, PROBE_DEPTH)?;
    Ok(judge(k.label(), vec![[domain.lo, domain.hi]], traces, n_max, tol, Some(bound)))
}

/// Double-limit verdict over all pairs of the two ensembles, levels `n = m`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_quasi_self_integral(
    k2: &SecondOrderKernel,
    a: &Interval,
    b: &Interval,
    ensemble_a: &[RiemannSystem],
    ensemble_b: &[RiemannSystem],
    n_max: usize,
    tol: f64,
    opts: EstimateOptions,
) -> Result<SelfIntegralReport> {
    k2.base.check_set(a)?;
    k2.base.check_set(b)?;
    check_ensemble(ensemble_a, a)?;
    check_ensemble(ensemble_b, b)?;
    let levels = level_sequence(n_max, opts.levels);
    let pairs: Vec<(&RiemannSystem, &RiemannSystem)> =
        ensemble_a.iter().flat_map(|sa| ensemble_b.iter().map(move |sb| (sa, sb))).collect();
    let traces = pairs
        .par_iter()
        .map(|(sa, sb)| -> Result<SystemTrace> {
            let points = levels
                .iter()
                .map(|&n| Ok((n, double_riemann_sum(k2, &sa.build_level(n)?, &sb.build_level(n)?))))
                .collect::<Result<Vec<_>>>()?;
            Ok(SystemTrace::new(
                format!("{} x {}", sa.id(), sb.id()),
                points,
                sa.is_deterministic() && sb.is_deterministic(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let probe_a = local_bound_probe(&k2.base, b, a, PROBE_GRID, PROBE_DEPTH)?;
    let probe_b = local_bound_probe(&k2.base, a, b, PROBE_GRID, PROBE_DEPTH)?;
    let bound = opts.bound_factor * probe_a * probe_b;
    Ok(judge(
        format!("second_order[{}]", k2.base.label()),
        vec![[a.lo, a.hi], [b.lo, b.hi]],
        traces,
        n_max,
        tol,
        Some(bound),
    ))
}

fn judge(
    kernel: String,
    domain: Vec<[f64; 2]>,
    mut traces: Vec<SystemTrace>,
    n_max: usize,
    tol: f64,
    bound: Option<f64>,
) -> SelfIntegralReport {
    let rate = pooled_rate(&traces);
    if let Some(p) = rate {
        for t in traces.iter_mut() {
            extrapolate(t, p);
        }
    }
    let verdict = growth_verdict(&traces, bound).unwrap_or_else(|| agreement_verdict(&traces, tol));
    SelfIntegralReport {
        kernel,
        domain,
        value: verdict.value(),
        verdict,
        tol,
        n_max,
        bound,
        rate_exponent: rate,
        traces,
        limitation: LIMITATION,
    }
}

fn growth_verdict(traces: &[SystemTrace], bound: Option<f64>) -> Option<Verdict> {
    let bound = bound?;
    traces.iter().find_map(|t| {
        let v = t.values();
        let exceeds = v.last().is_some_and(|last| last.abs() > bound);
        if v.len() < GROWTH_WINDOW || !exceeds {
            return None;
        }
        let tail = &v[v.len() - GROWTH_WINDOW..];
        let increasing = tail.windows(2).all(|w| w[1].abs() > w[0].abs());
        increasing.then(|| Verdict::Unbounded { system: t.system.clone(), growth: v })
    })
}

fn agreement_verdict(traces: &[SystemTrace], tol: f64) -> Verdict {
    let finals: Vec<f64> = traces.iter().map(|t| t.extrapolated).collect();
    let steady = traces.iter().all(|t| (t.extrapolated - t.previous_extrapolated).abs() <= tol);
    let hi = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = finals.iter().copied().fold(f64::INFINITY, f64::min);
    if steady && hi - lo <= tol {
        Verdict::Converged { value: pairwise_sum(&finals) / finals.len() as f64 }
    } else {
        Verdict::TagDependent { values: traces.iter().map(|t| (t.system.clone(), t.extrapolated)).collect() }
    }
}

/// Median of `log2(d_{k-1} / d_k)` over deterministic traces whose last three
/// differences shrink monotonically with a common sign.
fn pooled_rate(traces: &[SystemTrace]) -> Option<f64> {
    let mut rates: Vec<f64> = traces
        .iter()
        .filter(|t| t.deterministic)
        .filter_map(|t| {
            let v = t.values();
            if v.len() < 4 {
                return None;
            }
            let d: Vec<f64> = v[v.len() - 4..].windows(2).map(|w| w[1] - w[0]).collect();
            let same_sign = d.iter().all(|&x| x > 0.0) || d.iter().all(|&x| x < 0.0);
            let shrinking = d[1].abs() < d[0].abs() && d[2].abs() < d[1].abs();
            (same_sign && shrinking).then(|| (d[1] / d[2]).log2())
        })
        .filter(|p| p.is_finite())
        .collect();
    if rates.is_empty() {
        return None;
    }
    rates.sort_by(f64::total_cmp);
    let m = rates.len();
    let median = if m % 2 == 1 { rates[m / 2] } else { 0.5 * (rates[m / 2 - 1] + rates[m / 2]) };
    Some(median.clamp(0.05, 4.0))
}

/// Extrapolation is applied only when the trailing differences share a sign
/// and decay at roughly the pooled ratio; otherwise raw sums are kept.
fn extrapolate(t: &mut SystemTrace, p: f64) {
    let ns: Vec<usize> = t.points.iter().map(|q| q.0).collect();
    let v = t.values();
    if v.len() < FIT_WINDOW + 2 {
        return;
    }
    let r = 0.5f64.powf(p);
    let d: Vec<f64> = v[v.len() - FIT_WINDOW - 1..].windows(2).map(|w| w[1] - w[0]).collect();
    let same_sign = d.iter().all(|&x| x > 0.0) || d.iter().all(|&x| x < 0.0);
    let geometric = d.windows(2).all(|w| {
        let q = w[1] / w[0];
        q > 0.5 * r && q < 1.5 * r
    });
    if !(same_sign && geometric) {
        return;
    }
    t.extrapolated = richardson(&ns, &v, p);
    t.previous_extrapolated = richardson(&ns[..ns.len() - 1], &v[..v.len() - 1], p);
    t.extrapolation_applied = true;
}

/// Fits `d_k = C n_k^-p` to the last differences (weights `n^2`) and adds the
/// geometric tail to the last value.
fn richardson(ns: &[usize], v: &[f64], p: f64) -> f64 {
    let m = FIT_WINDOW.min(v.len() - 1);
    let start = v.len() - m - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in start + 1..v.len() {
        let n = ns[k] as f64;
        let w = n.powf(-p);
        let wt = n * n;
        num += wt * (v[k] - v[k - 1]) * w;
        den += wt * w * w;
    }
    let c = num / den;
    let r = 0.5f64.powf(p);
    let n_last = *ns.last().expect("non-empty trace") as f64;
    v[v.len() - 1] + c * n_last.powf(-p) * r / (1.0 - r)
}

/// Self-integrals over `[lo, c)`, `[c, hi]` and the whole domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Additivity {
    pub left: f64,
    pub right: f64,
    pub whole: f64,
}

impl Additivity {
    pub fn defect(&self) -> f64 {
        (self.left + self.right - self.whole).abs()
    }
}

pub fn additivity_check(
    k: &KernelHandle,
    domain: &Interval,
    split: f64,
    ensemble: &[RiemannSystem],
    n_max: usize,
    tol: f64,
) -> Result<Additivity> {
    let whole = estimate_self_integral(k, domain, ensemble, n_max, tol)?;
    let whole_value = whole.verdict.value().ok_or_else(|| Error::NotConverged(format!("{:?}", whole.verdict)))?;
    let (left_dom, right_dom) = domain.split_at(split)?;
    let restrict = |d: Interval| -> Result<Vec<RiemannSystem>> {
        ensemble
            .iter()
            .map(|s| {
                s.on_domain(d).ok_or_else(|| Error::InvalidParameter("merged systems cannot be restricted".into()))
            })
            .collect()
    };
    let half = |d: Interval| -> Result<f64> {
        let r = estimate_self_integral(k, &d, &restrict(d)?, n_max, tol)?;
        r.verdict.value().ok_or_else(|| Error::NotConverged(format!("on {d}: {:?}", r.verdict)))
    };
    Ok(Additivity { left: half(left_dom)?, right: half(right_dom)?, whole: whole_value })
}
