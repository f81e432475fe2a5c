//! Function-measure kernels `K(x, A)` and kernel-level identities.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::measures::{total_variation_of, uniform_cells, Measure1D, Measure2D, RealFn, RealFn2};
use crate::numeric::{pairwise_sum, pairwise_sum_by};
use crate::quadrature;

type EvalFn = Arc<dyn Fn(f64, &Interval) -> f64 + Send + Sync>;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct KernelMeta {
    pub name: String,
    pub params: BTreeMap<String, f64>,
}

/// Covariance pair `(C_Z, C_M)` realising a kernel as `Cov(Z(x), M(A))`.
#[derive(Clone)]
pub struct CrossCovPair {
    pub cov_z: RealFn2,
    pub cov_m: Measure2D,
}

impl CrossCovPair {
    pub fn new(cov_z: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, cov_m: Measure2D) -> Self {
        Self { cov_z: Arc::new(cov_z), cov_m }
    }
}

#[derive(Clone)]
pub struct KernelHandle {
    eval: EvalFn,
    domain: Interval,
    meta: KernelMeta,
    pair: Option<CrossCovPair>,
}

impl std::fmt::Debug for KernelHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelHandle")
            .field("meta", &self.meta)
            .field("domain", &self.domain)
            .field("cross_cov_pair", &self.pair.is_some())
            .finish()
    }
}

impl KernelHandle {
    pub fn new(
        name: impl Into<String>,
        domain: Interval,
        eval: impl Fn(f64, &Interval) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            domain,
            meta: KernelMeta { name: name.into(), params: BTreeMap::new() },
            pair: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.meta.params.insert(key.to_string(), value);
        self
    }

    pub fn with_pair(mut self, pair: CrossCovPair) -> Self {
        self.pair = Some(pair);
        self
    }

    /// Evaluates without the domain check; hot loops validate once up front.
    #[inline]
    pub fn eval(&self, x: f64, a: &Interval) -> f64 {
        (self.eval)(x, a)
    }

    pub fn try_eval(&self, x: f64, a: &Interval) -> Result<f64> {
        self.check_set(a)?;
        if !self.domain.closure_contains(x) {
            return Err(Error::InvalidParameter(format!("point {x} outside kernel domain {}", self.domain)));
        }
        Ok(self.eval(x, a))
    }

    pub fn check_set(&self, a: &Interval) -> Result<()> {
        if a.lo < self.domain.lo || a.hi > self.domain.hi {
            return Err(Error::OutsideDomain {
                lo: a.lo,
                hi: a.hi,
                domain_lo: self.domain.lo,
                domain_hi: self.domain.hi,
            });
        }
        Ok(())
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn meta(&self) -> &KernelMeta {
        &self.meta
    }

    pub fn pair(&self) -> Option<&CrossCovPair> {
        self.pair.as_ref()
    }

    /// Descriptor such as `fbm(hurst=0.75)`.
    pub fn label(&self) -> String {
        if self.meta.params.is_empty() {
            return self.meta.name.clone();
        }
        let params: Vec<String> = self.meta.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.meta.name, params.join(","))
    }
}

/// Bivariate test function with a shape tag used by diagonal-aware quadrature.
#[derive(Clone)]
pub struct Psi2 {
    pub label: String,
    f: RealFn2,
    pub shape: PsiShape,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsiShape {
    Continuous,
    /// `(t, s) -> 1{s <= t}` when closed, `1{s < t}` otherwise.
    LowerIndicator {
        closed: bool,
    },
}

impl Psi2 {
    pub fn new(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f), shape: PsiShape::Continuous }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), move |_, _| c)
    }

    pub fn product() -> Self {
        Self::new("x*y", |x, y| x * y)
    }

    pub fn gaussian(scale: f64) -> Self {
        Self::new(format!("exp(-(x-y)^2/{scale})"), move |x, y| (-(x - y) * (x - y) / scale).exp())
    }

    pub fn lower_indicator(closed: bool) -> Self {
        let (label, f): (&str, RealFn2) = if closed {
            ("1{s<=t}", Arc::new(|t: f64, s: f64| if s <= t { 1.0 } else { 0.0 }))
        } else {
            ("1{s<t}", Arc::new(|t: f64, s: f64| if s < t { 1.0 } else { 0.0 }))
        };
        Self { label: label.to_string(), f, shape: PsiShape::LowerIndicator { closed } }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }
}

impl std::fmt::Debug for Psi2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Psi2({})", self.label)
    }
}

/// `((x, y), A x B) -> K(y, A) K(x, B)`
#[derive(Clone, Debug)]
pub struct SecondOrderKernel {
    pub base: KernelHandle,
}

impl SecondOrderKernel {
    pub fn new(base: KernelHandle) -> Self {
        Self { base }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64, a: &Interval, b: &Interval) -> f64 {
        self.base.eval(y, a) * self.base.eval(x, b)
    }
}

/// `((x, y), A) -> K(x, A) - K(y, A)`
#[derive(Clone, Debug)]
pub struct IncrementKernel {
    pub base: KernelHandle,
}

impl IncrementKernel {
    pub fn new(base: KernelHandle) -> Self {
        Self { base }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64, a: &Interval) -> f64 {
        self.base.eval(x, a) - self.base.eval(y, a)
    }
}

// ---- catalog ----------------------------------------------------------------

pub fn tensor(f: RealFn, f_label: &str, mu: Measure1D, domain: Interval) -> KernelHandle {
    let fz = f.clone();
    let mu_eval = mu.clone();
    KernelHandle::new(format!("tensor[{f_label}]"), domain, move |x, a| f(x) * mu_eval.mass(a))
        .with_pair(CrossCovPair::new(move |s, t| fz(s) * fz(t), Measure2D::Tensor(mu.clone(), mu)))
}

/// `K(x, A) = lambda(A ∩ [0, x])` on `[0, 1]`.
pub fn brownian_wn() -> KernelHandle {
    KernelHandle::new("brownian_wn", Interval::unit(), |x, a| (a.hi.min(x) - a.lo).max(0.0))
        .with_pair(CrossCovPair::new(f64::min, Measure2D::Diagonal(Measure1D::lebesgue())))
}

/// Covariance of fractional Brownian motion.
pub fn fbm_covariance(hurst: f64) -> impl Fn(f64, f64) -> f64 + Send + Sync + Copy + 'static {
    let p = 2.0 * hurst;
    move |t: f64, s: f64| 0.5 * (t.abs().powf(p) + s.abs().powf(p) - (t - s).abs().powf(p))
}

/// Cross-covariance of fBm with its derivative measure, `1/2 < hurst < 1`.
pub fn fbm(hurst: f64) -> Result<KernelHandle> {
    if !(hurst > 0.5 && hurst < 1.0) {
        return Err(Error::InvalidParameter(format!("fbm requires 1/2 < H < 1, got {hurst}")));
    }
    let p = 2.0 * hurst;
    let cov = fbm_covariance(hurst);
    Ok(KernelHandle::new("fbm", Interval::unit(), move |t, a| {
        0.5 * (a.hi.powf(p) - a.lo.powf(p) + (t - a.lo).abs().powf(p) - (t - a.hi).abs().powf(p))
    })
    .with_param("hurst", hurst)
    .with_pair(CrossCovPair::new(cov, Measure2D::increment_of(format!("fbm(H={hurst})"), cov))))
}

/// `K(t, A) = nu([0, t] ∩ A)` on `[0, 1]`.
pub fn orthogonal(nu: Measure1D) -> KernelHandle {
    let nu_eval = nu.clone();
    let nu_cov = nu.clone();
    KernelHandle::new("orthogonal", Interval::unit(), move |t, a| {
        let head = Interval { lo: 0.0, hi: t.max(0.0), closed_left: true, closed_right: true };
        a.intersect(&head).map_or(0.0, |c| nu_eval.mass(&c))
    })
    .with_pair(CrossCovPair::new(
        move |s, t| nu_cov.mass(&Interval { lo: 0.0, hi: s.min(t).max(0.0), closed_left: true, closed_right: true }),
        Measure2D::Diagonal(nu),
    ))
}

const SINGULAR_EXPONENT: f64 = 0.125;

fn singular_primitive(v: f64) -> f64 {
    v.signum() * v.abs().powf(1.0 - SINGULAR_EXPONENT) / (1.0 - SINGULAR_EXPONENT)
}

/// `C_Z(x, y) = int_{-1}^{1} |x-u|^{-1/8} |y-u|^{-1/8} du`
pub fn singular_covariance(x: f64, y: f64) -> f64 {
    if x == y {
        let q = 1.0 - 2.0 * SINGULAR_EXPONENT;
        return ((x + 1.0).powf(q) + (1.0 - x).powf(q)) / q;
    }
    quadrature::integrate_with_breaks(
        |u| (x - u).abs().powf(-SINGULAR_EXPONENT) * (y - u).abs().powf(-SINGULAR_EXPONENT),
        -1.0,
        1.0,
        &[x, y],
        1e-11,
    )
}

/// `K(x, A) = int_A |x-u|^{-1/8} du` on `[-1, 1]`.
pub fn singular() -> KernelHandle {
    let domain = Interval { lo: -1.0, hi: 1.0, closed_left: true, closed_right: true };
    KernelHandle::new("singular", domain, |x, a| singular_primitive(a.hi - x) - singular_primitive(a.lo - x))
        .with_pair(CrossCovPair::new(singular_covariance, Measure2D::Diagonal(Measure1D::lebesgue())))
}

pub const DEFAULT_PSI_MU_PANELS: usize = 512;

/// `K_{psi,mu}(y, A) = int psi(x, y) K(x, A) dmu(x)` over `base_domain`, by a
/// midpoint rule with `panels` cells.
pub fn psi_mu(
    psi: Psi2,
    mu: &Measure1D,
    base: KernelHandle,
    base_domain: Interval,
    domain: Interval,
    panels: usize,
) -> Result<KernelHandle> {
    base.check_set(&base_domain)?;
    base.check_set(&domain)?;
    let cells = uniform_cells(&base_domain, panels.max(1));
    let nodes: Vec<f64> = cells.iter().map(Interval::midpoint).collect();
    let weights: Vec<f64> = cells.iter().map(|c| mu.mass(c)).collect();
    let label = format!("psi_mu[{}|{}]", psi.label, base.label());
    Ok(KernelHandle::new(label, domain, move |y, a| {
        pairwise_sum_by(nodes.len(), &|i| psi.eval(nodes[i], y) * base.eval(nodes[i], a) * weights[i])
    })
    .with_param("panels", panels as f64))
}

// ---- identities and probes --------------------------------------------------

/// Two discretisations of `int_{D_d} int_{D_p} psi(x, y) K(x, dy) dmu(x)`.
///
/// The first integrates `K(x, .)` then `mu` with left tags; the second forms
/// `K_{psi,mu}` with right tags in `x` and self-integrates it with midpoint
/// tags in `y`.
pub fn iterated_integral_both_orders(
    k: &KernelHandle,
    mu: &Measure1D,
    psi: &Psi2,
    d_d: &Interval,
    d_p: &Interval,
    n: usize,
) -> Result<(f64, f64)> {
    k.check_set(d_d)?;
    k.check_set(d_p)?;
    let xs = uniform_cells(d_d, n);
    let ys = uniform_cells(d_p, n);
    let mu_x: Vec<f64> = xs.iter().map(|c| mu.mass(c)).collect();

    let order_a = pairwise_sum_by(xs.len(), &|j| {
        let x = xs[j].lo;
        mu_x[j] * pairwise_sum_by(ys.len(), &|m| psi.eval(x, ys[m].lo) * k.eval(x, &ys[m]))
    });
    let order_b = pairwise_sum_by(ys.len(), &|m| {
        let y = ys[m].midpoint();
        pairwise_sum_by(xs.len(), &|j| {
            let x = xs[j].hi;
            psi.eval(x, y) * k.eval(x, &ys[m]) * mu_x[j]
        })
    });
    Ok((order_a, order_b))
}

/// `|sum_j sum_k a_j b_k K(x_j, E_k)|` against `sqrt(a'C_Z a) sqrt(b'C_M b)`.
pub fn cauchy_schwarz_check(
    k: &KernelHandle,
    points: &[f64],
    sets: &[Interval],
    alpha: &[f64],
    beta: &[f64],
) -> Result<(f64, f64)> {
    let pair = k.pair().ok_or_else(|| Error::NoCovariancePair(k.name().to_string()))?;
    if points.len() != alpha.len() || sets.len() != beta.len() {
        return Err(Error::InvalidParameter("coefficient vectors must match points and sets".into()));
    }
    let lhs = pairwise_sum_by(points.len(), &|j| {
        alpha[j] * pairwise_sum_by(sets.len(), &|m| beta[m] * k.eval(points[j], &sets[m]))
    })
    .abs();
    let qz = pairwise_sum_by(points.len(), &|i| {
        alpha[i] * pairwise_sum_by(points.len(), &|j| alpha[j] * (pair.cov_z)(points[i], points[j]))
    });
    let qm = pairwise_sum_by(sets.len(), &|i| {
        beta[i] * pairwise_sum_by(sets.len(), &|j| beta[j] * pair.cov_m.mass2d(&sets[i], &sets[j]))
    });
    Ok((lhs, qz.max(0.0).sqrt() * qm.max(0.0).sqrt()))
}

fn probe_grid(d: &Interval, grid_n: usize) -> Vec<f64> {
    let last = grid_n.max(2) - 1;
    (0..=last).map(|i| if i == last { d.hi } else { d.lo + d.len() * i as f64 / last as f64 }).collect()
}

/// `max_x |K|(x, B)` over an equispaced grid of `D`, with `|K|` estimated dyadically.
pub fn local_bound_probe(k: &KernelHandle, d: &Interval, b: &Interval, grid_n: usize, depth: u32) -> Result<f64> {
    k.check_set(b)?;
    if grid_n < 2 {
        return Err(Error::InvalidParameter("probe grid needs at least 2 points".into()));
    }
    let values: Vec<f64> =
        probe_grid(d, grid_n).into_iter().map(|x| total_variation_of(|c| k.eval(x, c), b, depth)).collect();
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// `sup_x sqrt(C_Z(x, x)) * sqrt(|C_M|(B x B))` on the same grid as the probe.
pub fn local_bound_ceiling(k: &KernelHandle, d: &Interval, b: &Interval, grid_n: usize, depth: u32) -> Result<f64> {
    let pair = k.pair().ok_or_else(|| Error::NoCovariancePair(k.name().to_string()))?;
    let sup_z = probe_grid(d, grid_n).into_iter().map(|x| (pair.cov_z)(x, x).max(0.0).sqrt()).fold(0.0, f64::max);
    Ok(sup_z * pair.cov_m.total_variation_estimate(b, b, depth).sqrt())
}

/// Kernel additivity defect `K(x, I) - K(x, I_1) - K(x, I_2)` for a split at `c`.
pub fn additivity_defect(k: &KernelHandle, x: f64, i: &Interval, c: f64) -> Result<f64> {
    let (left, right) = i.split_at(c)?;
    Ok(k.eval(x, i) - pairwise_sum(&[k.eval(x, &left), k.eval(x, &right)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::closed(lo, hi).unwrap()
    }

    #[test]
    fn catalog_point_values() {
        assert_eq!(brownian_wn().eval(0.5, &iv(0.0, 1.0)), 0.5);
        assert_eq!(fbm(0.75).unwrap().eval(0.0, &iv(0.0, 1.0)), 0.0);
        assert_abs_diff_eq!(singular().eval(0.0, &iv(-1.0, 1.0)), 16.0 / 7.0, epsilon = 1e-14);
    }

    #[test]
    fn fbm_rejects_hurst_outside_range() {
        assert!(fbm(0.5).is_err());
        assert!(fbm(1.0).is_err());
        assert!(fbm(0.3).is_err());
    }

    #[test]
    fn fbm_closed_form_matches_derivative_integral() {
        let h = 0.75;
        let k = fbm(h).unwrap();
        for &(t, a, b) in &[(0.3, 0.1, 0.9), (0.0, 0.2, 0.4), (1.0, 0.0, 1.0), (0.5, 0.5, 0.7)] {
            let integrand = |u: f64| h * (u.powf(2.0 * h - 1.0) + (t - u).abs().powf(2.0 * h - 1.0) * (t - u).signum());
            let quad = quadrature::integrate_with_breaks(integrand, a, b, &[t], 1e-12);
            assert_abs_diff_eq!(k.eval(t, &iv(a, b)), quad, epsilon = 1e-8);
        }
    }

    #[test]
    fn second_order_swaps_arguments() {
        let k2 = SecondOrderKernel::new(brownian_wn());
        assert_eq!(k2.eval(1.0, 0.0, &iv(0.0, 1.0), &iv(0.0, 1.0)), 0.0);
        let f = fbm(0.75).unwrap();
        assert_eq!(SecondOrderKernel::new(f).eval(1.0, 1.0, &iv(0.0, 1.0), &iv(0.0, 1.0)), 1.0);
    }

    #[test]
    fn increment_kernel_vanishes_on_diagonal() {
        let inc = IncrementKernel::new(fbm(0.8).unwrap());
        assert_eq!(inc.eval(0.37, 0.37, &iv(0.1, 0.6)), 0.0);
    }

    #[test]
    fn cauchy_schwarz_equality_case() {
        let (lhs, rhs) = cauchy_schwarz_check(&brownian_wn(), &[1.0], &[iv(0.0, 1.0)], &[1.0], &[1.0]).unwrap();
        assert_eq!((lhs, rhs), (1.0, 1.0));
        let (l0, r0) = cauchy_schwarz_check(&brownian_wn(), &[0.4], &[iv(0.0, 1.0)], &[0.0], &[1.0]).unwrap();
        assert_eq!((l0, r0), (0.0, 0.0));
    }

    #[test]
    fn probes_on_catalog() {
        let unit = Interval::unit();
        let t = tensor(Arc::new(|_| 1.0), "1", Measure1D::lebesgue(), unit);
        assert_abs_diff_eq!(local_bound_probe(&t, &unit, &unit, 11, 4).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(local_bound_probe(&brownian_wn(), &unit, &unit, 11, 4).unwrap(), 1.0, epsilon = 1e-15);
        let s = singular();
        let d = s.domain();
        let probe = local_bound_probe(&s, &d, &d, 101, 6).unwrap();
        assert_abs_diff_eq!(probe, 16.0 / 7.0, epsilon = 1e-12);
        assert!(probe <= local_bound_ceiling(&s, &d, &d, 101, 6).unwrap());
    }

    #[test]
    fn singular_covariance_diagonal_matches_quadrature() {
        let x = 0.3;
        let quad = quadrature::integrate_with_breaks(|u: f64| (x - u).abs().powf(-0.25), -1.0, 1.0, &[x], 1e-12);
        assert_abs_diff_eq!(singular_covariance(x, x), quad, epsilon = 1e-9);
    }

    #[test]
    fn iterated_orders_on_examples() {
        let unit = Interval::unit();
        let one = tensor(Arc::new(|_| 1.0), "1", Measure1D::lebesgue(), unit);
        let (a, b) =
            iterated_integral_both_orders(&one, &Measure1D::lebesgue(), &Psi2::constant(1.0), &unit, &unit, 64)
                .unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-14);
        let (a, b) =
            iterated_integral_both_orders(&one, &Measure1D::lebesgue(), &Psi2::product(), &unit, &unit, 2048).unwrap();
        assert_abs_diff_eq!(a, 0.25, epsilon = 1e-3);
        assert_abs_diff_eq!(b, 0.25, epsilon = 1e-3);
    }

    #[test]
    fn psi_mu_reproduces_weighted_mass() {
        let unit = Interval::unit();
        let one = tensor(Arc::new(|_| 1.0), "1", Measure1D::lebesgue(), unit);
        let k = psi_mu(Psi2::product(), &Measure1D::lebesgue(), one, unit, unit, 512).unwrap();
        // int x y dx * lambda(A) = y/2 * |A|
        assert_abs_diff_eq!(k.eval(0.8, &iv(0.0, 0.5)), 0.8 * 0.5 * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn domain_check_rejects_outside_sets() {
        assert!(brownian_wn().try_eval(0.5, &iv(0.5, 1.5)).is_err());
        assert!(matches!(singular().check_set(&iv(-2.0, 0.0)), Err(Error::OutsideDomain { .. })));
    }
}
