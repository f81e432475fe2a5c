//! Tensor products of jointly Gaussian random measures.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::JITTER_SCHEDULE;
use crate::interval::Interval;
use crate::kernels::{Psi2, PsiShape};
use crate::measures::{uniform_cells, Measure1D, Measure2D};
use crate::numeric::{mix_seed, moments, pairwise_sum_by};
use crate::riemann::{PartitionScheme, RiemannSystem, TagRule};

/// Covariance structure of a pair `(M1, M2)`: `C_M1`, `C_M2` and the cross
/// measure `C_M1M2`.
#[derive(Clone, Debug)]
pub struct TensorProductModel {
    pub c_m1: Measure2D,
    pub c_m2: Measure2D,
    pub c_m12: Measure2D,
    pub d1: Interval,
    pub d2: Interval,
    /// `M2` is the same random measure as `M1`.
    pub self_pair: bool,
}

impl TensorProductModel {
    pub fn new(c_m1: Measure2D, c_m2: Measure2D, c_m12: Measure2D, d1: Interval, d2: Interval) -> Self {
        Self { c_m1, c_m2, c_m12, d1, d2, self_pair: false }
    }

    /// `M1 = M2 = W` with `C_W = Diagonal(nu)`.
    pub fn orthogonal_self_pair(nu: Measure1D, d: Interval) -> Self {
        let c = Measure2D::Diagonal(nu);
        Self { c_m1: c.clone(), c_m2: c.clone(), c_m12: c, d1: d, d2: d, self_pair: true }
    }

    pub fn white_noise_self_pair(d: Interval) -> Self {
        Self::orthogonal_self_pair(Measure1D::lebesgue(), d)
    }

    pub fn independent_white_noise(d1: Interval, d2: Interval) -> Self {
        let c = Measure2D::Diagonal(Measure1D::lebesgue());
        Self::new(c.clone(), c, Measure2D::zero(), d1, d2)
    }
}

fn cell_matrix(m: &Measure2D, rows: &[Interval], cols: &[Interval]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |j, k| m.mass2d(&rows[j], &cols[k]))
}

/// Values of `psi` per cell pair. Indicators are resolved by position: cells
/// fully below the diagonal get 1, fully above get 0, and straddling cells
/// follow the closed/open flag.
fn psi_matrix(psi: &Psi2, rows: &[Interval], cols: &[Interval]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |j, k| {
        let (t, s) = (&rows[j], &cols[k]);
        match psi.shape {
            PsiShape::Continuous => psi.eval(t.midpoint(), s.midpoint()),
            PsiShape::LowerIndicator { closed } => {
                if s.hi <= t.lo {
                    1.0
                } else if s.lo >= t.hi {
                    0.0
                } else if closed {
                    1.0
                } else {
                    0.0
                }
            }
        }
    })
}

fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let rows: Vec<f64> = (0..a.nrows()).map(|j| pairwise_sum_by(a.ncols(), &|k| a[(j, k)] * b[(j, k)])).collect();
    crate::numeric::pairwise_sum(&rows)
}

/// `int psi dC_M1M2` on an `n x n` grid.
pub fn tensor_mean(model: &TensorProductModel, psi: &Psi2, n: usize) -> f64 {
    let rows = uniform_cells(&model.d1, n);
    let cols = uniform_cells(&model.d2, n);
    frobenius(&psi_matrix(psi, &rows, &cols), &cell_matrix(&model.c_m12, &rows, &cols))
}

/// `Cov(<M1 x M2, psi1>, <M1 x M2, psi2>)` from the two cross-pattern product
/// measures, composed cell by cell.
pub fn tensor_cov(model: &TensorProductModel, psi1: &Psi2, psi2: &Psi2, n: usize) -> f64 {
    let rows = uniform_cells(&model.d1, n);
    let cols = uniform_cells(&model.d2, n);
    let c1 = cell_matrix(&model.c_m1, &rows, &rows);
    let c2 = cell_matrix(&model.c_m2, &cols, &cols);
    let c12 = cell_matrix(&model.c_m12, &rows, &cols);
    let p1 = psi_matrix(psi1, &rows, &cols);
    let p2 = psi_matrix(psi2, &rows, &cols);
    // sum C1[j,j'] C2[k,k'] psi1[j,k] psi2[j',k']
    let term1 = frobenius(&c1, &(&p1 * &c2 * p2.transpose()));
    // sum C12[j,k'] C12[j',k] psi1[j,k] psi2[j',k']
    let term2 = frobenius(&p1, &(&c12 * p2.transpose() * &c12));
    term1 + term2
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FubiniEstimate {
    pub psi: String,
    pub order_a: f64,
    pub order_b: f64,
    /// Standard error of the per-sample difference of the two orders.
    pub se: f64,
    pub analytic: f64,
    /// `|E[order_a] - E[order_b]|` from the tag placement alone, exact for the grid.
    pub slack: f64,
    /// `|order_a - order_b| <= 3 se + slack`.
    pub agree: bool,
}

struct CellSampler {
    factor: DMatrix<f64>,
    n1: usize,
    self_pair: bool,
}

impl CellSampler {
    fn new(model: &TensorProductModel, rows: &[Interval], cols: &[Interval]) -> Result<Self> {
        let c1 = cell_matrix(&model.c_m1, rows, rows);
        let joint = if model.self_pair {
            c1
        } else {
            let c2 = cell_matrix(&model.c_m2, cols, cols);
            let c12 = cell_matrix(&model.c_m12, rows, cols);
            let (n1, n2) = (rows.len(), cols.len());
            let mut j = DMatrix::zeros(n1 + n2, n1 + n2);
            j.view_mut((0, 0), (n1, n1)).copy_from(&c1);
            j.view_mut((0, n1), (n1, n2)).copy_from(&c12);
            j.view_mut((n1, 0), (n2, n1)).copy_from(&c12.transpose());
            j.view_mut((n1, n1), (n2, n2)).copy_from(&c2);
            j
        };
        for &jitter in JITTER_SCHEDULE.iter() {
            let mut a = joint.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += jitter;
            }
            if let Some(ch) = a.cholesky() {
                return Ok(Self { factor: ch.l(), n1: rows.len(), self_pair: model.self_pair });
            }
        }
        Err(Error::Factorization { jitter: *JITTER_SCHEDULE.last().expect("non-empty schedule") })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let dim = self.factor.nrows();
        let xi = nalgebra::DVector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)));
        let x = &self.factor * xi;
        if self.self_pair {
            (x.as_slice().to_vec(), x.as_slice().to_vec())
        } else {
            (x.as_slice()[..self.n1].to_vec(), x.as_slice()[self.n1..].to_vec())
        }
    }
}

/// Monte Carlo iterated integrals: order A integrates `M2` first with left
/// tags, order B integrates `M1` first with right tags.
pub fn fubini_mc_check(
    model: &TensorProductModel,
    psi: &Psi2,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<FubiniEstimate> {
    if model.self_pair && model.d1 != model.d2 {
        return Err(Error::InvalidParameter("self pair needs a common domain".into()));
    }
    let rows = uniform_cells(&model.d1, n);
    let cols = uniform_cells(&model.d2, n);
    let sampler = CellSampler::new(model, &rows, &cols)?;
    let left = DMatrix::from_fn(n, n, |j, k| psi.eval(rows[j].lo, cols[k].lo));
    let right = DMatrix::from_fn(n, n, |j, k| psi.eval(rows[j].hi, cols[k].hi));
    let draws: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, s as u64));
            let (m1, m2) = sampler.draw(&mut rng);
            let a = pairwise_sum_by(n, &|j| m1[j] * pairwise_sum_by(n, &|k| left[(j, k)] * m2[k]));
            let b = pairwise_sum_by(n, &|k| m2[k] * pairwise_sum_by(n, &|j| right[(j, k)] * m1[j]));
            (a, b)
        })
        .collect();
    let a: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let b: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let diff: Vec<f64> = draws.iter().map(|d| d.0 - d.1).collect();
    let c12 = cell_matrix(&model.c_m12, &rows, &cols);
    let slack = (frobenius(&left, &c12) - frobenius(&right, &c12)).abs();
    let (order_a, order_b, se) = (moments(&a).mean, moments(&b).mean, moments(&diff).se_mean);
    Ok(FubiniEstimate {
        psi: psi.label.clone(),
        order_a,
        order_b,
        se,
        analytic: tensor_mean(model, psi, n),
        slack,
        agree: (order_a - order_b).abs() <= 3.0 * se + slack,
    })
}

/// Closed and open indicator means on an orthogonal self-pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndicatorDemo {
    pub closed: f64,
    pub open: f64,
    pub gap: f64,
}

pub fn indicator_demo(nu: Measure1D, d: Interval, n: usize) -> IndicatorDemo {
    let model = TensorProductModel::orthogonal_self_pair(nu, d);
    let closed = tensor_mean(&model, &Psi2::lower_indicator(true), n);
    let open = tensor_mean(&model, &Psi2::lower_indicator(false), n);
    IndicatorDemo { closed, open, gap: closed - open }
}

/// Monte Carlo of `sum_j M([lo, t_j]) M(I_j)` for white noise under two tag rules.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TagDependence {
    pub rule_a: String,
    pub rule_b: String,
    pub mean_a: f64,
    pub se_a: f64,
    pub mean_b: f64,
    pub se_b: f64,
    /// Exact expectations `sum_j nu([lo_j, t_j])`.
    pub expected_a: f64,
    pub expected_b: f64,
}

pub fn tag_dependence_mc(
    d: Interval,
    n: usize,
    rule_a: TagRule,
    rule_b: TagRule,
    samples: usize,
    seed: u64,
) -> Result<TagDependence> {
    let la = RiemannSystem::new(d, PartitionScheme::Uniform, rule_a).build_level(n)?;
    let lb = RiemannSystem::new(d, PartitionScheme::Uniform, rule_b).build_level(n)?;
    let mut bounds: Vec<f64> = la
        .cells
        .iter()
        .flat_map(|c| [c.lo, c.hi])
        .chain(la.tags.iter().copied())
        .chain(lb.tags.iter().copied())
        .collect();
    bounds.sort_by(f64::total_cmp);
    bounds.dedup();
    let sd: Vec<f64> = bounds.windows(2).map(|w| (w[1] - w[0]).sqrt()).collect();
    let idx = |x: f64| bounds.binary_search_by(|p| p.total_cmp(&x)).expect("refinement contains the point");
    let spans: Vec<(usize, usize)> = la.cells.iter().map(|c| (idx(c.lo), idx(c.hi))).collect();
    let ta: Vec<usize> = la.tags.iter().map(|&t| idx(t)).collect();
    let tb: Vec<usize> = lb.tags.iter().map(|&t| idx(t)).collect();
    let draws: Vec<(f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, s as u64));
            let m: Vec<f64> = sd
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v * z
                })
                .collect();
            let mut prefix = vec![0.0; m.len() + 1];
            for i in 0..m.len() {
                prefix[i + 1] = prefix[i] + m[i];
            }
            let cell_mass = |j: usize| prefix[spans[j].1] - prefix[spans[j].0];
            let a = pairwise_sum_by(n, &|j| prefix[ta[j]] * cell_mass(j));
            let b = pairwise_sum_by(n, &|j| prefix[tb[j]] * cell_mass(j));
            (a, b)
        })
        .collect();
    let ma = moments(&draws.iter().map(|d| d.0).collect::<Vec<_>>());
    let mb = moments(&draws.iter().map(|d| d.1).collect::<Vec<_>>());
    let expected = |tags: &[f64]| pairwise_sum_by(n, &|j| tags[j] - la.cells[j].lo);
    Ok(TagDependence {
        rule_a: rule_a.to_string(),
        rule_b: rule_b.to_string(),
        mean_a: ma.mean,
        se_a: ma.se_mean,
        mean_b: mb.mean,
        se_b: mb.se_mean,
        expected_a: expected(&la.tags),
        expected_b: expected(&lb.tags),
    })
}
