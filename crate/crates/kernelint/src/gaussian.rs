//! Joint Gaussian grid models of `(Z, M)`, exact sampling and Monte Carlo checks.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::kernels::{self, CrossCovPair, KernelHandle};
use crate::measures::{Measure1D, Measure2D};
use crate::numeric::{mix_seed, moments, pairwise_sum, pairwise_sum_by, SampleMoments};
use crate::quadrature;
use crate::riemann::{kernel_riemann_sum, Level, PartitionScheme, RiemannSystem, TagRule};
use crate::selfint::SelfIntegralReport;

pub const JITTER_SCHEDULE: [f64; 4] = [0.0, 1e-12, 1e-10, 1e-8];
const BLOCK: usize = 512;

/// Covariance of a centred process on `[0, inf)` with closed-form primitives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessCov {
    /// `min(s, t)`
    Min,
    /// `s t`
    Product,
    /// `(|s|^2H + |t|^2H - |s-t|^2H) / 2`
    Fbm {
        hurst: f64,
    },
    Zero,
}

impl ProcessCov {
    fn exponent(&self) -> Option<f64> {
        match self {
            ProcessCov::Min => Some(1.0),
            ProcessCov::Fbm { hurst } => Some(2.0 * hurst),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let ProcessCov::Fbm { hurst } = self {
            if !(*hurst > 0.0 && *hurst < 1.0) {
                return Err(Error::InvalidParameter(format!("process hurst {hurst} outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn cov(&self, s: f64, t: f64) -> f64 {
        match self {
            ProcessCov::Min => s.min(t),
            ProcessCov::Product => s * t,
            ProcessCov::Fbm { hurst } => kernels::fbm_covariance(*hurst)(s, t),
            ProcessCov::Zero => 0.0,
        }
    }

    /// `int_0^b c(x, v) dv`
    pub fn primitive1(&self, x: f64, b: f64) -> f64 {
        match (self, self.exponent()) {
            (_, Some(p)) => {
                let q = p + 1.0;
                let abs_part = (x.powf(q) - (x - b).signum() * (x - b).abs().powf(q)) / q;
                0.5 * (x.powf(p) * b + b.powf(q) / q - abs_part)
            }
            (ProcessCov::Product, _) => x * b * b / 2.0,
            _ => 0.0,
        }
    }

    /// `int_0^a int_0^b c(u, v) dv du`
    pub fn primitive2(&self, a: f64, b: f64) -> f64 {
        match (self, self.exponent()) {
            (_, Some(p)) => {
                let q = p + 1.0;
                let r = p + 2.0;
                0.5 * ((a.powf(q) * b + a * b.powf(q)) / q - (a.powf(r) + b.powf(r) - (a - b).abs().powf(r)) / (q * r))
            }
            (ProcessCov::Product, _) => a * a * b * b / 4.0,
            _ => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `Z(t) = W([0, t])` for white noise `W`.
    BrownianWn,
    /// fBm with its derivative measure.
    Fbm { hurst: f64 },
    /// `Z` with covariance `z`, independent of a white noise `M`.
    Independent { z: ProcessCov },
    /// `M(A) = int_A U dy` with `Z = U`, a process with covariance `cov`.
    AbsContinuous { cov: ProcessCov },
}

impl ModelSpec {
    fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Fbm { hurst } if !(*hurst > 0.5 && *hurst < 1.0) => {
                Err(Error::InvalidParameter(format!("fbm model requires 1/2 < H < 1, got {hurst}")))
            }
            ModelSpec::Independent { z } => z.validate(),
            ModelSpec::AbsContinuous { cov } => cov.validate(),
            _ => Ok(()),
        }
    }

    fn uses_increments(&self) -> bool {
        matches!(self, ModelSpec::BrownianWn | ModelSpec::Fbm { .. })
    }

    /// Cross-covariance kernel `K_{Z,M}` with its attached `(C_Z, C_M)`.
    pub fn kernel(&self) -> Result<KernelHandle> {
        self.validate()?;
        let unit = Interval::unit();
        Ok(match *self {
            ModelSpec::BrownianWn => kernels::brownian_wn(),
            ModelSpec::Fbm { hurst } => kernels::fbm(hurst)?,
            ModelSpec::Independent { z } => KernelHandle::new("independent", unit, |_, _| 0.0)
                .with_pair(CrossCovPair::new(move |s, t| z.cov(s, t), Measure2D::Diagonal(Measure1D::lebesgue()))),
            ModelSpec::AbsContinuous { cov } => {
                KernelHandle::new("abs_continuous", unit, move |x, a| cov.primitive1(x, a.hi) - cov.primitive1(x, a.lo))
                    .with_pair(CrossCovPair::new(
                        move |s, t| cov.cov(s, t),
                        Measure2D::IncrementOfSurface {
                            label: "int int cov".into(),
                            surface: Arc::new(move |a, b| cov.primitive2(a, b)),
                        },
                    ))
            }
        })
    }

    fn z_cov(&self, s: f64, t: f64) -> f64 {
        match *self {
            ModelSpec::BrownianWn => s.min(t),
            ModelSpec::Fbm { hurst } => kernels::fbm_covariance(hurst)(s, t),
            ModelSpec::Independent { z } => z.cov(s, t),
            ModelSpec::AbsContinuous { cov } => cov.cov(s, t),
        }
    }
}

#[derive(Clone, Debug)]
enum Factor {
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
}

/// Second-moment blocks of `(Z on grid, M on cells)` plus a sampling factor.
///
/// For increment models the factor covers only the cell masses and `Z` is
/// their running sum; otherwise it covers the stacked vector `[Z; M]`.
#[derive(Clone, Debug)]
pub struct GaussianGridModel {
    pub spec: ModelSpec,
    pub grid: Vec<f64>,
    pub cells: Vec<Interval>,
    pub cov_zz: DMatrix<f64>,
    pub cov_mm: DMatrix<f64>,
    pub cov_zm: DMatrix<f64>,
    pub jitter: f64,
    factor: Factor,
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn cells_from(b: &[f64]) -> Vec<Interval> {
    let count = b.len() - 1;
    (0..count).map(|j| Interval { lo: b[j], hi: b[j + 1], closed_left: true, closed_right: j + 1 == count }).collect()
}

fn cholesky_with_jitter(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    for &jitter in JITTER_SCHEDULE.iter() {
        let mut a = m.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += jitter;
        }
        if let Some(ch) = a.cholesky() {
            return Ok((ch.l(), jitter));
        }
    }
    Err(Error::Factorization { jitter: *JITTER_SCHEDULE.last().expect("non-empty schedule") })
}

/// Builds a model on the cells cut by `boundaries` and the grid `points`.
///
/// Increment models put `Z` on every boundary and require the domain to start
/// at 0; `points` must then be boundaries.
pub fn make_model(spec: &ModelSpec, boundaries: &[f64], points: &[f64]) -> Result<GaussianGridModel> {
    spec.validate()?;
    let b = sorted_unique(boundaries.to_vec());
    if b.len() < 2 || b[0] < 0.0 {
        return Err(Error::InvalidParameter("model needs at least one cell inside [0, inf)".into()));
    }
    let cells = cells_from(&b);
    let kernel = spec.kernel()?;
    let pair = kernel.pair().expect("model kernels carry a pair").clone();
    let grid = if spec.uses_increments() {
        if b[0] != 0.0 {
            return Err(Error::InvalidParameter("increment models start at 0".into()));
        }
        b.clone()
    } else {
        sorted_unique(points.to_vec())
    };
    let (nz, nm) = (grid.len(), cells.len());
    let cov_zz = DMatrix::from_fn(nz, nz, |i, j| spec.z_cov(grid[i], grid[j]));
    let cov_zm = DMatrix::from_fn(nz, nm, |i, k| kernel.eval(grid[i], &cells[k]));
    let cov_mm = DMatrix::from_fn(nm, nm, |k, l| {
        if k <= l {
            pair.cov_m.mass2d(&cells[k], &cells[l])
        } else {
            pair.cov_m.mass2d(&cells[l], &cells[k])
        }
    });

    let (factor, jitter) = match spec {
        ModelSpec::BrownianWn => (Factor::Diagonal(cells.iter().map(|c| c.len().sqrt()).collect()), 0.0),
        ModelSpec::Fbm { .. } => {
            let (l, j) = cholesky_with_jitter(&cov_mm)?;
            (Factor::Dense(l), j)
        }
        _ => {
            let joint = stack_joint(&cov_zz, &cov_zm, &cov_mm);
            let (l, j) = cholesky_with_jitter(&joint)?;
            (Factor::Dense(l), j)
        }
    };
    Ok(GaussianGridModel { spec: spec.clone(), grid, cells, cov_zz, cov_mm, cov_zm, jitter, factor })
}

fn stack_joint(zz: &DMatrix<f64>, zm: &DMatrix<f64>, mm: &DMatrix<f64>) -> DMatrix<f64> {
    let (nz, nm) = (zz.nrows(), mm.nrows());
    let mut j = DMatrix::zeros(nz + nm, nz + nm);
    j.view_mut((0, 0), (nz, nz)).copy_from(zz);
    j.view_mut((0, nz), (nz, nm)).copy_from(zm);
    j.view_mut((nz, 0), (nm, nz)).copy_from(&zm.transpose());
    j.view_mut((nz, nz), (nm, nm)).copy_from(mm);
    j
}

/// Common refinement of several levels: boundaries are all cell ends and tags.
pub fn make_model_for_levels(spec: &ModelSpec, levels: &[&Level]) -> Result<GaussianGridModel> {
    let mut bounds = Vec::new();
    let mut tags = Vec::new();
    for l in levels {
        bounds.extend(l.cells.iter().flat_map(|c| [c.lo, c.hi]));
        tags.extend(l.tags.iter().copied());
    }
    if spec.uses_increments() {
        bounds.extend(tags.iter().copied());
    }
    make_model(spec, &bounds, &tags)
}

impl GaussianGridModel {
    pub fn joint_covariance(&self) -> DMatrix<f64> {
        stack_joint(&self.cov_zz, &self.cov_zm, &self.cov_mm)
    }

    pub fn kernel(&self) -> Result<KernelHandle> {
        self.spec.kernel()
    }

    /// `(Z, M)` for one block of samples, one column per sample.
    fn draw_block(&self, block: usize, size: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, block as u64));
        let (nz, nm) = (self.grid.len(), self.cells.len());
        let dim = if self.spec.uses_increments() { nm } else { nz + nm };
        let noise: Vec<f64> = (0..dim * size).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let xi = DMatrix::from_vec(dim, size, noise);
        let x = match &self.factor {
            Factor::Diagonal(s) => {
                let mut x = xi;
                for (i, si) in s.iter().enumerate() {
                    x.row_mut(i).scale_mut(*si);
                }
                x
            }
            Factor::Dense(l) => l * xi,
        };
        if self.spec.uses_increments() {
            let mut z = DMatrix::zeros(nz, size);
            for c in 0..size {
                let mut acc = 0.0;
                for i in 1..nz {
                    acc += x[(i - 1, c)];
                    z[(i, c)] = acc;
                }
            }
            (z, x)
        } else {
            (x.rows(0, nz).into_owned(), x.rows(nz, nm).into_owned())
        }
    }

    fn blocks(&self, count: usize) -> Vec<(usize, usize)> {
        (0..count.div_ceil(BLOCK)).map(|b| (b, BLOCK.min(count - b * BLOCK))).collect()
    }
}

/// Realisations with one row per sample.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub z: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub seed: u64,
    pub count: usize,
    pub grid: Vec<f64>,
    pub cells: Vec<Interval>,
}

impl SampleBatch {
    /// Rows `[Z | M]`.
    pub fn joint(&self) -> DMatrix<f64> {
        let (nz, nm) = (self.z.ncols(), self.m.ncols());
        let mut j = DMatrix::zeros(self.count, nz + nm);
        j.view_mut((0, 0), (self.count, nz)).copy_from(&self.z);
        j.view_mut((0, nz), (self.count, nm)).copy_from(&self.m);
        j
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = self.grid.iter().enumerate().map(|(i, _)| format!("z{i}")).collect();
        header.extend(self.cells.iter().enumerate().map(|(k, _)| format!("m{k}")));
        w.write_record(&header)?;
        let joint = self.joint();
        for r in 0..self.count {
            w.write_record(joint.row(r).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn sample(model: &GaussianGridModel, count: usize, seed: u64) -> SampleBatch {
    let (nz, nm) = (model.grid.len(), model.cells.len());
    let mut z = DMatrix::zeros(count, nz);
    let mut m = DMatrix::zeros(count, nm);
    let drawn: Vec<_> = model.blocks(count).par_iter().map(|&(b, size)| (b, model.draw_block(b, size, seed))).collect();
    for (b, (zb, mb)) in drawn {
        let start = b * BLOCK;
        z.view_mut((start, 0), (zb.ncols(), nz)).copy_from(&zb.transpose());
        m.view_mut((start, 0), (mb.ncols(), nm)).copy_from(&mb.transpose());
    }
    SampleBatch { z, m, seed, count, grid: model.grid.clone(), cells: model.cells.clone() }
}

/// Index map from a level onto a model grid and its fine cells.
#[derive(Clone, Debug)]
pub struct SumPlan {
    tag_index: Vec<usize>,
    fine: Vec<(usize, usize)>,
}

fn locate(sorted: &[f64], x: f64) -> Option<usize> {
    sorted.binary_search_by(|p| p.total_cmp(&x)).ok()
}

pub fn plan_sums(grid: &[f64], cells: &[Interval], level: &Level) -> Result<SumPlan> {
    let mut b: Vec<f64> = cells.iter().map(|c| c.lo).collect();
    b.push(cells.last().map_or(0.0, |c| c.hi));
    let tag_index =
        level.tags.iter().map(|&t| locate(grid, t).ok_or(Error::TagOffGrid(t))).collect::<Result<Vec<_>>>()?;
    let fine = level
        .cells
        .iter()
        .map(|c| {
            let lo = locate(&b, c.lo)
                .ok_or_else(|| Error::InvalidParameter(format!("cell edge {} not in refinement", c.lo)))?;
            let hi = locate(&b, c.hi)
                .ok_or_else(|| Error::InvalidParameter(format!("cell edge {} not in refinement", c.hi)))?;
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SumPlan { tag_index, fine })
}

impl SumPlan {
    fn eval<Z: Fn(usize) -> f64, M: Fn(usize) -> f64>(&self, z: Z, m: M) -> f64 {
        pairwise_sum_by(self.fine.len(), &|j| {
            let (lo, hi) = self.fine[j];
            let mass = (lo..hi).fold(0.0, |acc, f| acc + m(f));
            z(self.tag_index[j]) * mass
        })
    }
}

/// Per-sample `sum_j Z(x_j) M(I_j)` on a materialised batch.
pub fn mc_stochastic_sums(batch: &SampleBatch, level: &Level) -> Result<Vec<f64>> {
    let plan = plan_sums(&batch.grid, &batch.cells, level)?;
    Ok((0..batch.count).map(|r| plan.eval(|i| batch.z[(r, i)], |f| batch.m[(r, f)])).collect())
}

/// Stochastic sums for several levels without materialising the batch; the
/// values coincide with [`sample`] followed by [`mc_stochastic_sums`].
pub fn simulate_sums(model: &GaussianGridModel, levels: &[&Level], count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let plans = levels.iter().map(|l| plan_sums(&model.grid, &model.cells, l)).collect::<Result<Vec<_>>>()?;
    let per_block: Vec<Vec<Vec<f64>>> = model
        .blocks(count)
        .par_iter()
        .map(|&(b, size)| {
            let (z, m) = model.draw_block(b, size, seed);
            plans.iter().map(|p| (0..size).map(|c| p.eval(|i| z[(i, c)], |f| m[(f, c)])).collect()).collect()
        })
        .collect();
    let mut out = vec![Vec::with_capacity(count); plans.len()];
    for block in per_block {
        for (dst, src) in out.iter_mut().zip(block) {
            dst.extend(src);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapEstimate {
    pub gap: f64,
    pub se: f64,
}

/// Empirical `E[(S_A - S_B)^2]` with its standard error.
pub fn l2_gap(sums_a: &[f64], sums_b: &[f64]) -> Result<GapEstimate> {
    if sums_a.len() != sums_b.len() {
        return Err(Error::BatchMismatch(sums_a.len(), sums_b.len()));
    }
    let sq: Vec<f64> = sums_a.iter().zip(sums_b).map(|(a, b)| (a - b) * (a - b)).collect();
    let m = moments(&sq);
    Ok(GapEstimate { gap: m.mean, se: m.se_mean })
}

/// `int_{D x D} C_Z dC_M` by midpoint grid quadrature with one Richardson step
/// between `n / 2` and `n` (first-order rate).
pub fn integral_cz_dcm(pair: &CrossCovPair, domain: &Interval, n: usize) -> f64 {
    let cz = pair.cov_z.clone();
    let fine = pair.cov_m.integrate_grid(|s, t| cz(s, t), domain, domain, n);
    let coarse = pair.cov_m.integrate_grid(|s, t| cz(s, t), domain, domain, (n / 2).max(1));
    2.0 * fine - coarse
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZScores {
    pub mean: f64,
    pub var: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentDiagnostics {
    pub n: usize,
    pub mean: f64,
    pub se_mean: f64,
    pub var: f64,
    pub se_var: f64,
    pub target_mean: f64,
    pub target_var: f64,
    pub integral_cz_dcm: f64,
    pub quasi_self_integral: f64,
    /// `|E[S_n] - self-integral|`, exact from the kernel sum.
    pub mean_discretization: f64,
    /// `|var(n) - var(n/2)|`, first-order Richardson error estimate.
    pub var_slack: f64,
    pub z_scores: ZScores,
    pub mean_ok: bool,
    pub var_ok: bool,
    pub jitter: f64,
}

/// Compares Monte Carlo moments of the level-`n` sums with the self-integral
/// and with `int C_Z dC_M` plus the quasi-self-integral.
pub fn moment_checks(
    model: &GaussianGridModel,
    level: &Level,
    sums: &[f64],
    sums_half: &[f64],
    selfint: &SelfIntegralReport,
    quasi: &SelfIntegralReport,
    quad_n: usize,
) -> Result<MomentDiagnostics> {
    let mean_target =
        selfint.verdict.value().ok_or_else(|| Error::NotConverged(format!("self-integral: {:?}", selfint.verdict)))?;
    let quasi_value = quasi
        .verdict
        .value()
        .ok_or_else(|| Error::NotConverged(format!("quasi-self-integral: {:?}", quasi.verdict)))?;
    if sums.len() != sums_half.len() {
        return Err(Error::BatchMismatch(sums.len(), sums_half.len()));
    }
    let kernel = model.kernel()?;
    let pair = kernel.pair().expect("model kernels carry a pair");
    let domain = Interval::closed(model.cells[0].lo, model.cells[model.cells.len() - 1].hi)?;
    let czm = integral_cz_dcm(pair, &domain, quad_n);
    let stats: SampleMoments = moments(sums);
    let half: SampleMoments = moments(sums_half);
    let mean_discretization = (kernel_riemann_sum(&kernel, level) - mean_target).abs();
    let var_slack = (stats.var - half.var).abs();
    let target_var = czm + quasi_value;
    let z_mean = (stats.mean - mean_target) / stats.se_mean;
    let z_var = (stats.var - target_var) / stats.se_var;
    Ok(MomentDiagnostics {
        n: level.len(),
        mean: stats.mean,
        se_mean: stats.se_mean,
        var: stats.var,
        se_var: stats.se_var,
        target_mean: mean_target,
        target_var,
        integral_cz_dcm: czm,
        quasi_self_integral: quasi_value,
        mean_discretization,
        var_slack,
        z_scores: ZScores { mean: z_mean, var: z_var },
        mean_ok: (stats.mean - mean_target).abs() <= 3.0 * stats.se_mean + mean_discretization,
        var_ok: (stats.var - target_var).abs() <= 3.0 * stats.se_var + var_slack,
        jitter: model.jitter,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IsserlisRow {
    pub index: [usize; 4],
    pub empirical: f64,
    pub predicted: f64,
    pub se: f64,
    pub z: f64,
}

/// Empirical `E[X_a X_b X_c X_d]` against the pairing sum of covariances on
/// random coordinate 4-tuples of `[Z | M]`.
pub fn isserlis_check(batch: &SampleBatch, cov: &DMatrix<f64>, tuples: usize, seed: u64) -> Vec<IsserlisRow> {
    let joint = batch.joint();
    let dim = joint.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x15_5e_72_15));
    (0..tuples)
        .map(|_| {
            let index = [0; 4].map(|_| rng.random_range(0..dim));
            let [a, b, c, d] = index;
            let products: Vec<f64> =
                (0..batch.count).map(|r| joint[(r, a)] * joint[(r, b)] * joint[(r, c)] * joint[(r, d)]).collect();
            let m = moments(&products);
            let predicted = cov[(a, b)] * cov[(c, d)] + cov[(a, c)] * cov[(b, d)] + cov[(a, d)] * cov[(b, c)];
            let se = m.se_mean;
            IsserlisRow {
                index,
                empirical: m.mean,
                predicted,
                se,
                z: if se > 0.0 { (m.mean - predicted) / se } else { 0.0 },
            }
        })
        .collect()
}

/// `int_D C_{Z,U}(x, x) dx` for the absolutely continuous model.
pub fn abs_continuous_reference(spec: &ModelSpec, domain: &Interval) -> Result<f64> {
    match spec {
        ModelSpec::AbsContinuous { cov } => {
            let cov = *cov;
            Ok(quadrature::integrate(move |x| cov.cov(x, x), domain.lo, domain.hi, quadrature::DEFAULT_TOL))
        }
        other => Err(Error::InvalidParameter(format!("{other:?} is not an absolutely continuous model"))),
    }
}

/// Monte Carlo summary of one uniform level with two tag rules.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelStats {
    pub n: usize,
    pub mean: f64,
    pub se_mean: f64,
    pub var: f64,
    pub se_var: f64,
    pub l2_gap: f64,
    pub l2_gap_se: f64,
    pub jitter: f64,
}

/// Sums of a uniform level `n` with tag rules `a` and `b`, plus rule `a` at
/// level `n / 2`, all drawn from one batch on the common refinement.
pub struct UniformExperiment {
    pub model: GaussianGridModel,
    pub level_a: Level,
    pub level_b: Level,
    pub level_half: Level,
    pub sums_a: Vec<f64>,
    pub sums_b: Vec<f64>,
    pub sums_half: Vec<f64>,
}

pub fn run_uniform_experiment(
    spec: &ModelSpec,
    n: usize,
    tag_a: TagRule,
    tag_b: TagRule,
    count: usize,
    seed: u64,
) -> Result<UniformExperiment> {
    let d = Interval::unit();
    let level_a = RiemannSystem::new(d, PartitionScheme::Uniform, tag_a).build_level(n)?;
    let level_b = RiemannSystem::new(d, PartitionScheme::Uniform, tag_b).build_level(n)?;
    let level_half = RiemannSystem::new(d, PartitionScheme::Uniform, tag_a).build_level((n / 2).max(1))?;
    let model = make_model_for_levels(spec, &[&level_a, &level_b, &level_half])?;
    let mut sums = simulate_sums(&model, &[&level_a, &level_b, &level_half], count, mix_seed(seed, n as u64))?;
    let sums_half = sums.pop().expect("three sum vectors");
    let sums_b = sums.pop().expect("three sum vectors");
    let sums_a = sums.pop().expect("three sum vectors");
    Ok(UniformExperiment { model, level_a, level_b, level_half, sums_a, sums_b, sums_half })
}

impl UniformExperiment {
    pub fn stats(&self) -> Result<LevelStats> {
        let m = moments(&self.sums_a);
        let g = l2_gap(&self.sums_a, &self.sums_b)?;
        Ok(LevelStats {
            n: self.level_a.len(),
            mean: m.mean,
            se_mean: m.se_mean,
            var: m.var,
            se_var: m.se_var,
            l2_gap: g.gap,
            l2_gap_se: g.se,
            jitter: self.model.jitter,
        })
    }
}

/// Sample mean of a sum vector against a target, as a z-score.
pub fn mean_z(sums: &[f64], target: f64) -> (SampleMoments, f64) {
    let m = moments(sums);
    (m, (m.mean - target) / m.se_mean)
}

/// Empirical covariance between two sample columns.
pub fn empirical_cov(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = pairwise_sum(x) / n;
    let my = pairwise_sum(y) / n;
    pairwise_sum_by(x.len(), &|i| (x[i] - mx) * (y[i] - my)) / (n - 1.0)
}
