//! Signed Radon measures on bounded intervals and boxes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numeric::{pairwise_sum, pairwise_sum_by};
use crate::quadrature::{self, DEFAULT_TOL};
use crate::riemann::RiemannSystem;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type RealFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A density with an optional closed-form antiderivative.
#[derive(Clone)]
pub struct Density {
    pub label: String,
    pub f: RealFn,
    pub antiderivative: Option<RealFn>,
    /// Points where the density is singular or non-smooth.
    pub breakpoints: Vec<f64>,
}

impl Density {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), f: Arc::new(f), antiderivative: None, breakpoints: Vec::new() }
    }

    pub fn with_antiderivative(mut self, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.antiderivative = Some(Arc::new(g));
        self
    }

    pub fn with_breakpoints(mut self, points: Vec<f64>) -> Self {
        self.breakpoints = points;
        self
    }

    /// `coef * |u - center|^exponent`, exponent > -1.
    pub fn power(coef: f64, center: f64, exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent <= -1.0 {
            return Err(Error::InvalidParameter(format!("power density exponent {exponent} must exceed -1")));
        }
        let q = exponent + 1.0;
        Ok(Self::new(format!("{coef}*|u-{center}|^{exponent}"), move |u| coef * (u - center).abs().powf(exponent))
            .with_antiderivative(move |u| {
                let v = u - center;
                coef * v.signum() * v.abs().powf(q) / q
            })
            .with_breakpoints(vec![center]))
    }

    fn integral(&self, lo: f64, hi: f64) -> f64 {
        match &self.antiderivative {
            Some(g) => g(hi) - g(lo),
            None => quadrature::integrate_with_breaks(|u| (self.f)(u), lo, hi, &self.breakpoints, DEFAULT_TOL),
        }
    }
}

impl std::fmt::Debug for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Density({})", self.label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub enum Measure1D {
    LebesgueDensity(Density),
    Atomic(Vec<Atom>),
    Lebesgue { scale: f64 },
    SignedSum(Vec<Measure1D>),
}

impl Measure1D {
    pub fn lebesgue() -> Self {
        Measure1D::Lebesgue { scale: 1.0 }
    }

    pub fn atoms(list: &[(f64, f64)]) -> Self {
        Measure1D::Atomic(list.iter().map(|&(location, weight)| Atom { location, weight }).collect())
    }

    pub fn density(d: Density) -> Self {
        Measure1D::LebesgueDensity(d)
    }

    pub fn mass(&self, i: &Interval) -> f64 {
        match self {
            Measure1D::Lebesgue { scale } => scale * i.len(),
            Measure1D::LebesgueDensity(d) => {
                if i.lo == i.hi {
                    0.0
                } else {
                    d.integral(i.lo, i.hi)
                }
            }
            Measure1D::Atomic(atoms) => atoms.iter().filter(|a| i.contains(a.location)).map(|a| a.weight).sum(),
            Measure1D::SignedSum(parts) => parts.iter().map(|m| m.mass(i)).sum(),
        }
    }

    /// Largest `sum |mu(I_j)|` over the dyadic partition of `i` at `depth`.
    ///
    /// Dyadic partitions are nested, so the value is non-decreasing in depth
    /// and is a lower bound for the total variation.
    pub fn total_variation_estimate(&self, i: &Interval, depth: u32) -> f64 {
        total_variation_of(|cell| self.mass(cell), i, depth)
    }

    /// `sum_j f(x_j) mu(I_j)` at level `n` of `system`.
    pub fn integrate_riemann<F: Fn(f64) -> f64>(&self, f: F, system: &RiemannSystem, n: usize) -> Result<f64> {
        let level = system.build_level(n)?;
        Ok(pairwise_sum_by(level.len(), &|j| f(level.tags[j]) * self.mass(&level.cells[j])))
    }

    /// Atom locations, used to place quadrature breakpoints.
    pub fn singular_points(&self) -> Vec<f64> {
        match self {
            Measure1D::Atomic(a) => a.iter().map(|a| a.location).collect(),
            Measure1D::LebesgueDensity(d) => d.breakpoints.clone(),
            Measure1D::SignedSum(p) => p.iter().flat_map(|m| m.singular_points()).collect(),
            Measure1D::Lebesgue { .. } => Vec::new(),
        }
    }
}

/// Dyadic total-variation estimate for any set function on intervals.
pub fn total_variation_of<F: Fn(&Interval) -> f64>(set_fn: F, i: &Interval, depth: u32) -> f64 {
    let masses: Vec<f64> = i.dyadic(depth).iter().map(|c| set_fn(c).abs()).collect();
    pairwise_sum(&masses)
}

#[derive(Clone)]
pub enum Measure2D {
    Density {
        label: String,
        g: RealFn2,
    },
    /// `A x B -> nu(A ∩ B)`
    Diagonal(Measure1D),
    Tensor(Measure1D, Measure1D),
    /// Box mass by the four-point rectangle increment of a surface.
    IncrementOfSurface {
        label: String,
        surface: RealFn2,
    },
    SignedSum(Vec<Measure2D>),
}

impl std::fmt::Debug for Measure2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Measure2D::Density { label, .. } => write!(f, "Density({label})"),
            Measure2D::Diagonal(nu) => write!(f, "Diagonal({nu:?})"),
            Measure2D::Tensor(a, b) => write!(f, "Tensor({a:?}, {b:?})"),
            Measure2D::IncrementOfSurface { label, .. } => write!(f, "IncrementOfSurface({label})"),
            Measure2D::SignedSum(p) => write!(f, "SignedSum({p:?})"),
        }
    }
}

impl Measure2D {
    pub fn zero() -> Self {
        Measure2D::SignedSum(Vec::new())
    }

    pub fn increment_of(label: impl Into<String>, surface: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Measure2D::IncrementOfSurface { label: label.into(), surface: Arc::new(surface) }
    }

    pub fn mass2d(&self, a: &Interval, b: &Interval) -> f64 {
        match self {
            Measure2D::Density { g, .. } => {
                if a.len() == 0.0 || b.len() == 0.0 {
                    return 0.0;
                }
                let g = g.clone();
                quadrature::integrate_box(move |x, y| g(x, y), (a.lo, a.hi), (b.lo, b.hi), DEFAULT_TOL)
            }
            Measure2D::Diagonal(nu) => a.intersect(b).map_or(0.0, |ab| nu.mass(&ab)),
            Measure2D::Tensor(m1, m2) => m1.mass(a) * m2.mass(b),
            Measure2D::IncrementOfSurface { surface, .. } => {
                surface(a.hi, b.hi) - surface(a.hi, b.lo) - surface(a.lo, b.hi) + surface(a.lo, b.lo)
            }
            Measure2D::SignedSum(parts) => parts.iter().map(|m| m.mass2d(a, b)).sum(),
        }
    }

    /// Dyadic-grid lower bound for `|Lambda|(A x B)`.
    pub fn total_variation_estimate(&self, a: &Interval, b: &Interval, depth: u32) -> f64 {
        let rows = a.dyadic(depth);
        let cols = b.dyadic(depth);
        if let Measure2D::Diagonal(nu) = self {
            // Off-diagonal cells of aligned grids carry no mass.
            if a == b {
                return total_variation_of(|c| nu.mass(c), a, depth);
            }
        }
        let per_row: Vec<f64> =
            rows.iter().map(|r| pairwise_sum_by(cols.len(), &|k| self.mass2d(r, &cols[k]).abs())).collect();
        pairwise_sum(&per_row)
    }

    /// `sum_{j,k} psi(s_j, t_k) Lambda(A_j x B_k)` on uniform `n x n` cells with midpoint tags.
    pub fn integrate_grid<F: Fn(f64, f64) -> f64 + Sync>(&self, psi: F, a: &Interval, b: &Interval, n: usize) -> f64 {
        let rows = uniform_cells(a, n);
        let cols = uniform_cells(b, n);
        let per_row: Vec<f64> = rows
            .iter()
            .map(|r| {
                let s = r.midpoint();
                pairwise_sum_by(cols.len(), &|k| {
                    let m = self.mass2d(r, &cols[k]);
                    if m == 0.0 {
                        0.0
                    } else {
                        psi(s, cols[k].midpoint()) * m
                    }
                })
            })
            .collect();
        pairwise_sum(&per_row)
    }
}

/// Uniform half-open cells of `d`, last cell keeps the right flag.
pub fn uniform_cells(d: &Interval, n: usize) -> Vec<Interval> {
    let n = n.max(1);
    let width = d.len() / n as f64;
    (0..n)
        .map(|j| Interval {
            lo: if j == 0 { d.lo } else { d.lo + width * j as f64 },
            hi: if j + 1 == n { d.hi } else { d.lo + width * (j + 1) as f64 },
            closed_left: if j == 0 { d.closed_left } else { true },
            closed_right: if j + 1 == n { d.closed_right } else { false },
        })
        .collect()
}
