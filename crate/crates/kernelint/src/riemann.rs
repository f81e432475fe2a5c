//! Riemann systems: partition sequences with tag points, and kernel sums.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::kernels::{KernelHandle, SecondOrderKernel};
use crate::numeric::{mix_seed, pairwise_sum, pairwise_sum_by};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionScheme {
    Uniform,
    /// Nested graded grid: the left half of the domain is cut into `2^k` equal
    /// cells and the right half into `2^(k-1)`, with `k = ceil(log2 n)`.
    Dyadic,
    Random {
        seed: u64,
    },
    /// `n - 1` cells of length `e^-n` followed by one long cell.
    AdversarialGeometric,
}

pub const DEFAULT_NEAR_RIGHT_FACTOR: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagRule {
    Left,
    /// Right endpoint of the cell closure.
    Right,
    Midpoint,
    Random {
        seed: u64,
    },
    /// `b - factor * len^2`, capped at the midpoint.
    NearRight {
        factor: f64,
    },
}

impl TagRule {
    pub fn near_right() -> Self {
        TagRule::NearRight { factor: DEFAULT_NEAR_RIGHT_FACTOR }
    }

    fn is_random(&self) -> bool {
        matches!(self, TagRule::Random { .. })
    }
}

impl PartitionScheme {
    fn is_random(&self) -> bool {
        matches!(self, PartitionScheme::Random { .. })
    }
}

impl std::fmt::Display for PartitionScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PartitionScheme::Uniform => write!(f, "uniform"),
            PartitionScheme::Dyadic => write!(f, "dyadic"),
            PartitionScheme::Random { seed } => write!(f, "random{seed}"),
            PartitionScheme::AdversarialGeometric => write!(f, "geometric"),
        }
    }
}

impl std::fmt::Display for TagRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TagRule::Left => write!(f, "left"),
            TagRule::Right => write!(f, "right"),
            TagRule::Midpoint => write!(f, "midpoint"),
            TagRule::Random { seed } => write!(f, "random{seed}"),
            TagRule::NearRight { factor } => write!(f, "near_right{factor}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Layout {
    Simple { scheme: PartitionScheme, tags: TagRule },
    Merged(Box<RiemannSystem>, Box<RiemannSystem>),
}

/// Reproducible sequence of tagged partitions of `domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct RiemannSystem {
    domain: Interval,
    layout: Layout,
}

/// One level of a Riemann system.
///
/// `segments` records where merged sub-systems meet so sums can be reduced per
/// part, which keeps merged sums bit-identical to the sum of the parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub cells: Vec<Interval>,
    pub tags: Vec<f64>,
    segments: Vec<usize>,
}

impl Level {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn max_diameter(&self) -> f64 {
        self.cells.iter().map(Interval::len).fold(0.0, f64::max)
    }

    /// Writes `lo,hi,tag` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lo", "hi", "tag"])?;
        for (c, t) in self.cells.iter().zip(&self.tags) {
            w.serialize((c.lo, c.hi, *t))?;
        }
        w.flush()?;
        Ok(())
    }

    fn reduce<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        let mut start = 0;
        let mut total = 0.0;
        for &end in self.segments.iter() {
            total += pairwise_sum_by(end - start, &|i| f(start + i));
            start = end;
        }
        total
    }
}

impl RiemannSystem {
    pub fn new(domain: Interval, scheme: PartitionScheme, tags: TagRule) -> Self {
        Self { domain, layout: Layout::Simple { scheme, tags } }
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Short identifier such as `uniform/left`.
    pub fn id(&self) -> String {
        match &self.layout {
            Layout::Simple { scheme, tags } => format!("{scheme}/{tags}"),
            Layout::Merged(a, b) => format!("({})+({})", a.id(), b.id()),
        }
    }

    pub fn scheme(&self) -> Option<PartitionScheme> {
        match &self.layout {
            Layout::Simple { scheme, .. } => Some(*scheme),
            Layout::Merged(..) => None,
        }
    }

    pub fn tag_rule(&self) -> Option<TagRule> {
        match &self.layout {
            Layout::Simple { tags, .. } => Some(*tags),
            Layout::Merged(..) => None,
        }
    }

    /// True when levels involve no random draws.
    pub fn is_deterministic(&self) -> bool {
        match &self.layout {
            Layout::Simple { scheme, tags } => !scheme.is_random() && !tags.is_random(),
            Layout::Merged(a, b) => a.is_deterministic() && b.is_deterministic(),
        }
    }

    /// Same scheme and tags on another domain.
    pub fn on_domain(&self, domain: Interval) -> Option<RiemannSystem> {
        match &self.layout {
            Layout::Simple { scheme, tags } => Some(RiemannSystem::new(domain, *scheme, *tags)),
            Layout::Merged(..) => None,
        }
    }

    pub fn build_level(&self, n: usize) -> Result<Level> {
        if n == 0 {
            return Err(Error::InvalidParameter("level must be at least 1".into()));
        }
        match &self.layout {
            Layout::Simple { scheme, tags } => {
                let bounds = boundaries(&self.domain, *scheme, n)?;
                let cells = cells_from_boundaries(&self.domain, &bounds);
                let tags = place_tags(&cells, *tags, n);
                let segments = vec![cells.len()];
                Ok(Level { cells, tags, segments })
            }
            Layout::Merged(a, b) => {
                let mut left = a.build_level(n)?;
                let right = b.build_level(n)?;
                if let Some(last) = left.cells.last_mut() {
                    if right.cells.first().is_some_and(|c| c.closed_left && c.lo == last.hi) {
                        last.closed_right = false;
                    }
                }
                let offset = left.cells.len();
                left.cells.extend(right.cells);
                left.tags.extend(right.tags);
                left.segments.extend(right.segments.iter().map(|s| s + offset));
                Ok(left)
            }
        }
    }
}

fn boundaries(d: &Interval, scheme: PartitionScheme, n: usize) -> Result<Vec<f64>> {
    let len = d.len();
    let mut b = match scheme {
        PartitionScheme::Uniform => {
            let w = len / n as f64;
            (0..=n).map(|j| d.lo + w * j as f64).collect::<Vec<_>>()
        }
        PartitionScheme::Dyadic => {
            let k = n.next_power_of_two().trailing_zeros();
            if k == 0 {
                vec![d.lo, d.hi]
            } else {
                let left = 1usize << k;
                let right = left / 2;
                let mid = d.lo + 0.5 * len;
                let wl = 0.5 * len / left as f64;
                let wr = 0.5 * len / right as f64;
                let mut v: Vec<f64> = (0..left).map(|j| d.lo + wl * j as f64).collect();
                v.extend((0..=right).map(|j| mid + wr * j as f64));
                v
            }
        }
        PartitionScheme::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, n as u64));
            let mut u: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
            u.sort_by(f64::total_cmp);
            let mut prev = 0.0;
            let mut v = Vec::with_capacity(n + 1);
            v.push(d.lo);
            let floor = 0.1 / n as f64;
            let mut acc = d.lo;
            for next in u.iter().take(n - 1).copied().chain(std::iter::once(1.0)) {
                acc += len * (floor + 0.9 * (next - prev));
                prev = next;
                v.push(acc);
            }
            v
        }
        PartitionScheme::AdversarialGeometric => {
            let small = (-(n as f64)).exp();
            if (n as f64 - 1.0) * small >= len {
                return Err(Error::GeometricLevel { level: n });
            }
            let mut v: Vec<f64> = (0..n).map(|j| d.lo + small * j as f64).collect();
            v.push(d.hi);
            v
        }
    };
    if let Some(last) = b.last_mut() {
        *last = d.hi;
    }
    Ok(b)
}

fn cells_from_boundaries(d: &Interval, b: &[f64]) -> Vec<Interval> {
    let count = b.len() - 1;
    (0..count)
        .map(|j| Interval {
            lo: b[j],
            hi: b[j + 1],
            closed_left: if j == 0 { d.closed_left } else { true },
            closed_right: if j + 1 == count { d.closed_right } else { false },
        })
        .collect()
}

fn place_tags(cells: &[Interval], rule: TagRule, n: usize) -> Vec<f64> {
    match rule {
        TagRule::Left => cells.iter().map(|c| c.lo).collect(),
        TagRule::Right => cells.iter().map(|c| c.hi).collect(),
        TagRule::Midpoint => cells.iter().map(Interval::midpoint).collect(),
        TagRule::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed ^ 0x7a67_5f72_756c_6573, n as u64));
            cells
                .iter()
                .map(|c| {
                    let t = c.lo + c.len() * rng.random::<f64>();
                    if t < c.hi {
                        t
                    } else {
                        c.lo
                    }
                })
                .collect()
        }
        TagRule::NearRight { factor } => cells
            .iter()
            .map(|c| {
                let l = c.len();
                let eps = (factor * l * l).min(0.5 * l);
                c.hi - eps
            })
            .collect(),
    }
}

/// Concatenates two systems over adjacent domains.
pub fn merge_systems(a: &RiemannSystem, b: &RiemannSystem) -> Result<RiemannSystem> {
    let (da, db) = (a.domain, b.domain);
    let merge_err = || Error::Merge { a_lo: da.lo, a_hi: da.hi, b_lo: db.lo, b_hi: db.hi };
    if da.hi != db.lo {
        return Err(merge_err());
    }
    if !da.closed_right && !db.closed_left {
        return Err(merge_err());
    }
    let domain = Interval { lo: da.lo, hi: db.hi, closed_left: da.closed_left, closed_right: db.closed_right };
    Ok(RiemannSystem { domain, layout: Layout::Merged(Box::new(a.clone()), Box::new(b.clone())) })
}

/// `sum_j K(tags[j], cells[j])`
pub fn kernel_riemann_sum(k: &KernelHandle, level: &Level) -> f64 {
    level.reduce(|j| k.eval(level.tags[j], &level.cells[j]))
}

/// `sum_j sum_k K(b_k, A_j) K(a_j, B_k)`
pub fn double_riemann_sum(k2: &SecondOrderKernel, level_a: &Level, level_b: &Level) -> f64 {
    let rows: Vec<f64> = (0..level_a.len())
        .map(|j| {
            let (a_cell, a_tag) = (&level_a.cells[j], level_a.tags[j]);
            pairwise_sum_by(level_b.len(), &|k| k2.eval(a_tag, level_b.tags[k], a_cell, &level_b.cells[k]))
        })
        .collect();
    pairwise_sum(&rows)
}
