//! Config-facing descriptors for functions, measures, test functions and kernels.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::kernels::{self, KernelHandle, Psi2, DEFAULT_PSI_MU_PANELS};
use crate::measures::{Density, Measure1D, RealFn};

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FnSpec {
    Constant {
        value: f64,
    },
    Identity,
    /// `sum_i coeffs[i] x^i`
    Polynomial {
        coeffs: Vec<f64>,
    },
}

impl FnSpec {
    pub fn build(&self) -> (RealFn, String) {
        match self.clone() {
            FnSpec::Constant { value } => (Arc::new(move |_| value), format!("{value}")),
            FnSpec::Identity => (Arc::new(|x| x), "x".into()),
            FnSpec::Polynomial { coeffs } => {
                let label = format!("poly{coeffs:?}");
                (Arc::new(move |x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)), label)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Lebesgue {
        #[serde(default = "one")]
        scale: f64,
    },
    Atomic {
        atoms: Vec<[f64; 2]>,
    },
    /// `coef |u - center|^exponent`
    PowerDensity {
        coef: f64,
        center: f64,
        exponent: f64,
    },
    SignedSum {
        parts: Vec<MeasureSpec>,
    },
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Measure1D> {
        Ok(match self {
            MeasureSpec::Lebesgue { scale } => Measure1D::Lebesgue { scale: *scale },
            MeasureSpec::Atomic { atoms } => Measure1D::atoms(&atoms.iter().map(|a| (a[0], a[1])).collect::<Vec<_>>()),
            MeasureSpec::PowerDensity { coef, center, exponent } => {
                Measure1D::density(Density::power(*coef, *center, *exponent)?)
            }
            MeasureSpec::SignedSum { parts } => {
                Measure1D::SignedSum(parts.iter().map(MeasureSpec::build).collect::<Result<_>>()?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    Constant { value: f64 },
    Product,
    Gaussian { scale: f64 },
    IndicatorClosed,
    IndicatorOpen,
}

impl PsiSpec {
    pub fn build(&self) -> Psi2 {
        match *self {
            PsiSpec::Constant { value } => Psi2::constant(value),
            PsiSpec::Product => Psi2::product(),
            PsiSpec::Gaussian { scale } => Psi2::gaussian(scale),
            PsiSpec::IndicatorClosed => Psi2::lower_indicator(true),
            PsiSpec::IndicatorOpen => Psi2::lower_indicator(false),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Tensor {
        f: FnSpec,
        mu: MeasureSpec,
        #[serde(default)]
        domain: Option<[f64; 2]>,
    },
    BrownianWn,
    Fbm {
        hurst: f64,
    },
    Orthogonal {
        nu: MeasureSpec,
    },
    Singular,
    PsiMu {
        psi: PsiSpec,
        mu: MeasureSpec,
        base: Box<KernelSpec>,
        #[serde(default)]
        panels: Option<usize>,
    },
}

pub fn make_kernel(spec: &KernelSpec) -> Result<KernelHandle> {
    match spec {
        KernelSpec::Tensor { f, mu, domain } => {
            let d = match domain {
                Some([lo, hi]) => Interval::closed(*lo, *hi)?,
                None => Interval::unit(),
            };
            let (f, label) = f.build();
            Ok(kernels::tensor(f, &label, mu.build()?, d))
        }
        KernelSpec::BrownianWn => Ok(kernels::brownian_wn()),
        KernelSpec::Fbm { hurst } => kernels::fbm(*hurst),
        KernelSpec::Orthogonal { nu } => Ok(kernels::orthogonal(nu.build()?)),
        KernelSpec::Singular => Ok(kernels::singular()),
        KernelSpec::PsiMu { psi, mu, base, panels } => {
            let base = make_kernel(base)?;
            let d = base.domain();
            kernels::psi_mu(psi.build(), &mu.build()?, base, d, d, panels.unwrap_or(DEFAULT_PSI_MU_PANELS))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static str,
    pub domain: &'static str,
    pub summary: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "tensor",
            params: "f: fn, mu: measure, domain?: [lo, hi]",
            domain: "[0, 1] unless given",
            summary: "f(x) mu(A)",
        },
        CatalogEntry { name: "brownian_wn", params: "-", domain: "[0, 1]", summary: "lambda(A ∩ [0, x])" },
        CatalogEntry {
            name: "fbm",
            params: "hurst in (1/2, 1)",
            domain: "[0, 1]",
            summary: "(b^2H - a^2H + |t-a|^2H - |t-b|^2H) / 2",
        },
        CatalogEntry { name: "orthogonal", params: "nu: measure", domain: "[0, 1]", summary: "nu([0, t] ∩ A)" },
        CatalogEntry { name: "singular", params: "-", domain: "[-1, 1]", summary: "int_A |x-u|^(-1/8) du" },
        CatalogEntry {
            name: "psi_mu",
            params: "psi: test fn, mu: measure, base: kernel, panels?: int",
            domain: "base domain",
            summary: "int psi(x, y) K(x, A) dmu(x)",
        },
    ]
}

pub fn parse_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_specs_parse() {
        let k: KernelSpec = serde_json::from_str(r#"{"name":"fbm","hurst":0.75}"#).unwrap();
        assert_eq!(k, KernelSpec::Fbm { hurst: 0.75 });
        let t: KernelSpec =
            serde_json::from_str(r#"{"name":"tensor","f":{"kind":"identity"},"mu":{"kind":"lebesgue"}}"#).unwrap();
        assert!(matches!(t, KernelSpec::Tensor { .. }));
        assert!(serde_json::from_str::<KernelSpec>(r#"{"name":"fbm","hurst":0.75,"extra":1}"#).is_err());
        assert!(serde_json::from_str::<KernelSpec>(r#"{"name":"nope"}"#).is_err());
    }

    #[test]
    fn polynomial_evaluates_by_horner() {
        let (f, _) = FnSpec::Polynomial { coeffs: vec![1.0, 2.0, 3.0] }.build();
        assert_eq!(f(2.0), 1.0 + 4.0 + 12.0);
    }

    #[test]
    fn catalog_lists_six_families() {
        assert_eq!(catalog().len(), 6);
    }

    #[test]
    fn make_kernel_rejects_bad_hurst() {
        assert!(make_kernel(&KernelSpec::Fbm { hurst: 0.4 }).is_err());
    }
}
