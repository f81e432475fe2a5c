use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("interval [{lo}, {hi}] is outside the kernel domain [{domain_lo}, {domain_hi}]")]
    OutsideDomain { lo: f64, hi: f64, domain_lo: f64, domain_hi: f64 },

    #[error("geometric partition undefined at level {level}: (n-1)e^-n >= domain length")]
    GeometricLevel { level: usize },

    #[error("kernel `{0}` has no attached covariance pair")]
    NoCovariancePair(String),

    #[error("covariance factorization failed after jitter {jitter:e}")]
    Factorization { jitter: f64 },

    #[error("tag {0} is not a grid point of the sample batch")]
    TagOffGrid(f64),

    #[error("sum vectors come from different batches ({0} vs {1} samples)")]
    BatchMismatch(usize, usize),

    #[error("domains [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}] cannot be merged")]
    Merge { a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64 },

    #[error("verdict is not converged: {0}")]
    NotConverged(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
