//! Messages exchanged between the analysis coordinator and the data sites.
//!
//! Every frame is a 4-byte big-endian length followed by a UTF-8 JSON body
//! with a fixed field order:
//!
//! ```text
//! {"version":1,"kind":"request","request_id":7,"body":{"type":"CovarianceBlock","pairs":[[0,1],[2,6]]}}
//! ```
//!
//! Floating-point values are written with 17 significant digits so that
//! decoding recovers the exact bits. Covariate indices are zero-based.
//! No variant carries individual-level rows; every statistic is a sum over
//! the site's individuals.

mod codec;
mod disclosure;

pub use codec::{decode, encode, read_frame, write_frame, WireMessage, MAX_FRAME_BYTES, PROTOCOL_VERSION};
pub use disclosure::{check_disclosure, Disclosure, DisclosurePolicy};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Larger covariance plans are split across several frames.
pub const MAX_PAIRS_PER_MESSAGE: usize = 65_536;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("malformed frame: {0}")]
    MalformedFrame(String),
    #[error("unknown message variant `{0}`")]
    UnknownVariant(String),
    #[error("protocol version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u64, found: u64 },
    #[error("message contains a non-finite number")]
    NonFiniteValue,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteMeta {
    pub n: usize,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum RequestBody {
    Describe,
    StandardizeLocal,
    GlobalMeans,
    GlobalSsq {
        means: Vec<f64>,
        y_mean: f64,
    },
    ApplyGlobalStandardization {
        means: Vec<f64>,
        sds: Vec<f64>,
        y_mean: f64,
    },
    UnivariableStats,
    CovarianceBlock {
        pairs: Vec<(usize, usize)>,
    },
}

impl RequestBody {
    pub const VARIANTS: &'static [&'static str] = &[
        "Describe",
        "StandardizeLocal",
        "GlobalMeans",
        "GlobalSsq",
        "ApplyGlobalStandardization",
        "UnivariableStats",
        "CovarianceBlock",
    ];

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::Describe => "Describe",
            Self::StandardizeLocal => "StandardizeLocal",
            Self::GlobalMeans => "GlobalMeans",
            Self::GlobalSsq { .. } => "GlobalSsq",
            Self::ApplyGlobalStandardization { .. } => "ApplyGlobalStandardization",
            Self::UnivariableStats => "UnivariableStats",
            Self::CovarianceBlock { .. } => "CovarianceBlock",
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Self::GlobalSsq { means, y_mean } => y_mean.is_finite() && all_finite(means),
            Self::ApplyGlobalStandardization { means, sds, y_mean } => {
                y_mean.is_finite() && all_finite(means) && all_finite(sds)
            }
            _ => true,
        }
    }

    pub fn pair_count(&self) -> usize {
        match self {
            Self::CovarianceBlock { pairs } => pairs.len(),
            _ => 0,
        }
    }

    /// Checks invariants that do not depend on the receiving site.
    pub fn validate(&self) -> Result<(), ProtocolError> {
        match self {
            Self::CovarianceBlock { pairs } => {
                if pairs.len() > MAX_PAIRS_PER_MESSAGE {
                    return Err(ProtocolError::InvalidRequest(format!(
                        "{} pairs exceed the per-message cap of {MAX_PAIRS_PER_MESSAGE}",
                        pairs.len()
                    )));
                }
                let mut seen = HashSet::with_capacity(pairs.len());
                for &(j, k) in pairs {
                    if j == k {
                        return Err(ProtocolError::InvalidRequest(format!("diagonal pair ({j}, {k})")));
                    }
                    if !seen.insert((j.min(k), j.max(k))) {
                        return Err(ProtocolError::InvalidRequest(format!("duplicate pair ({j}, {k})")));
                    }
                }
                Ok(())
            }
            Self::ApplyGlobalStandardization { means, sds, .. } => {
                if means.len() != sds.len() {
                    return Err(ProtocolError::InvalidRequest("means and sds differ in length".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum ResponseBody {
    SiteMeta(SiteMeta),
    Ack,
    MomentSums { n: usize, sum_y: f64, sum_x: Vec<f64> },
    SsqSums { ssq_x: Vec<f64>, ssq_y: f64 },
    UnivariableStats { a: Vec<f64>, c_diag: Vec<f64> },
    CovarianceBlock { values: Vec<(usize, usize, f64)> },
    Refusal { reason: String },
}

impl ResponseBody {
    pub const VARIANTS: &'static [&'static str] = &[
        "SiteMeta",
        "Ack",
        "MomentSums",
        "SsqSums",
        "UnivariableStats",
        "CovarianceBlock",
        "Refusal",
    ];

    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::SiteMeta(_) => "SiteMeta",
            Self::Ack => "Ack",
            Self::MomentSums { .. } => "MomentSums",
            Self::SsqSums { .. } => "SsqSums",
            Self::UnivariableStats { .. } => "UnivariableStats",
            Self::CovarianceBlock { .. } => "CovarianceBlock",
            Self::Refusal { .. } => "Refusal",
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Self::MomentSums { sum_y, sum_x, .. } => sum_y.is_finite() && all_finite(sum_x),
            Self::SsqSums { ssq_x, ssq_y } => ssq_y.is_finite() && all_finite(ssq_x),
            Self::UnivariableStats { a, c_diag } => all_finite(a) && all_finite(c_diag),
            Self::CovarianceBlock { values } => values.iter().all(|v| v.2.is_finite()),
            _ => true,
        }
    }

    /// Whether this is a well-typed answer to `request`. A refusal answers
    /// anything.
    pub fn answers(&self, request: &RequestBody) -> bool {
        use RequestBody as Q;
        matches!(
            (request, self),
            (_, Self::Refusal { .. })
                | (Q::Describe, Self::SiteMeta(_))
                | (Q::StandardizeLocal, Self::Ack)
                | (Q::ApplyGlobalStandardization { .. }, Self::Ack)
                | (Q::GlobalMeans, Self::MomentSums { .. })
                | (Q::GlobalSsq { .. }, Self::SsqSums { .. })
                | (Q::UnivariableStats, Self::UnivariableStats { .. })
                | (Q::CovarianceBlock { .. }, Self::CovarianceBlock { .. })
        )
    }
}

fn all_finite(values: &[f64]) -> bool {
    values.iter().all(|v| v.is_finite())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub request_id: u64,
    pub body: RequestBody,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub request_id: u64,
    pub body: ResponseBody,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_block_validation() {
        let ok = RequestBody::CovarianceBlock {
            pairs: vec![(0, 1), (2, 6)],
        };
        assert!(ok.validate().is_ok());
        let diag = RequestBody::CovarianceBlock { pairs: vec![(3, 3)] };
        assert!(diag.validate().is_err());
        let dup = RequestBody::CovarianceBlock {
            pairs: vec![(1, 2), (2, 1)],
        };
        assert!(dup.validate().is_err());
        let big = RequestBody::CovarianceBlock {
            pairs: (0..=MAX_PAIRS_PER_MESSAGE).map(|k| (0, k + 1)).collect(),
        };
        assert!(big.validate().is_err());
    }

    #[test]
    fn response_matching() {
        assert!(ResponseBody::Ack.answers(&RequestBody::StandardizeLocal));
        assert!(!ResponseBody::Ack.answers(&RequestBody::Describe));
        let refusal = ResponseBody::Refusal { reason: "no".into() };
        assert!(refusal.answers(&RequestBody::UnivariableStats));
        assert!(ResponseBody::SiteMeta(SiteMeta { n: 3, p: 2 }).answers(&RequestBody::Describe));
    }
}
