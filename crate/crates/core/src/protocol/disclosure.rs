use serde::{Deserialize, Serialize};

use super::{RequestBody, SiteMeta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisclosurePolicy {
    /// Sites with fewer individuals serve nothing but `Describe`.
    pub min_site_n: usize,
}

impl Default for DisclosurePolicy {
    fn default() -> Self {
        Self { min_site_n: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Disclosure {
    Allow,
    Refuse { reason: String },
}

pub fn check_disclosure(request: &RequestBody, meta: SiteMeta, policy: &DisclosurePolicy) -> Disclosure {
    if matches!(request, RequestBody::Describe) {
        return Disclosure::Allow;
    }
    if meta.n < policy.min_site_n.max(1) {
        return Disclosure::Refuse {
            reason: format!("site too small: n={} < {}", meta.n, policy.min_site_n),
        };
    }
    Disclosure::Allow
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(n: usize) -> SiteMeta {
        SiteMeta { n, p: 4 }
    }

    #[test]
    fn large_site_is_served() {
        let policy = DisclosurePolicy::default();
        assert_eq!(
            check_disclosure(&RequestBody::UnivariableStats, meta(25), &policy),
            Disclosure::Allow
        );
    }

    #[test]
    fn small_site_refuses_statistics() {
        let policy = DisclosurePolicy::default();
        let req = RequestBody::CovarianceBlock { pairs: vec![(0, 1)] };
        match check_disclosure(&req, meta(5), &policy) {
            Disclosure::Refuse { reason } => assert!(reason.contains("site too small")),
            Disclosure::Allow => panic!("expected refusal"),
        }
        assert!(matches!(
            check_disclosure(&RequestBody::GlobalMeans, meta(5), &policy),
            Disclosure::Refuse { .. }
        ));
    }

    #[test]
    fn describe_is_never_refused() {
        let policy = DisclosurePolicy { min_site_n: 10 };
        assert_eq!(
            check_disclosure(&RequestBody::Describe, meta(5), &policy),
            Disclosure::Allow
        );
        assert_eq!(
            check_disclosure(&RequestBody::Describe, meta(0), &policy),
            Disclosure::Allow
        );
    }
}
