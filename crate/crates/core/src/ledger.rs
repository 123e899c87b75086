//! Accounting of data calls and transferred covariance values.

use serde::{Deserialize, Serialize};

/// Traffic observed on one site connection.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteTraffic {
    pub site_id: String,
    /// Request frames sent to the site, setup rounds included.
    pub frames: usize,
    /// Covariance values returned by the site.
    pub covariance_values: usize,
}

/// Logical data calls of one analysis.
///
/// A call is counted once no matter how many sites answer it or how many
/// frames it was split into. Standardization rounds and the univariable
/// round are kept apart from covariance calls.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CallLedger {
    pub setup_calls: usize,
    pub univariable_calls: usize,
    /// Number of pooled covariance values carried by each covariance call.
    pub covariance_calls: Vec<usize>,
    pub per_site: Vec<SiteTraffic>,
}

impl CallLedger {
    /// Univariable plus covariance calls.
    pub fn data_calls(&self) -> usize {
        self.univariable_calls + self.covariance_calls.len()
    }

    pub fn covariance_call_count(&self) -> usize {
        self.covariance_calls.len()
    }

    pub fn values_transferred(&self) -> usize {
        self.covariance_calls.iter().sum()
    }

    pub fn record_covariance_call(&mut self, values: usize) {
        self.covariance_calls.push(values);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let mut ledger = CallLedger {
            univariable_calls: 1,
            ..Default::default()
        };
        ledger.record_covariance_call(4);
        ledger.record_covariance_call(3);
        assert_eq!(ledger.data_calls(), 3);
        assert_eq!(ledger.covariance_call_count(), 2);
        assert_eq!(ledger.values_transferred(), 7);
    }
}
