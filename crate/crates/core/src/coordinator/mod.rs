//! The analysis side: broadcasts requests to every site, pools the answers,
//! and serves them to the boosting engine as consortium-wide aggregates.

mod pool;
mod transport;

pub use pool::{pool_covariances, pool_univariable};
pub use transport::{InProcessSite, SiteConnection, TcpSite};

use log::debug;
use thiserror::Error;

use crate::boost::{AggregateProvider, CovPair, ProviderError, UnivariableStats};
use crate::ledger::SiteTraffic;
use crate::protocol::{
    decode, encode, ProtocolError, Request, RequestBody, Response, ResponseBody, SiteMeta, MAX_PAIRS_PER_MESSAGE,
};
use crate::site::{SiteNode, StandardizationMode};

#[derive(Debug, Error)]
pub enum CoordinatorError {
    #[error("no sites configured")]
    NoSites,
    #[error("site {site}: {source}")]
    Protocol {
        site: String,
        #[source]
        source: ProtocolError,
    },
    #[error("site {site} refused: {reason}")]
    Refused { site: String, reason: String },
    #[error("site {site}: expected a response to {expected}, got {got}")]
    UnexpectedResponse {
        site: String,
        expected: &'static str,
        got: &'static str,
    },
    #[error("site {site}: response id {found} does not match request id {expected}")]
    RequestIdMismatch { site: String, expected: u64, found: u64 },
    #[error("sites disagree: {0}")]
    InconsistentSites(String),
    #[error("expected answers from {expected} sites, received {received}")]
    MissingSite { expected: usize, received: usize },
    #[error("site {site}: expected {expected} values, got {actual}")]
    LengthMismatch {
        site: String,
        expected: usize,
        actual: usize,
    },
    #[error("site {site}: expected pair {expected:?}, found {found:?}")]
    PairMismatch {
        site: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("covariate {0} has zero pooled variance")]
    DegenerateColumn(usize),
}

impl CoordinatorError {
    pub fn site(&self) -> Option<&str> {
        match self {
            Self::Protocol { site, .. }
            | Self::Refused { site, .. }
            | Self::UnexpectedResponse { site, .. }
            | Self::RequestIdMismatch { site, .. }
            | Self::LengthMismatch { site, .. }
            | Self::PairMismatch { site, .. } => Some(site),
            _ => None,
        }
    }
}

impl From<CoordinatorError> for ProviderError {
    fn from(e: CoordinatorError) -> Self {
        match e.site() {
            Some(site) => ProviderError::at_site(site.to_string(), e.to_string()),
            None => ProviderError::new(e.to_string()),
        }
    }
}

pub struct SiteHandle {
    meta: SiteMeta,
    conn: Box<dyn SiteConnection>,
    traffic: SiteTraffic,
}

impl SiteHandle {
    pub fn id(&self) -> &str {
        &self.traffic.site_id
    }

    pub fn meta(&self) -> SiteMeta {
        self.meta
    }

    pub fn traffic(&self) -> &SiteTraffic {
        &self.traffic
    }

    fn exchange(&mut self, request: &Request) -> Result<ResponseBody, CoordinatorError> {
        let site = self.traffic.site_id.clone();
        let wrap = |source| CoordinatorError::Protocol {
            site: site.clone(),
            source,
        };
        let frame = encode(request).map_err(wrap)?;
        self.traffic.frames += 1;
        let reply: Response = decode(&self.conn.exchange(&frame).map_err(wrap)?).map_err(wrap)?;
        if reply.request_id != request.request_id {
            return Err(CoordinatorError::RequestIdMismatch {
                site,
                expected: request.request_id,
                found: reply.request_id,
            });
        }
        if let ResponseBody::Refusal { reason } = reply.body {
            return Err(CoordinatorError::Refused { site, reason });
        }
        if !reply.body.answers(&request.body) {
            return Err(CoordinatorError::UnexpectedResponse {
                site,
                expected: request.body.variant_name(),
                got: reply.body.variant_name(),
            });
        }
        Ok(reply.body)
    }
}

/// Connected sites plus the bookkeeping of one analysis.
pub struct Coordinator {
    sites: Vec<SiteHandle>,
    p: usize,
    next_request_id: u64,
    setup_calls: usize,
    standardization: Option<StandardizationMode>,
}

impl Coordinator {
    /// Asks every site to describe itself and checks that they agree on `p`.
    pub fn connect(connections: Vec<Box<dyn SiteConnection>>) -> Result<Self, CoordinatorError> {
        if connections.is_empty() {
            return Err(CoordinatorError::NoSites);
        }
        let sites = connections
            .into_iter()
            .map(|conn| SiteHandle {
                meta: SiteMeta { n: 0, p: 0 },
                traffic: SiteTraffic {
                    site_id: conn.label().to_string(),
                    ..Default::default()
                },
                conn,
            })
            .collect();
        let mut coordinator = Self {
            sites,
            p: 0,
            next_request_id: 1,
            setup_calls: 0,
            standardization: None,
        };
        let metas: Vec<SiteMeta> = coordinator
            .broadcast(RequestBody::Describe)?
            .into_iter()
            .map(|(_, body)| match body {
                ResponseBody::SiteMeta(meta) => meta,
                _ => unreachable!("checked by broadcast"),
            })
            .collect();
        let p = metas[0].p;
        for (site, meta) in coordinator.sites.iter_mut().zip(metas) {
            if meta.p != p {
                return Err(CoordinatorError::InconsistentSites(format!(
                    "site {} has p={} but the first site has p={p}",
                    site.id(),
                    meta.p
                )));
            }
            site.meta = meta;
        }
        coordinator.p = p;
        Ok(coordinator)
    }

    pub fn in_process(nodes: Vec<SiteNode>) -> Result<Self, CoordinatorError> {
        Self::connect(
            nodes
                .into_iter()
                .map(|n| Box::new(InProcessSite::new(n)) as Box<dyn SiteConnection>)
                .collect(),
        )
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_total(&self) -> usize {
        self.sites.iter().map(|s| s.meta.n).sum()
    }

    pub fn sites(&self) -> &[SiteHandle] {
        &self.sites
    }

    pub fn standardization(&self) -> Option<StandardizationMode> {
        self.standardization
    }

    /// Sends the same request to every site concurrently and returns the
    /// answers in site order. Any refusal or malformed reply aborts.
    pub fn broadcast(&mut self, body: RequestBody) -> Result<Vec<(String, ResponseBody)>, CoordinatorError> {
        let request = Request {
            request_id: self.next_request_id,
            body,
        };
        self.next_request_id += 1;
        debug!(
            "broadcast {} {} pairs={}",
            request.request_id,
            request.body.variant_name(),
            request.body.pair_count()
        );
        let request = &request;
        let results: Vec<Result<ResponseBody, CoordinatorError>> = if self.sites.len() == 1 {
            vec![self.sites[0].exchange(request)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = self
                    .sites
                    .iter_mut()
                    .map(|site| scope.spawn(move || site.exchange(request)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("site exchange thread panicked"))
                    .collect()
            })
        };
        self.sites
            .iter()
            .zip(results)
            .map(|(site, r)| r.map(|body| (site.id().to_string(), body)))
            .collect()
    }

    /// Runs the standardization rounds. Each round counts as one setup call.
    pub fn standardize(&mut self, mode: StandardizationMode) -> Result<(), CoordinatorError> {
        match mode {
            StandardizationMode::Local => {
                self.broadcast(RequestBody::StandardizeLocal)?;
                self.setup_calls += 1;
            }
            StandardizationMode::Global => {
                let p = self.p;
                let mut n = 0usize;
                let mut sum_y = 0.0;
                let mut sum_x = vec![0.0; p];
                for (site, body) in self.broadcast(RequestBody::GlobalMeans)? {
                    let ResponseBody::MomentSums {
                        n: nl,
                        sum_y: sy,
                        sum_x: sx,
                    } = body
                    else {
                        unreachable!("checked by broadcast")
                    };
                    check_len(&site, p, sx.len())?;
                    n += nl;
                    sum_y += sy;
                    sum_x.iter_mut().zip(&sx).for_each(|(t, v)| *t += v);
                }
                self.setup_calls += 1;
                let means: Vec<f64> = sum_x.iter().map(|s| s / n as f64).collect();
                let y_mean = sum_y / n as f64;

                let mut ssq = vec![0.0; p];
                let request = RequestBody::GlobalSsq {
                    means: means.clone(),
                    y_mean,
                };
                for (site, body) in self.broadcast(request)? {
                    let ResponseBody::SsqSums { ssq_x, .. } = body else {
                        unreachable!("checked by broadcast")
                    };
                    check_len(&site, p, ssq_x.len())?;
                    ssq.iter_mut().zip(&ssq_x).for_each(|(t, v)| *t += v);
                }
                self.setup_calls += 1;
                let sds: Vec<f64> = ssq.iter().map(|s| (s / (n - 1) as f64).sqrt()).collect();
                if let Some(j) = sds.iter().position(|s| !(*s > 0.0)) {
                    return Err(CoordinatorError::DegenerateColumn(j));
                }
                self.broadcast(RequestBody::ApplyGlobalStandardization { means, sds, y_mean })?;
                self.setup_calls += 1;
            }
        }
        self.standardization = Some(mode);
        Ok(())
    }

    pub fn fetch_univariable(&mut self) -> Result<UnivariableStats, CoordinatorError> {
        let answers: Vec<(String, UnivariableStats)> = self
            .broadcast(RequestBody::UnivariableStats)?
            .into_iter()
            .map(|(site, body)| match body {
                ResponseBody::UnivariableStats { a, c_diag } => (site, UnivariableStats { a, c_diag }),
                _ => unreachable!("checked by broadcast"),
            })
            .collect();
        pool_univariable(&answers, self.sites.len(), self.p)
    }

    /// Fetches pooled covariances, split into frames of at most
    /// [`MAX_PAIRS_PER_MESSAGE`] pairs.
    pub fn fetch_covariances(&mut self, pairs: &[CovPair]) -> Result<Vec<f64>, CoordinatorError> {
        let mut pooled = Vec::with_capacity(pairs.len());
        for chunk in pairs.chunks(MAX_PAIRS_PER_MESSAGE) {
            let request = RequestBody::CovarianceBlock {
                pairs: chunk.iter().map(|p| p.as_tuple()).collect(),
            };
            let answers: Vec<(String, Vec<(usize, usize, f64)>)> = self
                .broadcast(request)?
                .into_iter()
                .map(|(site, body)| match body {
                    ResponseBody::CovarianceBlock { values } => (site, values),
                    _ => unreachable!("checked by broadcast"),
                })
                .collect();
            pooled.extend(pool_covariances(chunk, &answers, self.sites.len())?);
            for site in &mut self.sites {
                site.traffic.covariance_values += chunk.len();
            }
        }
        Ok(pooled)
    }
}

fn check_len(site: &str, expected: usize, actual: usize) -> Result<(), CoordinatorError> {
    if expected != actual {
        return Err(CoordinatorError::LengthMismatch {
            site: site.to_string(),
            expected,
            actual,
        });
    }
    Ok(())
}

impl AggregateProvider for Coordinator {
    fn univariable_stats(&mut self) -> Result<UnivariableStats, ProviderError> {
        Ok(self.fetch_univariable()?)
    }

    fn covariances(&mut self, pairs: &[CovPair]) -> Result<Vec<f64>, ProviderError> {
        Ok(self.fetch_covariances(pairs)?)
    }

    fn setup_calls(&self) -> usize {
        self.setup_calls
    }

    fn site_traffic(&self) -> Vec<SiteTraffic> {
        self.sites.iter().map(|s| s.traffic.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::DisclosurePolicy;
    use crate::site::SiteDataset;
    use ndarray::{Array1, Array2};

    fn node(id: &str, n: usize, p: usize, shift: usize) -> SiteNode {
        let x = Array2::from_shape_fn((n, p), |(i, j)| (((i + shift) * (j + 3) + j) % 7) as f64);
        let y = Array1::from_shape_fn(n, |i| (i + shift).is_multiple_of(3) as u8 as f64);
        SiteNode::new(id, SiteDataset::new(x, y).unwrap(), DisclosurePolicy::default())
    }

    #[test]
    fn connect_checks_dimensions() {
        let c = Coordinator::in_process(vec![node("a", 20, 4, 0), node("b", 30, 4, 1)]).unwrap();
        assert_eq!(c.p(), 4);
        assert_eq!(c.n_total(), 50);
        assert!(matches!(
            Coordinator::in_process(vec![node("a", 20, 4, 0), node("b", 20, 5, 0)]),
            Err(CoordinatorError::InconsistentSites(_))
        ));
        assert!(matches!(
            Coordinator::in_process(vec![]),
            Err(CoordinatorError::NoSites)
        ));
    }

    #[test]
    fn refusal_aborts_with_site_label() {
        let mut c = Coordinator::in_process(vec![node("a", 20, 3, 0), node("tiny", 4, 3, 0)]).unwrap();
        let err = c.standardize(StandardizationMode::Local).unwrap_err();
        assert_eq!(err.site(), Some("tiny"));
    }

    #[test]
    fn local_diagonal_pools_to_n_minus_sites() {
        let mut c = Coordinator::in_process(vec![node("a", 20, 3, 0), node("b", 25, 3, 2)]).unwrap();
        c.standardize(StandardizationMode::Local).unwrap();
        let stats = c.fetch_univariable().unwrap();
        for v in stats.c_diag {
            assert!((v - 43.0).abs() < 1e-10);
        }
    }

    #[test]
    fn global_diagonal_pools_to_n_minus_one() {
        let mut c = Coordinator::in_process(vec![node("a", 20, 3, 0), node("b", 25, 3, 2)]).unwrap();
        c.standardize(StandardizationMode::Global).unwrap();
        assert_eq!(c.setup_calls(), 3);
        let stats = c.fetch_univariable().unwrap();
        for v in stats.c_diag {
            assert!((v - 44.0).abs() < 1e-10);
        }
    }

    #[test]
    fn covariances_count_traffic() {
        let mut c = Coordinator::in_process(vec![node("a", 20, 4, 0), node("b", 25, 4, 2)]).unwrap();
        c.standardize(StandardizationMode::Local).unwrap();
        let pairs = vec![CovPair::new(0, 1).unwrap(), CovPair::new(2, 3).unwrap()];
        let v = c.fetch_covariances(&pairs).unwrap();
        assert_eq!(v.len(), 2);
        let traffic = c.site_traffic();
        assert_eq!(traffic[0].covariance_values, 2);
        assert_eq!(traffic[0].frames, 3);
    }
}
