use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};

use log::{debug, info, warn};

use super::{
    apply_global_standardization, covariance_block, global_moment_contrib, global_ssq_contrib, standardize_local,
    univariable_stats, SiteDataset, SiteError, StandardizedSite,
};
use crate::protocol::{
    check_disclosure, decode, encode, read_frame, write_frame, Disclosure, DisclosurePolicy, ProtocolError, Request,
    RequestBody, Response, ResponseBody, SiteMeta,
};

/// Answers protocol requests against one site's data.
#[derive(Debug, Clone)]
pub struct SiteNode {
    id: String,
    raw: SiteDataset,
    standardized: Option<StandardizedSite>,
    policy: DisclosurePolicy,
}

impl SiteNode {
    pub fn new(id: impl Into<String>, raw: SiteDataset, policy: DisclosurePolicy) -> Self {
        Self {
            id: id.into(),
            raw,
            standardized: None,
            policy,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn meta(&self) -> SiteMeta {
        SiteMeta {
            n: self.raw.n(),
            p: self.raw.p(),
        }
    }

    pub fn standardized(&self) -> Option<&StandardizedSite> {
        self.standardized.as_ref()
    }

    pub fn handle(&mut self, request: &Request) -> Response {
        info!(
            "CALL {} {} pairs={}",
            request.request_id,
            request.body.variant_name(),
            request.body.pair_count()
        );
        let body = match check_disclosure(&request.body, self.meta(), &self.policy) {
            Disclosure::Refuse { reason } => ResponseBody::Refusal { reason },
            Disclosure::Allow => match self.dispatch(&request.body) {
                Ok(body) => body,
                Err(reason) => ResponseBody::Refusal { reason },
            },
        };
        if let ResponseBody::Refusal { reason } = &body {
            warn!("site {}: refusing request {}: {reason}", self.id, request.request_id);
        }
        Response {
            request_id: request.request_id,
            body,
        }
    }

    /// Decodes one frame, answers it, and encodes the response. Frames that
    /// cannot be decoded have no request id to echo and are reported as errors.
    pub fn handle_frame(&mut self, frame: &[u8]) -> Result<Vec<u8>, ProtocolError> {
        let request: Request = decode(frame)?;
        let response = self.handle(&request);
        match encode(&response) {
            Ok(bytes) => Ok(bytes),
            Err(e) => encode(&Response {
                request_id: request.request_id,
                body: ResponseBody::Refusal { reason: e.to_string() },
            }),
        }
    }

    fn dispatch(&mut self, body: &RequestBody) -> Result<ResponseBody, String> {
        body.validate().map_err(|e| e.to_string())?;
        let err = |e: SiteError| e.to_string();
        Ok(match body {
            RequestBody::Describe => ResponseBody::SiteMeta(self.meta()),
            RequestBody::StandardizeLocal => {
                self.standardized = Some(standardize_local(&self.raw).map_err(err)?);
                ResponseBody::Ack
            }
            RequestBody::GlobalMeans => {
                let m = global_moment_contrib(&self.raw);
                ResponseBody::MomentSums {
                    n: m.n,
                    sum_y: m.sum_y,
                    sum_x: m.sum_x,
                }
            }
            RequestBody::GlobalSsq { means, y_mean } => {
                let s = global_ssq_contrib(&self.raw, means, *y_mean).map_err(err)?;
                ResponseBody::SsqSums {
                    ssq_x: s.ssq_x,
                    ssq_y: s.ssq_y,
                }
            }
            RequestBody::ApplyGlobalStandardization { means, sds, y_mean } => {
                self.standardized = Some(apply_global_standardization(&self.raw, means, sds, *y_mean).map_err(err)?);
                ResponseBody::Ack
            }
            RequestBody::UnivariableStats => {
                let stats = univariable_stats(self.require_standardized().map_err(err)?);
                ResponseBody::UnivariableStats {
                    a: stats.a,
                    c_diag: stats.c_diag,
                }
            }
            RequestBody::CovarianceBlock { pairs } => {
                let site = self.require_standardized().map_err(err)?;
                ResponseBody::CovarianceBlock {
                    values: covariance_block(site, pairs).map_err(err)?,
                }
            }
        })
    }

    fn require_standardized(&self) -> Result<&StandardizedSite, SiteError> {
        self.standardized.as_ref().ok_or(SiteError::NotStandardized)
    }

    /// Serves connections one after another until the listener fails.
    pub fn serve(&mut self, listener: TcpListener) -> std::io::Result<()> {
        for stream in listener.incoming() {
            let stream = stream?;
            let peer = stream.peer_addr().ok();
            debug!("site {}: connection from {peer:?}", self.id);
            if let Err(e) = self.serve_connection(stream) {
                warn!("site {}: connection from {peer:?} closed: {e}", self.id);
            }
        }
        Ok(())
    }

    /// Answers frames on one connection until the peer closes it.
    pub fn serve_connection(&mut self, stream: TcpStream) -> Result<(), ProtocolError> {
        stream.set_nodelay(true)?;
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut writer = BufWriter::new(stream);
        while let Some(frame) = read_frame(&mut reader)? {
            let reply = self.handle_frame(&frame)?;
            write_frame(&mut writer, &reply)?;
            writer.flush()?;
        }
        Ok(())
    }
}
