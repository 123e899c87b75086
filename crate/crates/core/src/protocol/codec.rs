use std::io::{self, Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

use super::{ProtocolError, Request, RequestBody, Response, ResponseBody};

pub const PROTOCOL_VERSION: u64 = 1;

/// Upper bound on a single frame body; guards against corrupt length prefixes.
pub const MAX_FRAME_BYTES: usize = 256 * 1024 * 1024;

/// Writes every `f64` with 17 significant digits and rejects NaN/inf.
struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite number"));
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

#[derive(Serialize)]
struct EnvelopeOut<'a, B> {
    version: u64,
    kind: &'static str,
    request_id: u64,
    body: &'a B,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeIn {
    #[allow(dead_code)]
    version: u64,
    kind: String,
    request_id: u64,
    body: Value,
}

/// A message that can travel in a frame.
pub trait WireMessage: Sized {
    type Body: Serialize + DeserializeOwned;
    const KIND: &'static str;
    const VARIANTS: &'static [&'static str];

    fn request_id(&self) -> u64;
    fn is_finite(&self) -> bool;
    fn body(&self) -> &Self::Body;
    fn from_parts(request_id: u64, body: Self::Body) -> Self;
}

impl WireMessage for Request {
    type Body = RequestBody;
    const KIND: &'static str = "request";
    const VARIANTS: &'static [&'static str] = RequestBody::VARIANTS;

    fn request_id(&self) -> u64 {
        self.request_id
    }

    fn is_finite(&self) -> bool {
        self.body.is_finite()
    }

    fn body(&self) -> &RequestBody {
        &self.body
    }

    fn from_parts(request_id: u64, body: RequestBody) -> Self {
        Self { request_id, body }
    }
}

impl WireMessage for Response {
    type Body = ResponseBody;
    const KIND: &'static str = "response";
    const VARIANTS: &'static [&'static str] = ResponseBody::VARIANTS;

    fn request_id(&self) -> u64 {
        self.request_id
    }

    fn is_finite(&self) -> bool {
        self.body.is_finite()
    }

    fn body(&self) -> &ResponseBody {
        &self.body
    }

    fn from_parts(request_id: u64, body: ResponseBody) -> Self {
        Self { request_id, body }
    }
}

/// Encodes a message as a complete frame, length prefix included.
pub fn encode<M: WireMessage>(msg: &M) -> Result<Vec<u8>, ProtocolError> {
    // serde_json would silently write `null` for NaN and infinities.
    if !msg.is_finite() {
        return Err(ProtocolError::NonFiniteValue);
    }
    let mut frame = vec![0u8; 4];
    let envelope = EnvelopeOut {
        version: PROTOCOL_VERSION,
        kind: M::KIND,
        request_id: msg.request_id(),
        body: msg.body(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut frame, CanonicalFormatter);
    envelope.serialize(&mut ser).map_err(|e| {
        if e.is_io() {
            ProtocolError::NonFiniteValue
        } else {
            ProtocolError::MalformedFrame(e.to_string())
        }
    })?;
    let len = frame.len() - 4;
    if len > MAX_FRAME_BYTES {
        return Err(ProtocolError::MalformedFrame(format!(
            "frame of {len} bytes is too large"
        )));
    }
    frame[..4].copy_from_slice(&(len as u32).to_be_bytes());
    Ok(frame)
}

/// Decodes a complete frame produced by [`encode`].
pub fn decode<M: WireMessage>(frame: &[u8]) -> Result<M, ProtocolError> {
    if frame.len() < 4 {
        return Err(ProtocolError::MalformedFrame("missing length prefix".into()));
    }
    let declared = u32::from_be_bytes([frame[0], frame[1], frame[2], frame[3]]) as usize;
    let body = &frame[4..];
    if body.len() != declared {
        return Err(ProtocolError::MalformedFrame(format!(
            "length prefix says {declared} bytes, frame holds {}",
            body.len()
        )));
    }
    let value: Value = serde_json::from_slice(body).map_err(|e| ProtocolError::MalformedFrame(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| ProtocolError::MalformedFrame("missing version".into()))?;
    if version != PROTOCOL_VERSION {
        return Err(ProtocolError::VersionMismatch {
            expected: PROTOCOL_VERSION,
            found: version,
        });
    }
    let envelope: EnvelopeIn =
        serde_json::from_value(value).map_err(|e| ProtocolError::MalformedFrame(e.to_string()))?;
    if envelope.kind != M::KIND {
        return Err(ProtocolError::UnknownVariant(envelope.kind));
    }
    let variant = envelope
        .body
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| ProtocolError::MalformedFrame("body without type".into()))?;
    if !M::VARIANTS.contains(&variant) {
        return Err(ProtocolError::UnknownVariant(variant.to_string()));
    }
    let body: M::Body =
        serde_json::from_value(envelope.body).map_err(|e| ProtocolError::MalformedFrame(e.to_string()))?;
    Ok(M::from_parts(envelope.request_id, body))
}

/// Reads one frame from a stream. Returns `None` on a clean end of stream.
pub fn read_frame<R: Read>(reader: &mut R) -> Result<Option<Vec<u8>>, ProtocolError> {
    let mut prefix = [0u8; 4];
    let mut filled = 0;
    while filled < 4 {
        match reader.read(&mut prefix[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(ProtocolError::MalformedFrame("truncated length prefix".into())),
            Ok(k) => filled += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(prefix) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(ProtocolError::MalformedFrame(format!(
            "frame of {len} bytes is too large"
        )));
    }
    let mut frame = vec![0u8; 4 + len];
    frame[..4].copy_from_slice(&prefix);
    reader.read_exact(&mut frame[4..]).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            ProtocolError::MalformedFrame("truncated frame body".into())
        } else {
            e.into()
        }
    })?;
    Ok(Some(frame))
}

pub fn write_frame<W: Write>(writer: &mut W, frame: &[u8]) -> Result<(), ProtocolError> {
    writer.write_all(frame)?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::SiteMeta;
    use proptest::prelude::*;

    fn roundtrip_request(body: RequestBody) {
        let msg = Request { request_id: 42, body };
        let frame = encode(&msg).unwrap();
        let back: Request = decode(&frame).unwrap();
        assert_eq!(back, msg);
        assert_eq!(encode(&back).unwrap(), frame);
    }

    #[test]
    fn describe_roundtrip() {
        roundtrip_request(RequestBody::Describe);
    }

    #[test]
    fn covariance_block_roundtrip_keeps_order() {
        roundtrip_request(RequestBody::CovarianceBlock {
            pairs: vec![(0, 1), (2, 6)],
        });
    }

    #[test]
    fn body_has_fixed_field_order() {
        let frame = encode(&Request {
            request_id: 7,
            body: RequestBody::CovarianceBlock {
                pairs: vec![(0, 1), (2, 6)],
            },
        })
        .unwrap();
        assert_eq!(
            std::str::from_utf8(&frame[4..]).unwrap(),
            r#"{"version":1,"kind":"request","request_id":7,"body":{"type":"CovarianceBlock","pairs":[[0,1],[2,6]]}}"#
        );
        assert_eq!(
            u32::from_be_bytes(frame[..4].try_into().unwrap()) as usize,
            frame.len() - 4
        );
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let frame = encode(&Response {
            request_id: 1,
            body: ResponseBody::SsqSums {
                ssq_x: vec![0.1],
                ssq_y: -2.5,
            },
        })
        .unwrap();
        let text = std::str::from_utf8(&frame[4..]).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("-2.5000000000000000e0"), "{text}");
    }

    #[test]
    fn truncated_frame_is_malformed() {
        let frame = encode(&Request {
            request_id: 1,
            body: RequestBody::Describe,
        })
        .unwrap();
        let err = decode::<Request>(&frame[..frame.len() - 3]).unwrap_err();
        assert!(matches!(err, ProtocolError::MalformedFrame(_)));
        assert!(matches!(
            decode::<Request>(&frame[..2]).unwrap_err(),
            ProtocolError::MalformedFrame(_)
        ));
    }

    fn frame_from_text(text: &str) -> Vec<u8> {
        let mut frame = (text.len() as u32).to_be_bytes().to_vec();
        frame.extend_from_slice(text.as_bytes());
        frame
    }

    #[test]
    fn unknown_variant_and_version() {
        let frame = frame_from_text(r#"{"version":1,"kind":"request","request_id":1,"body":{"type":"DumpRows"}}"#);
        assert!(matches!(
            decode::<Request>(&frame).unwrap_err(),
            ProtocolError::UnknownVariant(v) if v == "DumpRows"
        ));
        let frame = frame_from_text(r#"{"version":2,"kind":"request","request_id":1,"body":{"type":"Describe"}}"#);
        assert!(matches!(
            decode::<Request>(&frame).unwrap_err(),
            ProtocolError::VersionMismatch { found: 2, .. }
        ));
        let frame = frame_from_text("{not json");
        assert!(matches!(
            decode::<Request>(&frame).unwrap_err(),
            ProtocolError::MalformedFrame(_)
        ));
    }

    #[test]
    fn request_frame_is_not_a_response() {
        let frame = encode(&Request {
            request_id: 1,
            body: RequestBody::UnivariableStats,
        })
        .unwrap();
        assert!(decode::<Response>(&frame).is_err());
    }

    #[test]
    fn non_finite_values_cannot_be_encoded() {
        let err = encode(&Response {
            request_id: 1,
            body: ResponseBody::UnivariableStats {
                a: vec![f64::NAN],
                c_diag: vec![1.0],
            },
        })
        .unwrap_err();
        assert!(matches!(err, ProtocolError::NonFiniteValue));
    }

    #[test]
    fn stream_framing() {
        let msgs = [
            Response {
                request_id: 1,
                body: ResponseBody::SiteMeta(SiteMeta { n: 10, p: 3 }),
            },
            Response {
                request_id: 2,
                body: ResponseBody::Ack,
            },
        ];
        let mut buf = Vec::new();
        for m in &msgs {
            write_frame(&mut buf, &encode(m).unwrap()).unwrap();
        }
        let mut cursor = std::io::Cursor::new(buf);
        for m in &msgs {
            let frame = read_frame(&mut cursor).unwrap().unwrap();
            assert_eq!(&decode::<Response>(&frame).unwrap(), m);
        }
        assert!(read_frame(&mut cursor).unwrap().is_none());
        let mut short = std::io::Cursor::new(vec![0u8, 0, 0, 9, b'{']);
        assert!(matches!(
            read_frame(&mut short).unwrap_err(),
            ProtocolError::MalformedFrame(_)
        ));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            -1e6..1e6f64,
            Just(0.0),
            Just(-0.0),
            Just(f64::MIN_POSITIVE / 8.0),
        ]
    }

    fn request_body() -> impl Strategy<Value = RequestBody> {
        prop_oneof![
            Just(RequestBody::Describe),
            Just(RequestBody::StandardizeLocal),
            Just(RequestBody::GlobalMeans),
            Just(RequestBody::UnivariableStats),
            (prop::collection::vec(finite(), 0..20), finite())
                .prop_map(|(means, y_mean)| RequestBody::GlobalSsq { means, y_mean }),
            (prop::collection::vec((finite(), finite()), 0..20), finite()).prop_map(|(ms, y_mean)| {
                RequestBody::ApplyGlobalStandardization {
                    means: ms.iter().map(|m| m.0).collect(),
                    sds: ms.iter().map(|m| m.1).collect(),
                    y_mean,
                }
            }),
            prop::collection::vec((0usize..5000, 0usize..5000), 0..40)
                .prop_map(|pairs| RequestBody::CovarianceBlock { pairs }),
        ]
    }

    fn response_body() -> impl Strategy<Value = ResponseBody> {
        prop_oneof![
            (0usize..1_000_000, 0usize..100_000).prop_map(|(n, p)| ResponseBody::SiteMeta(SiteMeta { n, p })),
            Just(ResponseBody::Ack),
            (0usize..100_000, finite(), prop::collection::vec(finite(), 0..20))
                .prop_map(|(n, sum_y, sum_x)| ResponseBody::MomentSums { n, sum_y, sum_x }),
            (prop::collection::vec(finite(), 0..20), finite())
                .prop_map(|(ssq_x, ssq_y)| ResponseBody::SsqSums { ssq_x, ssq_y }),
            (prop::collection::vec((finite(), finite()), 0..20)).prop_map(|v| {
                ResponseBody::UnivariableStats {
                    a: v.iter().map(|x| x.0).collect(),
                    c_diag: v.iter().map(|x| x.1).collect(),
                }
            }),
            prop::collection::vec((0usize..5000, 0usize..5000, finite()), 0..40)
                .prop_map(|values| ResponseBody::CovarianceBlock { values }),
            "[ -~\\p{L}\"\\\\]{0,40}".prop_map(|reason| ResponseBody::Refusal { reason }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn request_roundtrip(id in any::<u64>(), body in request_body()) {
            let msg = Request { request_id: id, body };
            let frame = encode(&msg).unwrap();
            let back: Request = decode(&frame).unwrap();
            prop_assert_eq!(encode(&back).unwrap(), frame);
            prop_assert_eq!(back, msg);
        }

        #[test]
        fn response_roundtrip(id in any::<u64>(), body in response_body()) {
            let msg = Response { request_id: id, body };
            let frame = encode(&msg).unwrap();
            let back: Response = decode(&frame).unwrap();
            prop_assert_eq!(encode(&back).unwrap(), frame);
            prop_assert_eq!(back, msg);
        }
    }
}
