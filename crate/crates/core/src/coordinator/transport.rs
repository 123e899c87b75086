use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use crate::protocol::{read_frame, write_frame, ProtocolError};
use crate::site::SiteNode;

/// A channel to one site that carries encoded frames.
///
/// In-process and TCP sites see exactly the same bytes.
pub trait SiteConnection: Send {
    fn label(&self) -> &str;

    /// Sends one request frame and waits for the response frame.
    fn exchange(&mut self, frame: &[u8]) -> Result<Vec<u8>, ProtocolError>;
}

pub struct InProcessSite {
    node: SiteNode,
}

impl InProcessSite {
    pub fn new(node: SiteNode) -> Self {
        Self { node }
    }

    pub fn node(&self) -> &SiteNode {
        &self.node
    }
}

impl SiteConnection for InProcessSite {
    fn label(&self) -> &str {
        self.node.id()
    }

    fn exchange(&mut self, frame: &[u8]) -> Result<Vec<u8>, ProtocolError> {
        self.node.handle_frame(frame)
    }
}

pub struct TcpSite {
    label: String,
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpSite {
    pub fn connect(label: impl Into<String>, addr: impl ToSocketAddrs) -> Result<Self, ProtocolError> {
        let stream = TcpStream::connect(addr)?;
        Self::from_stream(label, stream)
    }

    /// Retries until the site accepts or `wait` has passed.
    pub fn connect_with_retry(label: impl Into<String>, addr: &str, wait: Duration) -> Result<Self, ProtocolError> {
        let deadline = std::time::Instant::now() + wait;
        loop {
            match TcpStream::connect(addr) {
                Ok(stream) => return Self::from_stream(label, stream),
                Err(e) if std::time::Instant::now() >= deadline => return Err(e.into()),
                Err(_) => std::thread::sleep(Duration::from_millis(50)),
            }
        }
    }

    pub fn from_stream(label: impl Into<String>, stream: TcpStream) -> Result<Self, ProtocolError> {
        stream.set_nodelay(true)?;
        Ok(Self {
            label: label.into(),
            reader: BufReader::new(stream.try_clone()?),
            writer: BufWriter::new(stream),
        })
    }
}

impl SiteConnection for TcpSite {
    fn label(&self) -> &str {
        &self.label
    }

    fn exchange(&mut self, frame: &[u8]) -> Result<Vec<u8>, ProtocolError> {
        write_frame(&mut self.writer, frame)?;
        self.writer.flush()?;
        read_frame(&mut self.reader)?.ok_or_else(|| {
            ProtocolError::Io(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "site closed the connection",
            ))
        })
    }
}
