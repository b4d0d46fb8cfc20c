//! Byte-stream execution of the evaluation protocol.
//!
//! Both parties speak a newline-delimited UTF-8 grammar, one message per
//! line, at most 64 KiB each; every argument is a decimal integer and
//! field elements travel as canonical representatives. A session opens
//! with a `HELLO` exchange carrying the params digest, the verifier names
//! the evaluation point with `EVAL`, and from there the messages mirror
//! the in-process driver exactly: `CLAIM`, then `ROUND`/`CHAL` pairs,
//! `FINAL` per experiment and one `VERDICT`. Ill-formed input is answered
//! with an `ERROR` line and the connection closes; transport failures are
//! errors, never verdicts.

mod client;
mod message;
mod server;
mod transport;

pub use client::{connect_verifier, run_verifier_session};
pub use message::{WireMessage, MAX_LINE_BYTES};
pub use server::{serve_session, ProverConfig, ProverServer};
pub use transport::{loopback_pair, stdio_transport, tcp_transport, ChannelTransport, LineTransport, StreamTransport};

use vpe_core::protocol::ProtocolError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("i/o failure: {0}")]
    Io(String),
    #[error("line exceeds {MAX_LINE_BYTES} bytes")]
    Oversize,
    #[error("line is not valid UTF-8")]
    NotUtf8,
    #[error("connection closed")]
    Closed,
    #[error("unknown verb {0:?}")]
    UnknownVerb(String),
    #[error("wrong number of arguments for {0}")]
    WrongArity(&'static str),
    #[error("non-decimal argument {0:?}")]
    NonDecimal(String),
    #[error("unsupported protocol version {0:?}")]
    Version(String),
    #[error("malformed digest {0:?}")]
    BadDigest(String),
    #[error("params digest mismatch")]
    DigestMismatch,
    #[error("handshake violation: {0}")]
    Handshake(String),
    #[error("remote error: {0}")]
    Remote(String),
    #[error("unexpected message: {0}")]
    Unexpected(String),
    #[error("value {0} is not canonical for the session modulus")]
    NonCanonical(u64),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl From<std::io::Error> for WireError {
    fn from(e: std::io::Error) -> Self {
        WireError::Io(e.to_string())
    }
}
