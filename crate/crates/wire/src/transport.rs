//! Line framing over byte streams, plus an in-memory loopback for tests.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::sync::mpsc::{channel, Receiver, Sender};

use crate::{WireError, MAX_LINE_BYTES};

/// One line out, one line in. Lines never contain the terminating newline.
pub trait LineTransport {
    fn send_line(&mut self, line: &str) -> Result<(), WireError>;
    /// `Ok(None)` is a clean end of stream.
    fn recv_line(&mut self) -> Result<Option<String>, WireError>;
}

/// Framing over any reader/writer pair.
pub struct StreamTransport<R, W> {
    reader: R,
    writer: W,
}

impl<R: BufRead, W: Write> StreamTransport<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        StreamTransport { reader, writer }
    }
}

impl<R: BufRead, W: Write> LineTransport for StreamTransport<R, W> {
    fn send_line(&mut self, line: &str) -> Result<(), WireError> {
        if line.len() + 1 > MAX_LINE_BYTES {
            return Err(WireError::Oversize);
        }
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv_line(&mut self) -> Result<Option<String>, WireError> {
        // Cap the read budget so a hostile peer cannot buffer unbounded data.
        let mut buf = Vec::new();
        let mut limited = (&mut self.reader).take(MAX_LINE_BYTES as u64);
        let n = limited.read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Ok(None);
        }
        match buf.pop() {
            Some(b'\n') => {}
            // Either the budget ran out mid-line or the peer closed
            // without terminating the line.
            Some(_) if n == MAX_LINE_BYTES => return Err(WireError::Oversize),
            _ => return Err(WireError::Closed),
        }
        line_from_bytes(buf)
    }
}

fn line_from_bytes(bytes: Vec<u8>) -> Result<Option<String>, WireError> {
    if bytes.len() + 1 > MAX_LINE_BYTES {
        return Err(WireError::Oversize);
    }
    String::from_utf8(bytes)
        .map(Some)
        .map_err(|_| WireError::NotUtf8)
}

/// Buffered transport over a TCP stream.
pub fn tcp_transport(
    stream: TcpStream,
) -> io::Result<StreamTransport<BufReader<TcpStream>, TcpStream>> {
    let reader = BufReader::new(stream.try_clone()?);
    Ok(StreamTransport::new(reader, stream))
}

/// The same grammar over stdin/stdout, for pipe-connected sessions.
pub fn stdio_transport() -> StreamTransport<BufReader<io::Stdin>, io::Stdout> {
    StreamTransport::new(BufReader::new(io::stdin()), io::stdout())
}

/// In-memory duplex carrying raw line payloads; the test double for a
/// socket. [`ChannelTransport::send_raw`] injects arbitrary bytes as one
/// incoming line on the peer, which is how the fuzz suites drive the
/// server with malformed input.
pub struct ChannelTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
}

/// Connected pair of in-memory transports.
pub fn loopback_pair() -> (ChannelTransport, ChannelTransport) {
    let (atx, arx) = channel();
    let (btx, brx) = channel();
    (
        ChannelTransport { tx: atx, rx: brx },
        ChannelTransport { tx: btx, rx: arx },
    )
}

impl ChannelTransport {
    /// Delivers raw bytes as one line to the peer, bypassing encoding.
    pub fn send_raw(&self, bytes: Vec<u8>) -> Result<(), WireError> {
        self.tx.send(bytes).map_err(|_| WireError::Closed)
    }
}

impl LineTransport for ChannelTransport {
    fn send_line(&mut self, line: &str) -> Result<(), WireError> {
        if line.len() + 1 > MAX_LINE_BYTES {
            return Err(WireError::Oversize);
        }
        self.tx
            .send(line.as_bytes().to_vec())
            .map_err(|_| WireError::Closed)
    }

    fn recv_line(&mut self) -> Result<Option<String>, WireError> {
        match self.rx.recv() {
            Ok(bytes) => line_from_bytes(bytes),
            Err(_) => Ok(None),
        }
    }
}
