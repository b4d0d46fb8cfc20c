//! The prover side: a session handler over any transport and a TCP accept
//! loop around it.

use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use vpe_core::params::ProtocolParams;
use vpe_core::poly::Polynomial;
use vpe_core::protocol::{make_prover, ProtocolError, ProverSession, ProverSpec, Schedule};

use crate::message::WireMessage;
use crate::transport::{tcp_transport, LineTransport};
use crate::WireError;

/// Everything a prover process needs to answer sessions. The lookup table
/// is deliberately absent: the prover never sees it.
#[derive(Debug, Clone)]
pub struct ProverConfig {
    pub f: Polynomial,
    pub params: ProtocolParams,
    pub spec: ProverSpec,
    pub seed: u64,
}

fn error_token(e: &WireError) -> &'static str {
    match e {
        WireError::Oversize => "oversize",
        WireError::NotUtf8 => "not-utf8",
        WireError::UnknownVerb(_) => "unknown-verb",
        WireError::WrongArity(_) => "bad-arity",
        WireError::NonDecimal(_) => "non-decimal",
        WireError::Version(_) => "bad-version",
        WireError::BadDigest(_) => "bad-digest",
        _ => "malformed",
    }
}

fn send_error<T: LineTransport>(t: &mut T, token: &str) {
    // Best effort: the peer may already be gone.
    let _ = t.send_line(&format!("ERROR {token}"));
}

/// Receives and decodes one message. Malformed input is answered with an
/// `ERROR` line before the failure is returned.
fn next_msg<T: LineTransport>(t: &mut T) -> Result<Option<WireMessage>, WireError> {
    let line = match t.recv_line() {
        Ok(Some(line)) => line,
        Ok(None) => return Ok(None),
        Err(e @ (WireError::Io(_) | WireError::Closed)) => return Err(e),
        Err(e) => {
            send_error(t, error_token(&e));
            return Err(e);
        }
    };
    match WireMessage::decode(&line) {
        Ok(m) => Ok(Some(m)),
        Err(e) => {
            send_error(t, error_token(&e));
            Err(e)
        }
    }
}

fn send_msg<T: LineTransport>(t: &mut T, m: &WireMessage) -> Result<(), WireError> {
    t.send_line(&m.encode()?)
}

/// Runs one full prover session over `transport`.
///
/// Clean closes (a verdict arrived, or the peer hung up between sessions'
/// messages) return `Ok`; everything else returns the failure after an
/// `ERROR` line has been sent where possible. The handler never panics on
/// peer input.
pub fn serve_session<T: LineTransport>(
    transport: &mut T,
    cfg: &ProverConfig,
) -> Result<(), WireError> {
    // Handshake: digests must agree before anything else.
    match next_msg(transport)? {
        None => return Ok(()),
        Some(WireMessage::Hello { digest_hex }) => {
            if digest_hex != cfg.params.digest_hex() {
                send_error(transport, "digest-mismatch");
                return Err(WireError::DigestMismatch);
            }
            send_msg(
                transport,
                &WireMessage::Hello {
                    digest_hex: cfg.params.digest_hex(),
                },
            )?;
        }
        Some(_) => {
            send_error(transport, "handshake");
            return Err(WireError::Handshake("expected HELLO".into()));
        }
    }

    // Evaluation point.
    let x = match next_msg(transport)? {
        None => return Ok(()),
        Some(WireMessage::Eval { x }) => match cfg.params.modulus().try_element(x) {
            Ok(x) => x,
            Err(_) => {
                send_error(transport, "non-canonical");
                return Err(WireError::NonCanonical(x));
            }
        },
        Some(_) => {
            send_error(transport, "handshake");
            return Err(WireError::Handshake("expected EVAL".into()));
        }
    };

    let schedule = Schedule::univariate(x, cfg.params.r());
    let mut prover = match make_prover(cfg.spec, &cfg.f, &cfg.params, schedule, cfg.seed) {
        Ok(p) => p,
        Err(e) => {
            send_error(transport, "internal");
            return Err(WireError::Protocol(e));
        }
    };

    let claim = match prover.claim() {
        Ok(v) => v,
        Err(e) => {
            send_error(transport, "internal");
            return Err(WireError::Protocol(e));
        }
    };
    send_msg(transport, &WireMessage::Claim { value: claim.value() })?;

    let m = cfg.params.m();
    let r = cfg.params.r();
    for e in 0..m {
        if prover.begin_experiment().is_err() {
            // An unresponsive prover drops the connection without a word.
            return Ok(());
        }
        for level in 1..=r {
            let values = match prover.round_values() {
                Ok(v) => v,
                Err(ProtocolError::ProverUnavailable) => return Ok(()),
                Err(e) => {
                    send_error(transport, "internal");
                    return Err(WireError::Protocol(e));
                }
            };
            send_msg(
                transport,
                &WireMessage::Round {
                    experiment: e,
                    level,
                    values: values.iter().map(|v| v.value()).collect(),
                },
            )?;
            match next_msg(transport)? {
                None => return Ok(()),
                Some(WireMessage::Verdict { .. }) => return Ok(()),
                Some(WireMessage::Chal {
                    experiment,
                    level: l,
                    b,
                }) => {
                    if experiment != e || l != level {
                        send_error(transport, "unexpected-chal");
                        return Err(WireError::Unexpected(format!(
                            "CHAL {experiment} {l}, expected {e} {level}"
                        )));
                    }
                    if b >= cfg.params.c_eta() {
                        send_error(transport, "bad-challenge");
                        return Err(WireError::Unexpected(format!("challenge {b}")));
                    }
                    if let Err(err) = prover.accept_challenge(b) {
                        send_error(transport, "internal");
                        return Err(WireError::Protocol(err));
                    }
                }
                Some(_) => {
                    send_error(transport, "unexpected-message");
                    return Err(WireError::Unexpected("wanted CHAL".into()));
                }
            }
        }
        // The verifier closes the experiment by announcing its constant.
        match next_msg(transport)? {
            None => return Ok(()),
            Some(WireMessage::Verdict { .. }) => return Ok(()),
            Some(WireMessage::Final { experiment, .. }) if experiment == e => {}
            Some(_) => {
                send_error(transport, "unexpected-message");
                return Err(WireError::Unexpected("wanted FINAL".into()));
            }
        }
    }
    match next_msg(transport)? {
        None | Some(WireMessage::Verdict { .. }) => Ok(()),
        Some(_) => {
            send_error(transport, "unexpected-message");
            Err(WireError::Unexpected("wanted VERDICT".into()))
        }
    }
}

/// TCP accept loop: one thread per connection, sessions fully isolated.
pub struct ProverServer {
    listener: TcpListener,
    cfg: Arc<ProverConfig>,
}

impl ProverServer {
    pub fn bind<A: ToSocketAddrs>(addr: A, cfg: ProverConfig) -> std::io::Result<ProverServer> {
        Ok(ProverServer {
            listener: TcpListener::bind(addr)?,
            cfg: Arc::new(cfg),
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts sessions until the limit is reached (or forever without
    /// one). Session failures are contained to their connection. With a
    /// limit, all accepted sessions are joined before returning; without
    /// one, session threads are detached.
    pub fn serve(&self, max_sessions: Option<u64>) -> std::io::Result<()> {
        let mut handles = Vec::new();
        for (accepted, stream) in self.listener.incoming().enumerate() {
            let stream = stream?;
            let cfg = Arc::clone(&self.cfg);
            let handle = thread::spawn(move || {
                if let Ok(mut transport) = tcp_transport(stream) {
                    let _ = serve_session(&mut transport, &cfg);
                }
            });
            if let Some(max) = max_sessions {
                handles.push(handle);
                if accepted as u64 + 1 >= max {
                    break;
                }
            }
        }
        for h in handles {
            let _ = h.join();
        }
        Ok(())
    }
}
