//! The verifier side: a [`ProverEndpoint`] over any transport, driven by
//! the same protocol loop as in-process runs.

use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use vpe_core::field::{FieldElement, PrimeModulus};
use vpe_core::lookup::TableSource;
use vpe_core::params::ProtocolParams;
use vpe_core::poly::ZTable;
use vpe_core::protocol::{
    drive_verifier, ProtocolError, ProtocolRun, ProverEndpoint, RejectReason, Schedule,
    SeededCoins, Verdict,
};

use crate::message::WireMessage;
use crate::transport::{tcp_transport, LineTransport};
use crate::WireError;

fn transport_failure(e: WireError) -> ProtocolError {
    ProtocolError::Transport(e.to_string())
}

struct WireProverEndpoint<'a, T: LineTransport> {
    transport: &'a mut T,
    modulus: PrimeModulus,
    eta: usize,
}

impl<T: LineTransport> WireProverEndpoint<'_, T> {
    fn recv(&mut self) -> Result<WireMessage, ProtocolError> {
        let line = self
            .transport
            .recv_line()
            .map_err(transport_failure)?
            .ok_or_else(|| ProtocolError::Transport("connection closed".into()))?;
        match WireMessage::decode(&line) {
            Ok(WireMessage::Error { reason }) => {
                Err(ProtocolError::Transport(format!("remote error: {reason}")))
            }
            Ok(m) => Ok(m),
            Err(e) => {
                let _ = self.transport.send_line("ERROR malformed");
                Err(ProtocolError::Violation(e.to_string()))
            }
        }
    }

    fn send(&mut self, m: &WireMessage) -> Result<(), ProtocolError> {
        let line = m.encode().map_err(transport_failure)?;
        self.transport.send_line(&line).map_err(transport_failure)
    }

    fn violation(&mut self, what: String) -> ProtocolError {
        let _ = self.transport.send_line("ERROR unexpected-message");
        ProtocolError::Violation(what)
    }

    fn element(&mut self, v: u64) -> Result<FieldElement, ProtocolError> {
        self.modulus.try_element(v).map_err(|_| {
            let _ = self.transport.send_line("ERROR non-canonical");
            ProtocolError::Violation(format!("non-canonical value {v}"))
        })
    }
}

impl<T: LineTransport> ProverEndpoint for WireProverEndpoint<'_, T> {
    fn fetch_claim(&mut self) -> Result<FieldElement, ProtocolError> {
        match self.recv()? {
            WireMessage::Claim { value } => self.element(value),
            other => Err(self.violation(format!("wanted CLAIM, got {other:?}"))),
        }
    }

    fn fetch_round_values(
        &mut self,
        experiment: u64,
        level: u32,
    ) -> Result<Vec<FieldElement>, ProtocolError> {
        match self.recv()? {
            WireMessage::Round {
                experiment: e,
                level: l,
                values,
            } => {
                if e != experiment || l != level {
                    return Err(self.violation(format!(
                        "ROUND {e} {l}, expected {experiment} {level}"
                    )));
                }
                if values.len() != self.eta {
                    let _ = self.transport.send_line("ERROR bad-arity");
                    return Err(ProtocolError::WrongValueCount {
                        expected: self.eta,
                        got: values.len(),
                    });
                }
                values.into_iter().map(|v| self.element(v)).collect()
            }
            other => Err(self.violation(format!("wanted ROUND, got {other:?}"))),
        }
    }

    fn send_challenge(
        &mut self,
        experiment: u64,
        level: u32,
        b: u32,
    ) -> Result<(), ProtocolError> {
        self.send(&WireMessage::Chal {
            experiment,
            level,
            b,
        })
    }

    fn send_final(&mut self, experiment: u64, value: FieldElement) -> Result<(), ProtocolError> {
        self.send(&WireMessage::Final {
            experiment,
            value: value.value(),
        })
    }

    fn send_verdict(&mut self, verdict: &Verdict) -> Result<(), ProtocolError> {
        let reason = match verdict {
            Verdict::Accept => "ok".to_string(),
            Verdict::Reject(RejectReason::RoundCheck { level, .. }) => format!("round-{level}"),
            Verdict::Reject(RejectReason::FinalCheck { .. }) => "final".to_string(),
        };
        self.send(&WireMessage::Verdict {
            accept: verdict.is_accept(),
            reason,
        })
    }
}

/// Runs the whole verifier protocol over an established transport:
/// handshake, evaluation request, then the shared driver. The verdict and
/// transcript are identical to an in-process run under the same seed.
pub fn run_verifier_session<T: LineTransport>(
    transport: &mut T,
    params: &ProtocolParams,
    table: &dyn TableSource,
    x: FieldElement,
    seed: u64,
) -> Result<ProtocolRun, WireError> {
    if table.digest() != params.digest() {
        return Err(WireError::DigestMismatch);
    }
    if x.modulus() != params.modulus() {
        return Err(WireError::Protocol(ProtocolError::ParamsMismatch(format!(
            "evaluation point modulus {} vs params modulus {}",
            x.modulus(),
            params.modulus()
        ))));
    }

    transport.send_line(
        &WireMessage::Hello {
            digest_hex: params.digest_hex(),
        }
        .encode()?,
    )?;
    let line = transport
        .recv_line()?
        .ok_or(WireError::Closed)?;
    match WireMessage::decode(&line)? {
        WireMessage::Hello { digest_hex } => {
            if digest_hex != params.digest_hex() {
                return Err(WireError::DigestMismatch);
            }
        }
        WireMessage::Error { reason } => return Err(WireError::Remote(reason)),
        other => return Err(WireError::Unexpected(format!("wanted HELLO, got {other:?}"))),
    }
    transport.send_line(&WireMessage::Eval { x: x.value() }.encode()?)?;

    let ztable = ZTable::build(params);
    let schedule = Schedule::univariate(x, params.r());
    let mut endpoint = WireProverEndpoint {
        transport,
        modulus: params.modulus(),
        eta: params.eta() as usize,
    };
    let mut coins = SeededCoins::new(seed);
    drive_verifier(
        &mut endpoint,
        params,
        &ztable,
        table,
        &schedule,
        &mut coins,
        params.m(),
    )
    .map_err(WireError::Protocol)
}

/// Connects to a prover service and runs one session.
pub fn connect_verifier<A: ToSocketAddrs>(
    addr: A,
    params: &ProtocolParams,
    table: &dyn TableSource,
    x: FieldElement,
    seed: u64,
    timeout: Option<Duration>,
) -> Result<ProtocolRun, WireError> {
    let stream = TcpStream::connect(addr)?;
    stream.set_read_timeout(timeout)?;
    stream.set_write_timeout(timeout)?;
    let mut transport = tcp_transport(stream)?;
    run_verifier_session(&mut transport, params, table, x, seed)
}
