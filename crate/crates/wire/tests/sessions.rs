//! Session-level wire tests: transport transparency against in-process
//! runs, the error taxonomy, and robustness against garbage input.

use std::thread;
use std::time::Duration;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use vpe_core::field::PrimeModulus;
use vpe_core::lookup::LookupTable;
use vpe_core::params::ProtocolParams;
use vpe_core::poly::{Polynomial, ZTable};
use vpe_core::protocol::{
    run_protocol, AdversaryStrategy, CorruptionPolicy, ProtocolError, ProverSpec,
};
use vpe_wire::{
    connect_verifier, loopback_pair, run_verifier_session, serve_session, ChannelTransport,
    LineTransport, ProverConfig, ProverServer, WireError,
};

fn p97() -> PrimeModulus {
    PrimeModulus::new(97).unwrap()
}

fn setup(d: u64, eta: u32, c_eta: u32, seed: u64) -> (ProtocolParams, Polynomial, LookupTable) {
    let params = ProtocolParams::derive(p97(), d, eta, c_eta).unwrap();
    let zt = ZTable::build(&params);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let f = Polynomial::random(d as usize, p97(), &mut rng);
    let table = LookupTable::build(&f, &params, &zt).unwrap();
    (params, f, table)
}

fn spawn_server(cfg: ProverConfig) -> (thread::JoinHandle<Result<(), WireError>>, ChannelTransport) {
    let (mut server_side, client_side) = loopback_pair();
    let handle = thread::spawn(move || serve_session(&mut server_side, &cfg));
    (handle, client_side)
}

#[test]
fn loopback_transcripts_match_in_process_execution() {
    let (params, f, table) = setup(16, 2, 4, 1);
    let x = p97().element(7);
    for seed in [0u64, 5, 123, 9999] {
        let local = run_protocol(&f, &params, &table, x, ProverSpec::Honest, seed).unwrap();
        let cfg = ProverConfig {
            f: f.clone(),
            params: params.clone(),
            spec: ProverSpec::Honest,
            seed,
        };
        let (server, mut client) = spawn_server(cfg);
        let remote = run_verifier_session(&mut client, &params, &table, x, seed).unwrap();
        server.join().unwrap().unwrap();
        assert_eq!(local.transcript.render(), remote.transcript.render());
        assert_eq!(local.verdict, remote.verdict);
    }
}

#[test]
fn adversarial_server_is_rejected_like_in_process() {
    let (params, f, table) = setup(4, 2, 4, 2);
    let x = p97().element(2);
    let spec = ProverSpec::Adversary(AdversaryStrategy::WrongClaim {
        delta: 1,
        policy: CorruptionPolicy::CorruptMin,
    });
    let mut rejects = 0;
    for seed in 0..40u64 {
        let local = run_protocol(&f, &params, &table, x, spec, seed).unwrap();
        let cfg = ProverConfig {
            f: f.clone(),
            params: params.clone(),
            spec,
            seed,
        };
        let (server, mut client) = spawn_server(cfg);
        let remote = run_verifier_session(&mut client, &params, &table, x, seed).unwrap();
        let _ = server.join().unwrap();
        assert_eq!(local.verdict, remote.verdict, "seed {seed}");
        assert_eq!(local.transcript.render(), remote.transcript.render());
        rejects += (!remote.verdict.is_accept()) as u32;
    }
    // Amplified acceptance is ~3.7%, so nearly every run rejects.
    assert!(rejects >= 30, "only {rejects}/40 rejects");
}

#[test]
fn eval_before_hello_is_a_handshake_error() {
    let (params, f, _) = setup(4, 2, 4, 3);
    let cfg = ProverConfig {
        f,
        params,
        spec: ProverSpec::Honest,
        seed: 0,
    };
    let (server, mut client) = spawn_server(cfg);
    client.send_line("EVAL 5").unwrap();
    assert_eq!(client.recv_line().unwrap().unwrap(), "ERROR handshake");
    assert_eq!(client.recv_line().unwrap(), None);
    assert!(matches!(server.join().unwrap(), Err(WireError::Handshake(_))));
}

#[test]
fn digest_mismatch_aborts_before_any_round() {
    let (params, f, _) = setup(4, 2, 4, 4);
    let (other_params, _, other_table) = setup(4, 2, 3, 4);

    // Client side: local table does not match the params it dials with.
    let (mut a, _b) = loopback_pair();
    let err = run_verifier_session(&mut a, &params, &other_table, p97().element(1), 0)
        .unwrap_err();
    assert_eq!(err, WireError::DigestMismatch);

    // Server side: peer HELLO carries a foreign digest.
    let cfg = ProverConfig {
        f,
        params,
        spec: ProverSpec::Honest,
        seed: 0,
    };
    let (server, mut client) = spawn_server(cfg);
    client
        .send_line(&format!("HELLO v1 {}", other_params.digest_hex()))
        .unwrap();
    assert_eq!(
        client.recv_line().unwrap().unwrap(),
        "ERROR digest-mismatch"
    );
    assert_eq!(server.join().unwrap(), Err(WireError::DigestMismatch));
}

#[test]
fn connection_drop_mid_round_is_a_transport_failure() {
    let (params, f, table) = setup(4, 2, 4, 5);
    let spec = ProverSpec::Adversary(AdversaryStrategy::HonestThenNothing);
    let cfg = ProverConfig {
        f,
        params: params.clone(),
        spec,
        seed: 0,
    };
    let (server, mut client) = spawn_server(cfg);
    let err = run_verifier_session(&mut client, &params, &table, p97().element(2), 1).unwrap_err();
    match err {
        WireError::Protocol(ProtocolError::Transport(_)) => {}
        other => panic!("expected transport failure, got {other:?}"),
    }
    server.join().unwrap().unwrap();
}

#[test]
fn garbage_instead_of_chal_gets_error_and_close() {
    let (params, f, _) = setup(4, 2, 4, 6);
    let cfg = ProverConfig {
        f,
        params: params.clone(),
        spec: ProverSpec::Honest,
        seed: 0,
    };
    let (server, mut client) = spawn_server(cfg);
    client
        .send_line(&format!("HELLO v1 {}", params.digest_hex()))
        .unwrap();
    assert!(client.recv_line().unwrap().unwrap().starts_with("HELLO v1 "));
    client.send_line("EVAL 2").unwrap();
    assert!(client.recv_line().unwrap().unwrap().starts_with("CLAIM "));
    assert!(client.recv_line().unwrap().unwrap().starts_with("ROUND 0 1 "));
    client.send_line("CHAL 0 1 abc").unwrap();
    assert_eq!(client.recv_line().unwrap().unwrap(), "ERROR non-decimal");
    assert_eq!(client.recv_line().unwrap(), None);
    assert!(server.join().unwrap().is_err());
}

#[test]
fn single_garbage_lines_never_hang_or_panic_the_server() {
    let (params, f, _) = setup(4, 2, 4, 7);
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for _ in 0..2000 {
        let len = (rng.next_u32() % 120) as usize;
        let mut line: Vec<u8> = (0..len).map(|_| (rng.next_u32() & 0xff) as u8).collect();
        line.retain(|&b| b != b'\n');
        let cfg = ProverConfig {
            f: f.clone(),
            params: params.clone(),
            spec: ProverSpec::Honest,
            seed: 0,
        };
        let (server, client) = spawn_server(cfg);
        client.send_raw(line).unwrap();
        // The server must answer with ERROR (or close on a clean EOF) and
        // terminate; a panic would surface in join().
        let mut client = client;
        match client.recv_line() {
            Ok(Some(reply)) => assert!(reply.starts_with("ERROR "), "reply {reply:?}"),
            Ok(None) => {}
            Err(e) => panic!("client transport error {e:?}"),
        }
        let _ = server.join().unwrap();
    }
}

#[test]
fn tcp_end_to_end_matches_in_process() {
    let (params, f, table) = setup(8, 2, 4, 8);
    let x = p97().element(11);
    let cfg = ProverConfig {
        f: f.clone(),
        params: params.clone(),
        spec: ProverSpec::Honest,
        seed: 0,
    };
    let server = ProverServer::bind("127.0.0.1:0", cfg).unwrap();
    let addr = server.local_addr().unwrap();
    let handle = thread::spawn(move || server.serve(Some(3)));
    for seed in [1u64, 2, 3] {
        let local = run_protocol(&f, &params, &table, x, ProverSpec::Honest, seed).unwrap();
        let remote = connect_verifier(
            addr,
            &params,
            &table,
            x,
            seed,
            Some(Duration::from_secs(10)),
        )
        .unwrap();
        assert!(remote.verdict.is_accept());
        assert_eq!(local.transcript.render(), remote.transcript.render());
    }
    handle.join().unwrap().unwrap();
}
