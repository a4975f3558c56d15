//! Cross-module checks: every cataloged protocol is deterministic over both
//! transports, its transcript log round-trips and replays cleanly, the
//! published spec satisfies the fairness predicate, and a recorded local view
//! is sufficient to reproduce a party's output.

use twoparty::catalog::{all_specs, run_configured, verify_transcript, RunConfig};
use twoparty::numtheory::gen_blum;
use twoparty::oblivious::{RabinReceiver, RabinSender, OtSecretFactorization};
use twoparty::session::{
    check_fairness, parse_log, replay_view, run_session, write_log, InProcTransport,
    LoopbackTransport, Role,
};
use twoparty::wire::Writer;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// A reduced-size config per protocol so the full sweep stays fast.
fn config_for(id: &str) -> RunConfig {
    let mut cfg = RunConfig::new(id, 11, 22);
    cfg.bits = 24;
    cfg.m = 3;
    cfg
}

#[test]
fn every_protocol_is_deterministic_across_transports() {
    for spec in all_specs() {
        let cfg = config_for(spec.id);
        let mut inproc = InProcTransport::new();
        let a = run_configured(&cfg, &mut inproc).unwrap_or_else(|e| panic!("{}: {e}", spec.id));
        let mut loopback = LoopbackTransport::new().expect("loopback socket");
        let b = run_configured(&cfg, &mut loopback).unwrap_or_else(|e| panic!("{}: {e}", spec.id));
        assert_eq!(
            write_log(&a.result.transcript),
            write_log(&b.result.transcript),
            "{}: transports disagree",
            spec.id
        );
        assert_eq!(a.summary_a, b.summary_a, "{}", spec.id);
        assert_eq!(a.summary_b, b.summary_b, "{}", spec.id);
    }
}

#[test]
fn every_transcript_log_round_trips_and_replays() {
    for spec in all_specs() {
        let cfg = config_for(spec.id);
        let mut t = InProcTransport::new();
        let out = run_configured(&cfg, &mut t).unwrap();
        let text = write_log(&out.result.transcript);
        let parsed = parse_log(&text).unwrap_or_else(|e| panic!("{}: {e}", spec.id));
        assert_eq!(write_log(&parsed), text, "{}: log round trip", spec.id);
        verify_transcript(&parsed).unwrap_or_else(|e| panic!("{}: {e}", spec.id));
    }
}

#[test]
fn every_spec_satisfies_the_fairness_predicate() {
    for spec in all_specs() {
        assert!(check_fairness(spec), "{}: fairness predicate", spec.id);
    }
}

#[test]
fn a_recorded_view_reproduces_the_output_without_the_peer() {
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let modulus = gen_blum(24, &mut rng);
    let params = Writer::new().int(modulus.n()).finish();
    let mut sender = RabinSender::new(OtSecretFactorization(modulus.clone()));
    let mut receiver = RabinReceiver::new();
    let mut t = InProcTransport::new();
    let result = run_session(
        "rabin-ot",
        params,
        &mut sender,
        &mut receiver,
        Role::A,
        41,
        42,
        &mut t,
    )
    .unwrap();

    let mut fresh = RabinReceiver::new();
    let replayed = replay_view(&mut fresh, &result.outcome_b.view).unwrap();
    assert_eq!(replayed, result.outcome_b.output);

    let mut fresh_sender = RabinSender::new(OtSecretFactorization(modulus));
    let replayed_a = replay_view(&mut fresh_sender, &result.outcome_a.view).unwrap();
    assert_eq!(replayed_a, result.outcome_a.output);
}
