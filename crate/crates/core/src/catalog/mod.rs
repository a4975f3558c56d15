//! Protocol catalog: every shipped protocol, runnable by identifier with a
//! uniform parameter set, plus offline transcript verification.
//!
//! Public set-up material (moduli, fields, graphs) is derived from a hash of
//! the protocol identifier and both seeds, so a (config, seeds) pair fully
//! determines a run and its transcript.

mod verify;

pub use verify::{verify_transcript, verify_transcript_text, VerifyError};

use rand::SeedableRng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::Bits;
use crate::derived::{
    run_byzantine_agreement, run_coin_flip_general, run_coin_flip_qrp, run_contract_sign,
    run_millionaires, run_secret_exchange, run_string_verification, run_tscp, ComparisonInput,
    ExchangeOutcome, BYZANTINE_AGREEMENT_SPEC, COIN_FLIP_GENERAL_SPEC, COIN_FLIP_QRP_SPEC,
    CONTRACT_SIGN_SPEC, MILLIONAIRES_SPEC, SECRET_EXCHANGE_SPEC, STRING_VERIFICATION_SPEC,
    TSCP_SPEC, VERDICT_DIFFERENT,
};
use crate::graphs::gen_hamiltonian_graph;
use crate::numtheory::{gen_blum, gen_field, gen_modulus};
use crate::oblivious::{
    generate_stock, rank_bits, run_composed_ot, run_dlp_1of2, run_graph_1of2, run_graph_ot,
    run_rabin, run_secret_sale, ComposedOtPair, DlpOtParams, GraphOtOutcome, OtSecretIsomorphism,
    PlantedPair, RabinOutcome, TwoSecrets, COMPOSED_OT_SPEC, DLP_1OF2_SPEC, GRAPH_1OF2_SPEC,
    GRAPH_OT_SPEC, RABIN_SPEC, SECRET_SALE_SPEC,
};
use crate::session::{ProtocolSpec, SessionError, SessionResult, SessionRng, Transport};
use crate::zkproof::{
    run_graph_zkp, run_graph_zkp_cheat, run_nonresidue_proof, run_qrp_zkp, run_qrp_zkp_cheat,
    QrpIdentity, GRAPH_ZKP_SPEC, NONRESIDUE_SPEC, QRP_ZKP_SPEC,
};

/// Every protocol the crate ships, in catalog order.
pub fn all_specs() -> Vec<&'static ProtocolSpec> {
    vec![
        &RABIN_SPEC,
        &GRAPH_OT_SPEC,
        &DLP_1OF2_SPEC,
        &GRAPH_1OF2_SPEC,
        &SECRET_SALE_SPEC,
        &COMPOSED_OT_SPEC,
        &QRP_ZKP_SPEC,
        &GRAPH_ZKP_SPEC,
        &NONRESIDUE_SPEC,
        &COIN_FLIP_QRP_SPEC,
        &COIN_FLIP_GENERAL_SPEC,
        &SECRET_EXCHANGE_SPEC,
        &CONTRACT_SIGN_SPEC,
        &TSCP_SPEC,
        &BYZANTINE_AGREEMENT_SPEC,
        &STRING_VERIFICATION_SPEC,
        &MILLIONAIRES_SPEC,
    ]
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown protocol {0:?}")]
    UnknownProtocol(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// A fully specified run of one protocol. Every field has a usable default;
/// each protocol reads the ones that apply to it.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub protocol: String,
    /// Modulus or field size in bits.
    pub bits: u64,
    /// Graph order, string length, or comparison bit width.
    pub n: usize,
    /// Secret or mask width in bits.
    pub k: usize,
    /// Round count (proof rounds, exchange rounds, signing-cycle budget).
    pub m: u32,
    /// Stock size for the secret sale.
    pub count: usize,
    /// Receiver's choice index where one applies.
    pub choice: u64,
    pub wealth_a: u64,
    pub wealth_b: u64,
    /// Explicit bit-string inputs ("0"/"1" characters) where one applies.
    pub secret_a: Option<String>,
    pub secret_b: Option<String>,
    pub seed_a: u64,
    pub seed_b: u64,
}

impl RunConfig {
    pub fn new(protocol: &str, seed_a: u64, seed_b: u64) -> Self {
        RunConfig {
            protocol: protocol.to_string(),
            bits: 32,
            n: 6,
            k: 8,
            m: 4,
            count: 3,
            choice: 0,
            wealth_a: 5,
            wealth_b: 3,
            secret_a: None,
            secret_b: None,
            seed_a,
            seed_b,
        }
    }
}

/// One finished run: the full session record plus a printable line per party.
#[derive(Debug)]
pub struct RunOutput {
    pub result: SessionResult,
    pub summary_a: String,
    pub summary_b: String,
}

/// Deterministic source for public set-up material.
fn setup_rng(protocol: &str, seed_a: u64, seed_b: u64) -> SessionRng {
    let mut h = Sha256::new();
    h.update(b"setup:");
    h.update(protocol.as_bytes());
    h.update(seed_a.to_be_bytes());
    h.update(seed_b.to_be_bytes());
    SessionRng::from_seed(h.finalize().into())
}

fn parse_bit_string(s: &str, what: &str) -> Result<Bits, CatalogError> {
    if s.is_empty() {
        return Err(CatalogError::BadParameter(format!("{what} is empty")));
    }
    let mut bits = Bits::zero(s.len());
    for (i, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => bits.set(i, true),
            other => {
                return Err(CatalogError::BadParameter(format!(
                    "{what} contains {other:?}; expected only 0 and 1"
                )))
            }
        }
    }
    Ok(bits)
}

fn bit_string(bits: &Bits) -> String {
    (0..bits.len())
        .map(|i| if bits.get(i) { '1' } else { '0' })
        .collect()
}

fn graph_err(e: crate::graphs::GraphError) -> CatalogError {
    CatalogError::BadParameter(e.to_string())
}

/// Run the configured protocol over the given transport.
pub fn run_configured(
    cfg: &RunConfig,
    transport: &mut dyn Transport,
) -> Result<RunOutput, CatalogError> {
    let mut setup = setup_rng(&cfg.protocol, cfg.seed_a, cfg.seed_b);
    let bits = cfg.bits.clamp(8, 256);
    let field_bits = cfg.bits.clamp(4, 64);
    let (sa, sb) = (cfg.seed_a, cfg.seed_b);

    match cfg.protocol.as_str() {
        "rabin-ot" => {
            let modulus = gen_modulus(bits, false, &mut setup);
            let (result, outcome) = run_rabin(modulus, sa, sb, transport)?;
            let summary_b = match outcome {
                RabinOutcome::Factors(p, q) => format!("outcome=factors p={p} q={q}"),
                RabinOutcome::Nothing => "outcome=nothing".to_string(),
            };
            Ok(RunOutput {
                result,
                summary_a: "outcome=sent-root".to_string(),
                summary_b,
            })
        }
        "graph-ot" => {
            let n = cfg.n.max(6);
            let secret = OtSecretIsomorphism::generate(n, &mut setup).map_err(graph_err)?;
            let (result, outcome) = run_graph_ot(secret, sa, sb, transport)?;
            let summary_b = match outcome {
                GraphOtOutcome::Isomorphism(p) => {
                    format!("outcome=isomorphism rank={}", p.rank())
                }
                GraphOtOutcome::Nothing => "outcome=nothing".to_string(),
            };
            Ok(RunOutput {
                result,
                summary_a: "outcome=answered-challenge".to_string(),
                summary_b,
            })
        }
        "dlp-1of2-ot" => {
            let params = DlpOtParams::new(gen_field(field_bits, &mut setup), cfg.k.max(1));
            let secrets = TwoSecrets::random(params.k, &mut setup);
            let choice = cfg.choice % 2 == 1;
            let (result, received) = run_dlp_1of2(&params, secrets.clone(), choice, sa, sb, transport)?;
            Ok(RunOutput {
                result,
                summary_a: format!(
                    "secrets s0={} s1={}",
                    bit_string(secrets.get(false)),
                    bit_string(secrets.get(true))
                ),
                summary_b: format!("choice={} received={}", choice as u8, bit_string(&received)),
            })
        }
        "graph-1of2-ot" => {
            let n = cfg.n.max(3);
            let pair = PlantedPair::generate(n, n, &mut setup);
            let choice = cfg.choice % 2 == 1;
            let (result, outcome) = run_graph_1of2(pair, choice, sa, sb, transport)?;
            Ok(RunOutput {
                result,
                summary_a: "outcome=answered-challenge".to_string(),
                summary_b: format!(
                    "choice={} witness={:?}",
                    outcome.choice as u8, outcome.witness
                ),
            })
        }
        "secret-sale" => {
            let n = cfg.n.max(3);
            let count = cfg.count.max(2);
            let stock = generate_stock(count, n, n, &mut setup);
            let choice = (cfg.choice as usize) % count;
            let (result, outcome) = run_secret_sale(stock, choice, sa, sb, transport)?;
            Ok(RunOutput {
                result,
                summary_a: format!("stock={count}"),
                summary_b: format!(
                    "choice={} witness={:?}",
                    outcome.choice, outcome.witness
                ),
            })
        }
        "composed-ot" => {
            let n = cfg.n.max(6);
            let pair = ComposedOtPair::generate(n, &mut setup).map_err(graph_err)?;
            let params = DlpOtParams::new(gen_field(field_bits, &mut setup), rank_bits(n));
            let (result, outcome) = run_composed_ot(&params, pair, sa, sb, transport)?;
            let delivered = match &outcome.delivered {
                Some(p) => format!("isomorphism rank={}", p.rank()),
                None => "nothing".to_string(),
            };
            Ok(RunOutput {
                result,
                summary_a: "outcome=answered-both".to_string(),
                summary_b: format!(
                    "c1={} c2={} delivered={delivered}",
                    outcome.c1 as u8, outcome.c2 as u8
                ),
            })
        }
        "zkp-qrp" | "zkp-qrp-cheat" => {
            let identity = QrpIdentity::setup(bits, &mut setup);
            let m = cfg.m.max(1);
            let (result, verdict) = if cfg.protocol.ends_with("cheat") {
                run_qrp_zkp_cheat(identity.n(), identity.v(), m, sa, sb, transport)?
            } else {
                run_qrp_zkp(identity, m, sa, sb, transport)?
            };
            let line = format!(
                "accepted={} rounds={} failure_round={:?}",
                verdict.accepted, verdict.rounds, verdict.failure_round
            );
            Ok(RunOutput {
                result,
                summary_a: line.clone(),
                summary_b: line,
            })
        }
        "zkp-graph" | "zkp-graph-cheat" => {
            let n = cfg.n.max(3);
            let planted = gen_hamiltonian_graph(n, n, &mut setup);
            let m = cfg.m.max(1);
            let (result, verdict) = if cfg.protocol.ends_with("cheat") {
                run_graph_zkp_cheat(&planted.graph, m, sa, sb, transport)?
            } else {
                run_graph_zkp(planted, m, sa, sb, transport)?
            };
            let line = format!(
                "accepted={} rounds={} failure_round={:?}",
                verdict.accepted, verdict.rounds, verdict.failure_round
            );
            Ok(RunOutput {
                result,
                summary_a: line.clone(),
                summary_b: line,
            })
        }
        "zkp-nonresidue" => {
            let modulus = gen_blum(bits, &mut setup);
            let y = modulus.sample_nonresidue_jacobi1(&mut setup);
            let t = cfg.m.max(1) as usize;
            let (result, accepted) = run_nonresidue_proof(modulus, y, t, sa, sb, transport)?;
            let line = format!("accepted={accepted}");
            Ok(RunOutput {
                result,
                summary_a: line.clone(),
                summary_b: line,
            })
        }
        "coin-flip-qrp" | "coin-flip-general" => {
            let (result, coin) = if cfg.protocol == "coin-flip-qrp" {
                run_coin_flip_qrp(bits, sa, sb, transport)?
            } else {
                let field = gen_field(field_bits, &mut setup);
                run_coin_flip_general(&field, sa, sb, transport)?
            };
            let line = format!(
                "outcome={} winner={} proof={}",
                if coin.outcome { "odd" } else { "even" },
                coin.winner,
                hex::encode(&coin.proof_data)
            );
            Ok(RunOutput {
                result,
                summary_a: line.clone(),
                summary_b: line,
            })
        }
        "secret-exchange-graph" => {
            let n = cfg.n.max(6);
            let a_secret = OtSecretIsomorphism::generate(n, &mut setup).map_err(graph_err)?;
            let b_secret = OtSecretIsomorphism::generate(n, &mut setup).map_err(graph_err)?;
            let (result, got_a, got_b) =
                run_secret_exchange(a_secret, b_secret, cfg.m, sa, sb, transport)?;
            let describe = |o: &ExchangeOutcome| match o {
                ExchangeOutcome::Obtained(p) => format!("obtained rank={}", p.rank()),
                ExchangeOutcome::Nothing => "nothing".to_string(),
            };
            Ok(RunOutput {
                summary_a: describe(&got_a),
                summary_b: describe(&got_b),
                result,
            })
        }
        "contract-sign" => {
            let a_mod = gen_modulus(bits, false, &mut setup);
            let b_mod = gen_modulus(bits, false, &mut setup);
            let contract = b"the undersigned agree to the terms above";
            let (result, out_a, out_b) =
                run_contract_sign(contract, a_mod, b_mod, cfg.m, sa, sb, transport)?;
            let describe = |o: &crate::derived::ContractOutcome| {
                format!(
                    "signed={} rounds={} holds_factors={}",
                    o.signed,
                    o.rounds_used,
                    o.peer_factors.is_some()
                )
            };
            Ok(RunOutput {
                summary_a: describe(&out_a),
                summary_b: describe(&out_b),
                result,
            })
        }
        "tscp" => {
            let params = DlpOtParams::new(gen_field(field_bits, &mut setup), cfg.k.max(1));
            let secret_a = match &cfg.secret_a {
                Some(s) => parse_bit_string(s, "secret-a")?,
                None => Bits::random(cfg.n.max(1), &mut setup),
            };
            let secret_b = match &cfg.secret_b {
                Some(s) => parse_bit_string(s, "secret-b")?,
                None => Bits::random(cfg.n.max(1), &mut setup),
            };
            let a_input = ComparisonInput::random(secret_a, params.k, &mut setup);
            let b_input = ComparisonInput::random(secret_b, params.k, &mut setup);
            let (result, va, vb) = run_tscp(&params, a_input, b_input, sa, sb, transport)?;
            Ok(RunOutput {
                result,
                summary_a: format!("verdict={}", verdict_name(va)),
                summary_b: format!("verdict={}", verdict_name(vb)),
            })
        }
        "byzantine-agreement" => {
            let params = DlpOtParams::new(gen_field(field_bits, &mut setup), 1);
            let bit_a = match &cfg.secret_a {
                Some(s) => parse_bit_string(s, "secret-a")?.get(0),
                None => false,
            };
            let bit_b = match &cfg.secret_b {
                Some(s) => parse_bit_string(s, "secret-b")?.get(0),
                None => true,
            };
            let (result, va, vb) =
                run_byzantine_agreement(&params, bit_a, bit_b, sa, sb, transport)?;
            Ok(RunOutput {
                result,
                summary_a: format!("verdict={}", verdict_name(va)),
                summary_b: format!("verdict={}", verdict_name(vb)),
            })
        }
        "string-verification" => {
            let params = DlpOtParams::new(gen_field(field_bits, &mut setup), cfg.k.max(1));
            let secret_a = match &cfg.secret_a {
                Some(s) => parse_bit_string(s, "secret-a")?,
                None => Bits::random(cfg.n.max(1), &mut setup),
            };
            let secret_b = match &cfg.secret_b {
                Some(s) => parse_bit_string(s, "secret-b")?,
                None => Bits::random(cfg.n.max(1), &mut setup),
            };
            if secret_a.len() != secret_b.len() {
                return Err(CatalogError::BadParameter(
                    "secret-a and secret-b must have the same length".into(),
                ));
            }
            let (result, va, vb) =
                run_string_verification(&params, &secret_a, &secret_b, sa, sb, transport)?;
            Ok(RunOutput {
                result,
                summary_a: format!("verdict={}", verdict_name(va)),
                summary_b: format!("verdict={}", verdict_name(vb)),
            })
        }
        "millionaires" => {
            let params = DlpOtParams::new(gen_field(field_bits, &mut setup), cfg.k.max(1));
            let width = cfg.n.clamp(1, 63);
            let cap = 1u64 << width;
            let (w_a, w_b) = (cfg.wealth_a % cap, cfg.wealth_b % cap);
            let (result, va, vb) =
                run_millionaires(&params, w_a, w_b, width, sa, sb, transport)?;
            let describe =
                |v: u8| format!("verdict={}", if v == 0 { "a-richer" } else { "a-not-richer" });
            Ok(RunOutput {
                result,
                summary_a: describe(va),
                summary_b: describe(vb),
            })
        }
        other => Err(CatalogError::UnknownProtocol(other.to_string())),
    }
}

fn verdict_name(v: u8) -> &'static str {
    if v == VERDICT_DIFFERENT {
        "different"
    } else {
        "possibly-equal"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::InProcTransport;

    /// Every catalog identifier runs to completion with defaults; the same
    /// config yields a byte-identical transcript.
    #[test]
    fn every_identifier_runs_and_is_deterministic() {
        for spec in all_specs() {
            let cfg = RunConfig::new(spec.id, 11, 12);
            let mut t1 = InProcTransport::new();
            let out1 = run_configured(&cfg, &mut t1)
                .unwrap_or_else(|e| panic!("{} failed: {e}", spec.id));
            let mut t2 = InProcTransport::new();
            let out2 = run_configured(&cfg, &mut t2).unwrap();
            assert_eq!(
                out1.result.transcript, out2.result.transcript,
                "{} transcript changed between identical runs",
                spec.id
            );
            assert_eq!(out1.summary_a, out2.summary_a, "{}", spec.id);
            assert_eq!(out1.summary_b, out2.summary_b, "{}", spec.id);
        }
    }

    #[test]
    fn cheat_variants_run() {
        for id in ["zkp-qrp-cheat", "zkp-graph-cheat"] {
            let cfg = RunConfig::new(id, 3, 4);
            let mut t = InProcTransport::new();
            let out = run_configured(&cfg, &mut t).unwrap();
            assert!(out.summary_a.starts_with("accepted="), "{id}");
        }
    }

    #[test]
    fn unknown_identifier_is_rejected() {
        let cfg = RunConfig::new("no-such-protocol", 1, 2);
        let mut t = InProcTransport::new();
        match run_configured(&cfg, &mut t) {
            Err(CatalogError::UnknownProtocol(id)) => assert_eq!(id, "no-such-protocol"),
            other => panic!("expected unknown-protocol error, got {other:?}"),
        }
    }

    #[test]
    fn explicit_bit_strings_drive_the_comparison() {
        let mut cfg = RunConfig::new("string-verification", 5, 6);
        cfg.k = 32;
        cfg.secret_a = Some("10101010".into());
        cfg.secret_b = Some("10101010".into());
        let mut t = InProcTransport::new();
        let out = run_configured(&cfg, &mut t).unwrap();
        assert_eq!(out.summary_a, "verdict=possibly-equal");
        cfg.secret_b = Some("10101011".into());
        let mut t = InProcTransport::new();
        let out = run_configured(&cfg, &mut t).unwrap();
        assert_eq!(out.summary_a, "verdict=different");
    }

    #[test]
    fn malformed_bit_string_is_a_parameter_error() {
        let mut cfg = RunConfig::new("string-verification", 5, 6);
        cfg.secret_a = Some("10x".into());
        cfg.secret_b = Some("101".into());
        let mut t = InProcTransport::new();
        assert!(matches!(
            run_configured(&cfg, &mut t),
            Err(CatalogError::BadParameter(_))
        ));
    }
}
